#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "collab/datagen.hpp"
#include "collab/diagram.hpp"
#include "collab/error.hpp"
#include "collab/evaluation.hpp"
#include "collab/model_io.hpp"
#include "collab/oracle.hpp"
#include "collab/schema.hpp"
#include "collab/table.hpp"
#include "collab/xmdi.hpp"

namespace collab::cli {

namespace fs = std::filesystem;

namespace {

Error config_error(const std::string& msg) { return Error(ErrorCategory::Config, msg); }

std::size_t parse_count(std::string_view key, std::string_view value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw config_error(std::string(key) + " expects a nonnegative integer, got '" + std::string(value) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  if (value == "inf") return kInfinity;
  auto v = parse_number(value);
  if (!v) throw config_error(std::string(key) + " expects a number, got '" + std::string(value) + "'");
  return *v;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void set_hyperparam(Hyperparams& hp, std::string_view key, std::string_view value) {
  if (key == "n_estimators") {
    hp.n_estimators = parse_count(key, value);
  } else if (key == "n_trees") {
    hp.n_trees = parse_count(key, value);
  } else if (key == "alpha") {
    hp.alpha = parse_real(key, value);
  } else if (key == "min_samples_split") {
    hp.min_samples_split = parse_count(key, value);
  } else if (key == "min_samples_leaf") {
    hp.min_samples_leaf = parse_count(key, value);
  } else if (key == "n_bins") {
    if (value == "none") {
      hp.n_bins.reset();
    } else {
      hp.n_bins = static_cast<int>(parse_count(key, value));
    }
  } else if (key == "random_update") {
    hp.random_update = parse_real(key, value);
  } else if (key == "max_depth") {
    hp.max_depth = value == "inf" ? kUnlimitedDepth : parse_count(key, value);
  } else if (key == "seed") {
    hp.seed = parse_count(key, value);
  } else {
    throw config_error("unknown hyperparameter '" + std::string(key) + "'");
  }
}

std::string format_hyperparams(const Hyperparams& hp) {
  std::ostringstream out;
  out << "n_estimators=" << hp.n_estimators << '\n';
  out << "n_trees=" << hp.n_trees << '\n';
  out << "alpha=" << fmt(hp.alpha) << '\n';
  out << "min_samples_split=" << hp.min_samples_split << '\n';
  out << "min_samples_leaf=" << hp.min_samples_leaf << '\n';
  out << "n_bins=" << (hp.n_bins ? std::to_string(*hp.n_bins) : "none") << '\n';
  out << "random_update=" << fmt(hp.random_update) << '\n';
  out << "max_depth=" << (hp.max_depth == kUnlimitedDepth ? "inf" : std::to_string(hp.max_depth)) << '\n';
  out << "seed=" << hp.seed << '\n';
  return out.str();
}

Hyperparams parse_hyperparams(std::string_view text) {
  Hyperparams hp;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error("expected key=value, got '" + line + "'");
    set_hyperparam(hp, std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
  }
  return hp;
}

namespace {

struct Common {
  std::vector<std::string> inputs;
  std::vector<std::string> schemas;
  std::string output;
  std::string model;
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  std::string hp_file;
  std::vector<std::pair<std::string, std::string>> hp_overrides;
};

Hyperparams resolve_hyperparams(const Common& c, bool apply_seed) {
  Hyperparams hp = c.hp_file.empty() ? Hyperparams{} : parse_hyperparams(read_file(c.hp_file));
  if (apply_seed) hp.seed = c.seed;
  for (const auto& [k, v] : c.hp_overrides) set_hyperparam(hp, k, v);
  hp.validate();
  return hp;
}

const std::string& single(const std::vector<std::string>& values, const char* flag) {
  if (values.size() != 1) throw Error(ErrorCategory::Argument, std::string(flag) + " must be given exactly once");
  return values.front();
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw Error(ErrorCategory::Argument, std::string(flag) + " is required");
}

std::string predictions_csv(std::span<const double> values) {
  std::string out = "prediction\n";
  for (double v : values) out += fmt(v) + "\n";
  return out;
}

int cmd_train(const Common& c, std::ostream& out) {
  require(c.output, "--output");
  const RawTable table = read_csv(single(c.inputs, "--input"));
  const auto specs = read_column_specs(single(c.schemas, "--schema"));
  const Hyperparams hp = resolve_hyperparams(c, true);
  const EnsembleModel model = fit_table(table, specs, hp, c.threads);
  save_model(model, c.output);

  double rounds = 0.0;
  double drop = 0.0;
  for (const auto& m : model.models) {
    rounds += static_cast<double>(m.split_log.size());
    for (const auto& r : m.split_log) drop += r.impurity_drop / static_cast<double>(m.n_train);
  }
  const double b = static_cast<double>(model.models.size());
  out << "members " << model.models.size() << "\n";
  out << "groups " << model.schema.num_groups() << "\n";
  out << "mean_rounds " << format_number(rounds / b) << "\n";
  out << "mean_drop_per_sample " << format_number(drop / b) << "\n";
  out << "response_variance " << format_number(model.response_variance) << "\n";
  return 0;
}

int cmd_predict(const Common& c, std::ostream&) {
  require(c.model, "--model");
  require(c.output, "--output");
  const EnsembleModel model = load_model(c.model);
  const RawTable table = read_csv(single(c.inputs, "--input"));
  write_file_atomic(c.output, predictions_csv(predict_table(model, table)));
  return 0;
}

fs::path sibling_overall(const fs::path& matrix_path) {
  fs::path p = matrix_path;
  p.replace_filename(matrix_path.stem().string() + "_overall" + matrix_path.extension().string());
  return p;
}

int cmd_importance(const Common& c, const std::string& overall_path, std::ostream&) {
  require(c.model, "--model");
  require(c.output, "--output");
  const EnsembleModel model = load_model(c.model);
  const XmdiMatrix matrix = ensemble_xmdi(model);
  const auto labels = model.schema.labels();
  const fs::path second = overall_path.empty() ? sibling_overall(c.output) : fs::path(overall_path);
  const std::string a = xmdi_csv(matrix, labels);
  const std::string b = overall_csv(matrix, labels);
  write_file_atomic(c.output, a);
  write_file_atomic(second, b);
  return 0;
}

std::optional<fs::path> find_on_path(const std::string& program) {
  const char* path = std::getenv("PATH");
  if (!path) return std::nullopt;
  std::stringstream dirs(path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) continue;
    fs::path candidate = fs::path(dir) / program;
    std::error_code ec;
    if (fs::is_regular_file(candidate, ec)) return candidate;
  }
  return std::nullopt;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) {
    if (ch == '\'') {
      out += "'\\''";
    } else {
      out += ch;
    }
  }
  return out + "'";
}

struct DiagramOptions {
  double variance = 0.0;
  std::string svg;
  DiagramStyle style;
};

int cmd_diagram(const Common& c, const DiagramOptions& opt, std::ostream& out) {
  require(c.output, "--output");
  std::ifstream in(single(c.inputs, "--input"));
  if (!in) throw Error(ErrorCategory::Io, "cannot open " + c.inputs.front());
  const LabeledXmdi table = parse_xmdi_csv(in);
  double variance = opt.variance;
  if (!c.model.empty()) variance = load_model(c.model).response_variance;
  if (variance <= 0.0) throw Error(ErrorCategory::Argument, "--variance or --model is required and must be positive");
  const std::string dot = emit_dot(diagram_spec(table.matrix, variance, table.labels, opt.style));
  write_file_atomic(c.output, dot);
  if (!opt.svg.empty()) {
    if (auto renderer = find_on_path("dot")) {
      const fs::path tmp = opt.svg + ".tmp";
      const std::string command = shell_quote(renderer->string()) + " -Tsvg " + shell_quote(c.output) + " -o " +
                                  shell_quote(tmp.string());
      if (std::system(command.c_str()) != 0) {
        fs::remove(tmp);
        throw Error(ErrorCategory::Io, "the dot renderer failed");
      }
      fs::rename(tmp, opt.svg);
    } else {
      out << "notice: dot not found on PATH, skipped " << opt.svg << "\n";
    }
  }
  return 0;
}

struct SimulateOptions {
  std::string model = "y1";
  std::size_t n = 500;
  std::size_t p = 10;
  double lambda = 0.0;
  double noise_sd = 1.0;
  std::string linear;
  std::string xor_terms;
  double prob = 0.5;
};

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::size_t parse_feature(const std::string& text) {
  const std::size_t j = parse_count("feature index", text);
  if (j == 0) throw Error(ErrorCategory::Argument, "feature indices are 1-based");
  return j - 1;
}

int cmd_simulate(const Common& c, const SimulateOptions& opt, std::ostream&) {
  require(c.output, "--output");
  Rng rng(c.seed);
  SimulatedData data;
  if (opt.model == "y1" || opt.model == "y2") {
    data.x = gaussian_copula_ar1(opt.n, opt.p, opt.lambda, rng);
    data.y = opt.model == "y1" ? model_y1(data.x, rng, opt.noise_sd) : model_y2(data.x, rng, opt.noise_sd);
  } else if (opt.model == "xor") {
    XorLinearSpec spec;
    spec.noise_sd = opt.noise_sd;
    spec.marginals.assign(opt.p, opt.prob);
    for (const auto& term : split_list(opt.linear, ',')) {
      const auto parts = split_list(term, ':');
      if (parts.size() != 2) throw Error(ErrorCategory::Argument, "linear terms look like j:beta");
      spec.linear.push_back({parse_feature(parts[0]), parse_real("beta", parts[1])});
    }
    for (const auto& term : split_list(opt.xor_terms, ',')) {
      const auto parts = split_list(term, ':');
      if (parts.size() != 3) throw Error(ErrorCategory::Argument, "interaction terms look like l:k:beta");
      spec.interactions.push_back({parse_feature(parts[0]), parse_feature(parts[1]), parse_real("beta", parts[2])});
    }
    data = xor_linear_binary(opt.n, opt.p, spec, rng);
  } else {
    throw Error(ErrorCategory::Argument, "unknown simulation model '" + opt.model + "' (y1, y2, xor)");
  }
  write_file_atomic(c.output, simulated_csv(data.x, data.y));
  return 0;
}

TuneBudget make_budget(const Common& c, std::size_t rounds) {
  TuneBudget budget;
  budget.rounds = rounds;
  budget.seed = c.seed;
  budget.threads = c.threads;
  // A fixed hyperparameter collapses its value set to that single value.
  for (const auto& [key, value] : c.hp_overrides) {
    Hyperparams probe;
    set_hyperparam(probe, key, value);
    auto& s = budget.space;
    if (key == "n_estimators") s.n_estimators = {probe.n_estimators};
    if (key == "n_trees") s.n_trees = {probe.n_trees};
    if (key == "alpha") s.alpha = {probe.alpha};
    if (key == "min_samples_split") s.min_samples_split = {probe.min_samples_split};
    if (key == "min_samples_leaf") s.min_samples_leaf = {probe.min_samples_leaf};
    if (key == "n_bins") s.n_bins = {probe.n_bins};
    if (key == "random_update") s.random_update = {probe.random_update};
    if (key == "max_depth") s.max_depth = {probe.max_depth};
    if (key == "seed") throw config_error("use --seed to set the tuning seed");
  }
  return budget;
}

int cmd_tune(const Common& c, std::size_t rounds, const std::string& trace_path, std::ostream& out) {
  require(c.output, "--output");
  const RawTable table = read_csv(single(c.inputs, "--input"));
  const auto specs = read_column_specs(single(c.schemas, "--schema"));
  const TuneBudget budget = make_budget(c, rounds);
  const ProtocolResult result = run_protocol(TableSource(table), specs, budget, c.seed);

  std::ostringstream trace;
  trace << "trial,validation_r2,hyperparams\n";
  for (std::size_t t = 0; t < result.tune.trials.size(); ++t) {
    std::string hp = format_hyperparams(result.tune.trials[t].hyperparams);
    std::replace(hp.begin(), hp.end(), '\n', ';');
    trace << t << ',' << format_number(result.tune.trials[t].validation_r2) << ",\"" << hp << "\"\n";
  }
  const std::string best = format_hyperparams(result.tune.best);
  if (!trace_path.empty()) write_file_atomic(trace_path, trace.str());
  write_file_atomic(c.output, best);
  out << "validation_r2 " << format_number(result.tune.best_r2) << "\n";
  out << "test_r2 " << format_number(result.test_r2) << "\n";
  return 0;
}

int cmd_benchmark(const Common& c, std::size_t rounds, std::size_t repeats, const std::string& scores_path,
                  std::ostream& out) {
  require(c.output, "--output");
  if (c.inputs.empty() || c.inputs.size() != c.schemas.size()) {
    throw Error(ErrorCategory::Argument, "give one --schema per --input");
  }
  std::vector<ScoreRow> rows;
  for (std::size_t d = 0; d < c.inputs.size(); ++d) {
    const RawTable table = read_csv(c.inputs[d]);
    const auto specs = read_column_specs(c.schemas[d]);
    const std::string name = fs::path(c.inputs[d]).stem().string();
    for (std::size_t r = 0; r < repeats; ++r) {
      Common rc = c;
      rc.seed = c.seed + r;
      const ProtocolResult result = run_protocol(TableSource(table), specs, make_budget(rc, rounds), rc.seed);
      rows.push_back({name, "collabtrees", r, result.test_r2, 0.0});
      out << name << " repeat " << r << " test_r2 " << format_number(result.test_r2) << "\n";
    }
  }
  if (!scores_path.empty()) {
    const auto external = parse_score_rows(read_csv(scores_path));
    rows.insert(rows.end(), external.begin(), external.end());
  }
  assign_win_rates(rows);
  write_file_atomic(c.output, format_score_rows(rows));
  return 0;
}

std::string join_groups(const std::vector<std::size_t>& groups, const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t g : groups) out += (out.empty() ? "" : "+") + labels[g];
  return out;
}

int cmd_oracle(const Common& c, std::size_t k, std::ostream&) {
  require(c.output, "--output");
  const OracleModel model = read_oracle_model(single(c.inputs, "--input"));
  const auto& dist = model.dist;
  const std::size_t m = dist.num_groups();
  std::ostringstream text;
  text << "# effects\ngroup_i,group_j,effect\n";
  for (std::size_t l = 0; l < m; ++l) {
    text << dist.labels[l] << ',' << dist.labels[l] << ',' << format_number(additive_effect(dist, model.spec, l))
         << '\n';
    for (std::size_t j = l + 1; j < m; ++j) {
      text << dist.labels[l] << ',' << dist.labels[j] << ','
           << format_number(interaction_effect(dist, model.spec, l, j)) << '\n';
    }
  }
  if (k > 0) {
    const PursuitPath path = matching_pursuit_path(dist, model.spec, std::min(k, m));
    text << "# pursuit\nstep,selected,objective\n";
    for (std::size_t s = 0; s < path.steps.size(); ++s) {
      text << s + 1 << ',' << join_groups(path.steps[s].selected, dist.labels) << ','
           << format_number(path.steps[s].objective) << '\n';
    }
  }
  write_file_atomic(c.output, text.str());
  return 0;
}

// Pulls --hp.<name> flags out before CLI11 sees the rest.
std::vector<std::string> extract_hp_flags(const std::vector<std::string>& args,
                                          std::vector<std::pair<std::string, std::string>>& overrides) {
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--hp.", 0) != 0) {
      rest.push_back(a);
      continue;
    }
    std::string key = a.substr(5);
    std::string value;
    if (auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.erase(eq);
    } else {
      if (i + 1 >= args.size()) throw Error(ErrorCategory::Argument, a + " needs a value");
      value = args[++i];
    }
    Hyperparams probe;
    set_hyperparam(probe, key, value);
    overrides.emplace_back(key, value);
  }
  return rest;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    Common c;
    const std::vector<std::string> rest = extract_hp_flags(args, c.hp_overrides);

    CLI::App app{"Collaborative trees ensembles: training, prediction, importance and diagnostics", "collabtrees"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    auto add_common = [&](CLI::App* sub, bool data, bool model) {
      if (data) {
        sub->add_option("--input", c.inputs, "Input CSV");
        sub->add_option("--schema", c.schemas, "Column role file (name role per line)");
      }
      if (model) sub->add_option("--model", c.model, "Model file");
      sub->add_option("--output", c.output, "Output path");
      sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
      sub->add_option("--threads", c.threads, "Worker threads; results do not depend on it")->capture_default_str();
    };

    auto* train = app.add_subcommand("train", "Grow an ensemble and write the model file");
    add_common(train, true, false);
    train->add_option("--hp-file", c.hp_file, "key=value hyperparameter file (as written by tune)");

    auto* predict = app.add_subcommand("predict", "Predict the rows of a CSV");
    add_common(predict, true, true);

    std::string overall_path;
    auto* importance = app.add_subcommand("importance", "Write the XMDI matrix and overall importances");
    add_common(importance, false, true);
    importance->add_option("--overall", overall_path, "Overall importance CSV (default: <output>_overall.csv)");

    DiagramOptions diag;
    auto* diagram = app.add_subcommand("diagram", "Write a Graphviz network diagram from an XMDI CSV");
    add_common(diagram, true, true);
    diagram->add_option("--variance", diag.variance, "Response variance (or read it from --model)");
    diagram->add_option("--svg", diag.svg, "Also render SVG when dot is on PATH");
    diagram->add_option("--min-width", diag.style.min_width)->capture_default_str();
    diagram->add_option("--max-width", diag.style.max_width)->capture_default_str();
    diagram->add_option("--gray-light", diag.style.gray_light)->capture_default_str();
    diagram->add_option("--gray-dark", diag.style.gray_dark)->capture_default_str();
    diagram->add_option("--min-penwidth", diag.style.min_penwidth)->capture_default_str();
    diagram->add_option("--max-penwidth", diag.style.max_penwidth)->capture_default_str();
    diagram->add_option("--blue", diag.style.blue)->capture_default_str();
    diagram->add_option("--red", diag.style.red)->capture_default_str();
    diagram->add_option("--node-threshold", diag.style.node_threshold, "Relative to the response variance")
        ->capture_default_str();
    diagram->add_option("--edge-threshold", diag.style.edge_threshold, "Relative to the response variance")
        ->capture_default_str();

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic dataset");
    add_common(simulate, false, false);
    simulate->add_option("--model", sim.model, "y1, y2 or xor")->capture_default_str();
    simulate->add_option("--n", sim.n)->capture_default_str();
    simulate->add_option("--p", sim.p)->capture_default_str();
    simulate->add_option("--lambda", sim.lambda, "AR(1) copula correlation")->capture_default_str();
    simulate->add_option("--noise-sd", sim.noise_sd)->capture_default_str();
    simulate->add_option("--linear", sim.linear, "xor model: linear terms j:beta,...");
    simulate->add_option("--xor", sim.xor_terms, "xor model: interactions l:k:beta,...");
    simulate->add_option("--prob", sim.prob, "xor model: P(X_j = 1)")->capture_default_str();

    std::size_t rounds = 20;
    std::string trace;
    auto* tune = app.add_subcommand("tune", "Random-search tuning on a 48/32/20 split");
    add_common(tune, true, false);
    tune->add_option("--rounds", rounds)->capture_default_str();
    tune->add_option("--trace", trace, "Per-trial CSV");

    std::size_t repeats = 1;
    std::string scores;
    auto* bench = app.add_subcommand("benchmark", "Tune, refit and score datasets; compute win rates");
    add_common(bench, true, false);
    bench->add_option("--rounds", rounds)->capture_default_str();
    bench->add_option("--repeats", repeats)->capture_default_str();
    bench->add_option("--scores", scores, "External scores CSV: dataset,method,repeat,r2");

    std::size_t pursuit_k = 0;
    auto* oracle = app.add_subcommand("oracle", "Exact effects and pursuit path of a discrete model");
    add_common(oracle, true, false);
    oracle->add_option("--k", pursuit_k, "Pursuit length K (0 skips the path)")->capture_default_str();

    std::vector<std::string> reversed(rest.rbegin(), rest.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "error: argument: " << e.what() << "\n";
      return 2;
    }
    if (!c.hp_overrides.empty() && !(train->parsed() || tune->parsed() || bench->parsed())) {
      throw Error(ErrorCategory::Argument, "--hp.* flags apply to train, tune and benchmark only");
    }
    if (c.threads == 0) throw Error(ErrorCategory::Argument, "--threads must be positive");

    if (train->parsed()) return cmd_train(c, out);
    if (predict->parsed()) return cmd_predict(c, out);
    if (importance->parsed()) return cmd_importance(c, overall_path, out);
    if (diagram->parsed()) return cmd_diagram(c, diag, out);
    if (simulate->parsed()) return cmd_simulate(c, sim, out);
    if (tune->parsed()) return cmd_tune(c, rounds, trace, out);
    if (bench->parsed()) return cmd_benchmark(c, rounds, repeats, scores, out);
    if (oracle->parsed()) return cmd_oracle(c, pursuit_k, out);
    return 2;
  } catch (const Error& e) {
    err << "error: " << category_name(e.category()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace collab::cli
