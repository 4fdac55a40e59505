#include "collab/model_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "collab/error.hpp"
#include "collab/table.hpp"

namespace collab {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "collabtrees-model";
constexpr std::string_view kChecksumTag = "crc32 ";

json encode_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double decode_double(const json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorCategory::Schema, "unexpected number text '" + s + "'");
  }
  return j.get<double>();
}

json encode_depth(std::size_t depth) { return depth == kUnlimitedDepth ? json("inf") : json(depth); }

std::size_t decode_depth(const json& j) {
  if (j.is_string() && j.get_ref<const std::string&>() == "inf") return kUnlimitedDepth;
  return j.get<std::size_t>();
}

json encode_schema(const FeatureSchema& schema) {
  json groups = json::array();
  for (const auto& g : schema.groups) {
    groups.push_back({{"name", g.name},
                      {"kind", std::string(group_kind_name(g.kind))},
                      {"columns", g.columns},
                      {"bin_edges", g.bin_edges},
                      {"categories", g.categories}});
  }
  return {{"response", schema.response},
          {"num_features", schema.num_features},
          {"num_multi", schema.num_multi},
          {"groups", groups}};
}

FeatureSchema decode_schema(const json& j) {
  FeatureSchema schema;
  schema.response = j.at("response").get<std::string>();
  schema.num_features = j.at("num_features").get<std::size_t>();
  schema.num_multi = j.at("num_multi").get<std::size_t>();
  for (const auto& g : j.at("groups")) {
    GroupSpec spec;
    spec.name = g.at("name").get<std::string>();
    spec.kind = parse_group_kind(g.at("kind").get<std::string>());
    spec.columns = g.at("columns").get<std::vector<std::size_t>>();
    spec.bin_edges = g.at("bin_edges").get<std::vector<double>>();
    spec.categories = g.at("categories").get<std::vector<std::string>>();
    schema.groups.push_back(std::move(spec));
  }
  schema.validate();
  return schema;
}

json encode_hyperparams(const Hyperparams& hp) {
  return {{"n_estimators", hp.n_estimators},
          {"n_trees", hp.n_trees},
          {"alpha", encode_double(hp.alpha)},
          {"min_samples_split", hp.min_samples_split},
          {"min_samples_leaf", hp.min_samples_leaf},
          {"n_bins", hp.n_bins ? json(*hp.n_bins) : json(nullptr)},
          {"random_update", hp.random_update},
          {"max_depth", encode_depth(hp.max_depth)},
          {"seed", hp.seed}};
}

Hyperparams decode_hyperparams(const json& j) {
  Hyperparams hp;
  hp.n_estimators = j.at("n_estimators").get<std::size_t>();
  hp.n_trees = j.at("n_trees").get<std::size_t>();
  hp.alpha = decode_double(j.at("alpha"));
  hp.min_samples_split = j.at("min_samples_split").get<std::size_t>();
  hp.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
  if (!j.at("n_bins").is_null()) hp.n_bins = j.at("n_bins").get<int>();
  hp.random_update = j.at("random_update").get<double>();
  hp.max_depth = decode_depth(j.at("max_depth"));
  hp.seed = j.at("seed").get<std::uint64_t>();
  return hp;
}

json encode_tree(const Tree& tree) {
  json nodes = json::array();
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    json region = json::array();
    for (const auto& c : tree.region(id)) {
      region.push_back({c.feature, c.op == Constraint::Op::Greater ? "gt" : "le", c.threshold});
    }
    nodes.push_back({{"region", region}, {"value", tree.nodes[id].increment}});
  }
  return nodes;
}

Tree decode_tree(const json& j) {
  Tree tree;
  for (const auto& entry : j) {
    std::vector<Constraint> region;
    for (const auto& c : entry.at("region")) {
      const auto op = c.at(1).get<std::string>();
      if (op != "gt" && op != "le") throw Error(ErrorCategory::Schema, "unknown constraint operator '" + op + "'");
      region.push_back({c.at(0).get<std::size_t>(), op == "gt" ? Constraint::Op::Greater : Constraint::Op::LessEqual,
                        c.at(2).get<double>()});
    }
    TreeNode node;
    node.increment = entry.at("value").get<double>();
    node.depth = static_cast<std::uint32_t>(region.size());
    if (region.empty()) {
      if (!tree.nodes.empty()) throw Error(ErrorCategory::Schema, "tree has more than one root");
      tree.nodes.push_back(std::move(node));
      continue;
    }
    if (tree.nodes.empty()) throw Error(ErrorCategory::Schema, "tree does not start with its root");
    // Follow the region prefix down from the root to find the parent.
    std::int32_t at = 0;
    for (std::size_t d = 0; d + 1 < region.size(); ++d) {
      std::int32_t next = -1;
      for (std::int32_t child : tree.nodes[static_cast<std::size_t>(at)].children) {
        if (tree.nodes[static_cast<std::size_t>(child)].constraint == region[d]) {
          next = child;
          break;
        }
      }
      if (next < 0) throw Error(ErrorCategory::Schema, "tree node appears before its parent");
      at = next;
    }
    node.parent = at;
    node.constraint = region.back();
    const auto id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes[static_cast<std::size_t>(at)].children.push_back(id);
    tree.nodes.push_back(std::move(node));
  }
  if (tree.nodes.empty()) tree.nodes.emplace_back();
  return tree;
}

json encode_member(const CollabTreesModel& model, const std::vector<std::size_t>& bootstrap) {
  json trees = json::array();
  for (const auto& t : model.trees) trees.push_back(encode_tree(t));
  json log = json::array();
  for (const auto& r : model.split_log) {
    log.push_back({r.round, r.tree, r.group, r.parent_round ? json(*r.parent_round) : json(nullptr), r.impurity_drop,
                   r.nodes_updated, r.depth});
  }
  return {{"y_mean", model.y_mean},         {"n_train", model.n_train},     {"num_groups", model.num_groups},
          {"initial_sse", model.initial_sse}, {"final_sse", model.final_sse}, {"bootstrap", bootstrap},
          {"trees", trees},                   {"split_log", log}};
}

CollabTreesModel decode_member(const json& j, std::vector<std::size_t>& bootstrap) {
  CollabTreesModel model;
  model.y_mean = j.at("y_mean").get<double>();
  model.n_train = j.at("n_train").get<std::size_t>();
  model.num_groups = j.at("num_groups").get<std::size_t>();
  model.initial_sse = j.at("initial_sse").get<double>();
  model.final_sse = j.at("final_sse").get<double>();
  bootstrap = j.at("bootstrap").get<std::vector<std::size_t>>();
  for (const auto& t : j.at("trees")) model.trees.push_back(decode_tree(t));
  for (const auto& r : j.at("split_log")) {
    RoundRecord rec;
    rec.round = r.at(0).get<std::size_t>();
    rec.tree = r.at(1).get<std::size_t>();
    rec.group = r.at(2).get<std::size_t>();
    if (!r.at(3).is_null()) rec.parent_round = r.at(3).get<std::size_t>();
    rec.impurity_drop = r.at(4).get<double>();
    rec.nodes_updated = r.at(5).get<std::size_t>();
    rec.depth = r.at(6).get<std::size_t>();
    model.split_log.push_back(rec);
  }
  return model;
}

std::string checksum_hex(std::string_view body) {
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

}  // namespace

std::string serialize_model(const EnsembleModel& model) {
  json members = json::array();
  for (std::size_t b = 0; b < model.models.size(); ++b) {
    static const std::vector<std::size_t> none;
    members.push_back(encode_member(model.models[b], b < model.bootstrap.size() ? model.bootstrap[b] : none));
  }
  const json doc = {{"format", kFormatName},
                    {"version", kModelFormatVersion},
                    {"schema", encode_schema(model.schema)},
                    {"hyperparams", encode_hyperparams(model.hyperparams)},
                    {"response_variance", model.response_variance},
                    {"members", members}};
  std::string body = doc.dump();
  return body + "\n" + std::string(kChecksumTag) + checksum_hex(body) + "\n";
}

EnsembleModel deserialize_model(std::string_view text) {
  const auto newline = text.find('\n');
  if (newline == std::string_view::npos) throw Error(ErrorCategory::Truncated, "model file has no checksum line");
  const std::string_view body = text.substr(0, newline);
  std::string_view trailer = text.substr(newline + 1);
  while (!trailer.empty() && (trailer.back() == '\n' || trailer.back() == '\r')) trailer.remove_suffix(1);
  if (trailer.substr(0, kChecksumTag.size()) != kChecksumTag || trailer.size() != kChecksumTag.size() + 8) {
    throw Error(ErrorCategory::Truncated, "model file has no checksum line");
  }
  if (trailer.substr(kChecksumTag.size()) != checksum_hex(body)) {
    throw Error(ErrorCategory::Checksum, "model checksum does not match its contents");
  }
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::Schema, std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kFormatName) throw Error(ErrorCategory::Schema, "not a model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCategory::Version, "model format version " + std::to_string(version) + " is not supported");
    }
    EnsembleModel model;
    model.schema = decode_schema(doc.at("schema"));
    model.hyperparams = decode_hyperparams(doc.at("hyperparams"));
    model.response_variance = doc.at("response_variance").get<double>();
    for (const auto& m : doc.at("members")) {
      model.bootstrap.emplace_back();
      model.models.push_back(decode_member(m, model.bootstrap.back()));
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::Schema, std::string("malformed model document: ") + e.what());
  }
}

void save_model(const EnsembleModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

EnsembleModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCategory::Schema, "no model at " + path.string());
  }
  return deserialize_model(read_file(path));
}

}  // namespace collab
