#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "collab/forest.hpp"

namespace collab::cli {

/// Runs one command line (without the program name). Returns the exit
/// status; failures print a single `error: <category>: <message>` line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Sets one hyperparameter from text. Accepts "inf" for alpha and max_depth
/// and "none" for n_bins. Throws Config for unknown keys or bad values.
void set_hyperparam(Hyperparams& hp, std::string_view key, std::string_view value);

/// `key=value` lines, one per field, readable by parse_hyperparams.
std::string format_hyperparams(const Hyperparams& hp);
Hyperparams parse_hyperparams(std::string_view text);

}  // namespace collab::cli
