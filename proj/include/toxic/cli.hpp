#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "toxic/labels.hpp"

namespace toxic::cli {

// Runs one CLI invocation; args excludes the program name. Returns 0 on
// success, 1 on usage errors and 2 on data/format errors. Errors go to `err`
// as a single line starting with "error:".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Appendix-style table: one row per label, one column per input, cells are
// round-half-up integer percentages.
std::string format_prediction_table(const std::vector<std::string>& inputs, const std::vector<Probabilities>& probs);

int percent(double p);

}  // namespace toxic::cli
