#pragma once

#include <string>
#include <vector>

#include "scriptqa/harness.hpp"

namespace scriptqa {

// Accuracy tables and the grouped bar chart. All emitters are pure; file
// helpers do the I/O. JSON round-trips through results_from_json with the
// accuracy doubles bit-exact.
std::string results_to_json(const std::vector<EvalResult>& results);
std::vector<EvalResult> results_from_json(const std::string& text);
// One row per (result, script) plus an overall row per result.
std::string results_to_csv(const std::vector<EvalResult>& results);
// Bars grouped by test, one bar per model, dashed chance markers.
std::string results_to_svg(const std::vector<EvalResult>& results);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace scriptqa
