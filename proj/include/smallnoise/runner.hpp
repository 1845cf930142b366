#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "smallnoise/config.hpp"

namespace smallnoise {

// Outcome of one subcommand: a canonical JSON report, named CSV payloads,
// one summary line per assertion, and the aggregate pass flag.
struct RunResult {
    nlohmann::json report;
    std::vector<std::pair<std::string, std::string>> csv_files;
    std::vector<std::string> summary_lines;
    bool passed = true;
};

// subcommand in {simulate, estimate, rates, rates-alt, normality,
// lemma-check, consistency, kernel-info}. The config must carry a master
// seed except for kernel-info.
RunResult run_subcommand(const std::string& subcommand, const RunConfig& config);

// Writes report.json and data/*.csv under out_dir.
void write_run_result(const std::string& out_dir, const RunResult& result);

// Shortest round-trip formatting used for all CSV numerics.
std::string format_double(double value);

// Deterministic serialization used for report.json (sorted keys, 2-space indent).
std::string canonical_dump(const nlohmann::json& j);

}  // namespace smallnoise
