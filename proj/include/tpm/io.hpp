#pragma once

#include <cmath>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tpm/config.hpp"
#include "tpm/error.hpp"
#include "tpm/fpm.hpp"
#include "tpm/mvp.hpp"
#include "tpm/table.hpp"

namespace tpm {

inline constexpr const char* kVersion = "0.1.0";

/// A batch settlement request: {"prior", "scoring", "reports": [[b...]...], "outcome"}.
struct FpmRequest {
  Belief prior;
  BatchOutcomeReport batch;
  ScoringRule rule;
};

inline FpmRequest parse_fpm_request(const nlohmann::json& j, const std::optional<Belief>& prior_override = {}) {
  using config::require;
  std::optional<Belief> prior = prior_override;
  if (!prior && j.contains("prior")) prior = Belief(j.at("prior").get<std::vector<double>>());
  if (!prior) throw InputError("settle-fpm: no prior given");
  BatchOutcomeReport batch;
  for (const auto& r : require(j, "reports")) batch.reports.emplace_back(r.get<std::vector<double>>());
  batch.outcome = require(j, "outcome").get<std::size_t>();
  return {*prior, std::move(batch), config::parse_rule(config::get_or(j, "scoring", nlohmann::json::object()))};
}

inline nlohmann::json to_json(const FpmResult& r) {
  return {{"aggregated", r.aggregated.vector()}, {"rewards", r.rewards}};
}

/// Parses "agent_id, time, b_1, ..., b_{d-1}" lines. Blank lines, lines
/// starting with '#' and a non-numeric header line are skipped.
inline std::vector<TimedReport> parse_report_stream(std::istream& in) {
  std::vector<TimedReport> reports;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    auto number = [&](const std::string& f) -> std::optional<double> {
      std::size_t used = 0;
      try {
        const double x = std::stod(f, &used);
        if (f.find_first_not_of(" \t", used) != std::string::npos) return std::nullopt;
        return x;
      } catch (const std::exception&) {
        return std::nullopt;
      }
    };
    if (reports.empty() && !number(fields[0])) continue;
    if (fields.size() < 3) {
      throw InputError("report stream line " + std::to_string(line_no) + ": need agent_id, time and at least one b");
    }
    std::vector<double> values;
    for (const auto& f : fields) {
      const auto x = number(f);
      if (!x) throw InputError("report stream line " + std::to_string(line_no) + ": bad number '" + f + "'");
      values.push_back(*x);
    }
    if (values[0] < 0.0 || values[0] != std::floor(values[0])) {
      throw InputError("report stream line " + std::to_string(line_no) + ": agent_id must be a nonnegative integer");
    }
    reports.push_back({static_cast<std::size_t>(values[0]), values[1],
                       ReportVector(std::vector<double>(values.begin() + 2, values.end()))});
  }
  return reports;
}

inline Table mvp_rewards_table(const MvpSettlement& s) {
  Table t{"rewards", {"agent_id", "reward"}, {}};
  for (std::size_t i = 0; i < s.rewards.size(); ++i) t.rows.push_back({static_cast<double>(i), s.rewards[i]});
  return t;
}

/// Market belief after each report, starting from the prior at time 0.
inline Table mvp_trace_table(const MarketTrace& trace) {
  Table t{"trace", {"time"}, {}};
  const std::size_t d = trace.beliefs.front().size();
  for (std::size_t y = 0; y < d; ++y) t.columns.push_back("p_" + std::to_string(y + 1));
  for (std::size_t j = 0; j < trace.beliefs.size(); ++j) {
    std::vector<double> row{trace.segment_start(j)};
    for (std::size_t y = 0; y < d; ++y) row.push_back(trace.beliefs[j][y]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table trial_table(const std::vector<TrialRecord>& records) {
  Table t{"trials", {"trial", "outcome", "value"}, {}};
  const std::size_t n = records.empty() ? 0 : records.front().rewards.size();
  for (std::size_t i = 0; i < n; ++i) {
    t.columns.push_back("reward_" + std::to_string(i));
    t.columns.push_back("cost_" + std::to_string(i));
  }
  t.columns.push_back("principal_utility");
  t.columns.push_back("welfare");
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    std::vector<double> row{static_cast<double>(k), static_cast<double>(r.outcome), r.value};
    for (std::size_t i = 0; i < n; ++i) {
      row.push_back(r.rewards[i]);
      row.push_back(r.costs[i]);
    }
    row.push_back(r.principal_utility());
    row.push_back(r.welfare());
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace tpm
