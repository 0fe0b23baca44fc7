#pragma once

// File formats: JSON models, policies and reports, and the CSV tables
// emitted by the command-line tool.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mvmdp/evaluation.hpp"
#include "mvmdp/mdp.hpp"
#include "mvmdp/sensitivity.hpp"
#include "mvmdp/simulation.hpp"
#include "mvmdp/solvers.hpp"

namespace mvmdp::io {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_number(double value);

std::string read_text(const std::filesystem::path& path);
/// Replaces the file contents; throws IoError.
void write_text(const std::filesystem::path& path, std::string_view text);

/**
 * Model file:
 *   {"num_states": S, "num_actions": A, "beta": b,
 *    "feasible": [[a, ...], ...],
 *    "kernel": {"i,a": [p_0, ..., p_{S-1}], ...},
 *    "reward": {"i,a": r, ...}}
 * Parse failures throw ParseError naming the line/column or the field.
 */
std::string model_to_json(const MdpModel& model);
MdpModel model_from_json(std::string_view text);
MdpModel read_model(const std::filesystem::path& path);
void write_model(const std::filesystem::path& path, const MdpModel& model);

/// {"actions": [...]} for deterministic, {"theta": [[...], ...]} for randomized policies.
std::string policy_to_json(const DeterministicPolicy& policy);
std::string policy_to_json(const RandomizedPolicy& policy);
AnyPolicy policy_from_json(std::string_view text);
/// Parses and validates against the model; FeasibilityError on an infeasible action.
AnyPolicy read_policy(const std::filesystem::path& path, const MdpModel& model);

std::string report_to_json(const EvaluationReport& report);
std::string ergodicity_to_json(const ErgodicityReport& report);
std::string estimate_to_json(const SimulationEstimate& estimate);

/// Stable 16-hex-digit identifier of a deterministic policy.
std::string policy_id(const DeterministicPolicy& policy);

/// Comma-separated table built one row at a time.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& cell(double value);
  CsvTable& cell(std::int64_t value);
  CsvTable& cell(int value) { return cell(static_cast<std::int64_t>(value)); }
  CsvTable& cell(std::uint64_t value) { return cell(static_cast<std::int64_t>(value)); }
  CsvTable& cell(std::string_view text);
  /// Ends the current row; throws ValidationError if its width is wrong.
  CsvTable& end_row();

  std::string str() const;

 private:
  std::size_t width_;
  std::size_t current_ = 0;
  std::string text_;
};

/// `policy_id,j_mean,j_var,j_combined`
std::string metrics_csv(const std::vector<DeterministicPolicy>& policies,
                        const std::vector<EvaluationReport>& reports);
/// `state,action,score` over the defined entries.
std::string table_csv(const StateActionTable& table);
/// `iter,j_mean,j_var,j_combined,states_changed`
std::string trace_csv(const PolicyTrace& trace);
std::string trace_csv(const GradientTrace& trace);
/// `t,state,action,reward`
std::string path_csv(const SamplePath& path);

}  // namespace mvmdp::io
