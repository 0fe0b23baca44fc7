#include "mvmdp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mvmdp/error.hpp"

namespace mvmdp::io {

using nlohmann::json;

std::string format_number(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw ValidationError("cannot format number");
  return std::string(buf, end);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed on " + path.string());
  return buf.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("write failed on " + path.string());
}

namespace {

std::string pair_key(int state, int action) {
  return std::to_string(state) + "," + std::to_string(action);
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    int line = 1, column = 1;
    for (std::size_t k = 0; k < stop; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                     ": malformed JSON");
  }
}

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ParseError("field \"" + field + "\": " + what);
}

const json& require(const json& obj, const char* field) {
  const auto it = obj.find(field);
  if (it == obj.end()) field_error(field, "missing");
  return *it;
}

int as_int(const json& value, const std::string& field) {
  if (!value.is_number_integer()) field_error(field, "expected an integer");
  return value.get<int>();
}

double as_double(const json& value, const std::string& field) {
  if (!value.is_number()) field_error(field, "expected a number");
  return value.get<double>();
}

std::vector<double> as_row(const json& value, const std::string& field) {
  if (!value.is_array()) field_error(field, "expected an array of numbers");
  std::vector<double> row;
  row.reserve(value.size());
  for (std::size_t k = 0; k < value.size(); ++k)
    row.push_back(as_double(value[k], field + "[" + std::to_string(k) + "]"));
  return row;
}

}  // namespace

std::string model_to_json(const MdpModel& model) {
  json doc;
  doc["num_states"] = model.num_states();
  doc["num_actions"] = model.num_actions();
  doc["beta"] = model.beta();
  json feasible = json::array();
  json kernel = json::object();
  json reward = json::object();
  for (int i = 0; i < model.num_states(); ++i) {
    feasible.push_back(model.feasible(i));
    for (int a : model.feasible(i)) {
      const auto row = model.transition(i, a);
      kernel[pair_key(i, a)] = std::vector<double>(row.begin(), row.end());
      reward[pair_key(i, a)] = model.reward(i, a);
    }
  }
  doc["feasible"] = std::move(feasible);
  doc["kernel"] = std::move(kernel);
  doc["reward"] = std::move(reward);
  return doc.dump(1) + "\n";
}

MdpModel model_from_json(std::string_view text) {
  const json doc = parse_document(text);
  if (!doc.is_object()) throw ParseError("model file must hold a JSON object");
  const int states = as_int(require(doc, "num_states"), "num_states");
  const int actions = as_int(require(doc, "num_actions"), "num_actions");
  const double beta = as_double(require(doc, "beta"), "beta");
  const json& feasible = require(doc, "feasible");
  const json& kernel = require(doc, "kernel");
  const json& reward = require(doc, "reward");
  if (!feasible.is_array()) field_error("feasible", "expected an array of action lists");
  if (static_cast<int>(feasible.size()) != states)
    field_error("feasible", "has " + std::to_string(feasible.size()) + " entries, expected " +
                                std::to_string(states));
  if (!kernel.is_object()) field_error("kernel", "expected an object keyed by \"state,action\"");
  if (!reward.is_object()) field_error("reward", "expected an object keyed by \"state,action\"");

  MdpModel::Builder builder(states, actions, beta);
  std::size_t pairs = 0;
  for (int i = 0; i < states; ++i) {
    const std::string where = "feasible[" + std::to_string(i) + "]";
    if (!feasible[i].is_array()) field_error(where, "expected an array of action indices");
    for (std::size_t k = 0; k < feasible[i].size(); ++k) {
      const int a = as_int(feasible[i][k], where + "[" + std::to_string(k) + "]");
      const std::string key = pair_key(i, a);
      const auto row = kernel.find(key);
      if (row == kernel.end()) field_error("kernel[\"" + key + "\"]", "missing for a feasible pair");
      const auto r = reward.find(key);
      if (r == reward.end()) field_error("reward[\"" + key + "\"]", "missing for a feasible pair");
      builder.add_action(i, a, as_row(*row, "kernel[\"" + key + "\"]"),
                         as_double(*r, "reward[\"" + key + "\"]"));
      ++pairs;
    }
  }
  if (kernel.size() != pairs)
    field_error("kernel", "has entries for pairs not listed in \"feasible\"");
  if (reward.size() != pairs)
    field_error("reward", "has entries for pairs not listed in \"feasible\"");
  return builder.build();
}

MdpModel read_model(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return model_from_json(text);
  } catch (const FeasibilityError&) {
    throw;
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_model(const std::filesystem::path& path, const MdpModel& model) {
  write_text(path, model_to_json(model));
}

std::string policy_to_json(const DeterministicPolicy& policy) {
  return json{{"actions", policy.actions()}}.dump() + "\n";
}

std::string policy_to_json(const RandomizedPolicy& policy) {
  json rows = json::array();
  for (int i = 0; i < policy.num_states(); ++i) {
    std::vector<double> row(policy.theta().cols());
    for (Eigen::Index a = 0; a < policy.theta().cols(); ++a) row[a] = policy.theta()(i, a);
    rows.push_back(std::move(row));
  }
  return json{{"theta", std::move(rows)}}.dump(1) + "\n";
}

AnyPolicy policy_from_json(std::string_view text) {
  const json doc = parse_document(text);
  if (!doc.is_object()) throw ParseError("policy file must hold a JSON object");
  if (doc.contains("actions")) {
    const json& list = doc["actions"];
    if (!list.is_array()) field_error("actions", "expected an array of action indices");
    std::vector<int> actions;
    for (std::size_t k = 0; k < list.size(); ++k)
      actions.push_back(as_int(list[k], "actions[" + std::to_string(k) + "]"));
    return DeterministicPolicy(std::move(actions));
  }
  if (doc.contains("theta")) {
    const json& rows = doc["theta"];
    if (!rows.is_array() || rows.empty()) field_error("theta", "expected a nonempty array of rows");
    std::vector<std::vector<double>> parsed;
    for (std::size_t i = 0; i < rows.size(); ++i)
      parsed.push_back(as_row(rows[i], "theta[" + std::to_string(i) + "]"));
    const std::size_t cols = parsed.front().size();
    Matrix theta(parsed.size(), cols);
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      if (parsed[i].size() != cols)
        field_error("theta[" + std::to_string(i) + "]", "row length differs from row 0");
      for (std::size_t a = 0; a < cols; ++a) theta(i, a) = parsed[i][a];
    }
    return RandomizedPolicy(std::move(theta));
  }
  throw ParseError("policy file needs an \"actions\" or a \"theta\" field");
}

AnyPolicy read_policy(const std::filesystem::path& path, const MdpModel& model) {
  AnyPolicy policy;
  try {
    policy = policy_from_json(read_text(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  std::visit([&](const auto& p) { validate(model, p); }, policy);
  return policy;
}

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string report_to_json(const EvaluationReport& report) {
  json doc;
  doc["pi"] = to_std(report.pi);
  doc["j_mean"] = report.j_mean;
  doc["j_var"] = report.j_var;
  doc["j_combined"] = report.j_combined;
  doc["cost"] = to_std(report.cost);
  doc["potential"] = to_std(report.potential);
  doc["potential_mean"] = to_std(report.potential_mean);
  doc["potential_var"] = to_std(report.potential_var);
  doc["beta"] = report.beta;
  return doc.dump(1) + "\n";
}

std::string ergodicity_to_json(const ErgodicityReport& report) {
  json doc;
  doc["mode"] = to_string(report.mode);
  doc["policies_checked"] = report.policies_checked;
  doc["union_irreducible"] = report.union_irreducible;
  doc["violation_count"] = report.violation_count;
  doc["multichain_count"] = report.multichain_count;
  json violations = json::array();
  for (const auto& p : report.violations) violations.push_back(p.actions());
  doc["violations"] = std::move(violations);
  doc["ok"] = report.ok();
  return doc.dump(1) + "\n";
}

std::string estimate_to_json(const SimulationEstimate& estimate) {
  json doc;
  doc["j_mean_hat"] = estimate.j_mean_hat;
  doc["j_var_hat"] = estimate.j_var_hat;
  doc["j_combined_hat"] = estimate.j_combined_hat;
  doc["mean_half_width"] = estimate.mean_half_width;
  doc["var_half_width"] = estimate.var_half_width;
  doc["combined_half_width"] = estimate.combined_half_width;
  doc["horizon"] = estimate.horizon;
  doc["seed"] = estimate.seed;
  doc["batches"] = estimate.batches;
  return doc.dump(1) + "\n";
}

std::string policy_id(const DeterministicPolicy& policy) {
  // FNV-1a over the actions as little-endian 32-bit words.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int a : policy.actions()) {
    const auto word = static_cast<std::uint32_t>(a);
    for (int b = 0; b < 4; ++b) {
      h ^= (word >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : width_(header.size()) {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k) text_ += ',';
    text_ += header[k];
  }
  text_ += '\n';
}

CsvTable& CsvTable::cell(double value) { return cell(std::string_view(format_number(value))); }

CsvTable& CsvTable::cell(std::int64_t value) {
  return cell(std::string_view(std::to_string(value)));
}

CsvTable& CsvTable::cell(std::string_view text) {
  if (current_ == width_) throw ValidationError("CSV row has too many cells");
  if (current_) text_ += ',';
  text_.append(text);
  ++current_;
  return *this;
}

CsvTable& CsvTable::end_row() {
  if (current_ != width_)
    throw ValidationError("CSV row has " + std::to_string(current_) + " cells, expected " +
                          std::to_string(width_));
  text_ += '\n';
  current_ = 0;
  return *this;
}

std::string CsvTable::str() const { return text_; }

std::string metrics_csv(const std::vector<DeterministicPolicy>& policies,
                        const std::vector<EvaluationReport>& reports) {
  if (policies.size() != reports.size())
    throw ValidationError("metrics table needs one report per policy");
  CsvTable csv({"policy_id", "j_mean", "j_var", "j_combined"});
  for (std::size_t k = 0; k < policies.size(); ++k)
    csv.cell(policy_id(policies[k]))
        .cell(reports[k].j_mean)
        .cell(reports[k].j_var)
        .cell(reports[k].j_combined)
        .end_row();
  return csv.str();
}

std::string table_csv(const StateActionTable& table) {
  CsvTable csv({"state", "action", "score"});
  for (int i = 0; i < table.num_states(); ++i)
    for (int a = 0; a < table.num_actions(); ++a)
      if (table.defined(i, a)) csv.cell(i).cell(a).cell(table.at(i, a)).end_row();
  return csv.str();
}

namespace {

template <class Policy>
std::string trace_table(const SolverTrace<Policy>& trace) {
  CsvTable csv({"iter", "j_mean", "j_var", "j_combined", "states_changed"});
  for (const auto& rec : trace.iterations)
    csv.cell(rec.iteration)
        .cell(rec.j_mean)
        .cell(rec.j_var)
        .cell(rec.j_combined)
        .cell(rec.states_changed)
        .end_row();
  return csv.str();
}

}  // namespace

std::string trace_csv(const PolicyTrace& trace) { return trace_table(trace); }
std::string trace_csv(const GradientTrace& trace) { return trace_table(trace); }

std::string path_csv(const SamplePath& path) {
  CsvTable csv({"t", "state", "action", "reward"});
  for (std::size_t t = 0; t < path.size(); ++t)
    csv.cell(static_cast<std::uint64_t>(t))
        .cell(path.states[t])
        .cell(path.actions[t])
        .cell(path.rewards[t])
        .end_row();
  return csv.str();
}

}  // namespace mvmdp::io
