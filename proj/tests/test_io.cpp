#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <algorithm>

#include "mvmdp/error.hpp"
#include "mvmdp/io.hpp"
#include "mvmdp/wind_storage.hpp"
#include "test_support.hpp"

using namespace mvmdp;
namespace ts = testing_support;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mvmdp_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kTwoStateModel = R"({
  "num_states": 2,
  "num_actions": 2,
  "beta": 0.5,
  "feasible": [[0, 1], [0]],
  "kernel": {"0,0": [0.5, 0.5], "0,1": [1.0, 0.0], "1,0": [0.25, 0.75]},
  "reward": {"0,0": 1.0, "0,1": -2.0, "1,0": 3.0}
})";

std::string error_of(const std::string& text) {
  try {
    io::model_from_json(text);
  } catch (const ParseError& e) {
    return std::string("parse: ") + e.what();
  } catch (const ValidationError& e) {
    return std::string("validation: ") + e.what();
  }
  return "no error";
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  EXPECT_NE(at, std::string::npos) << from;
  return text.replace(at, from.size(), to);
}

}  // namespace

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(io::format_number(0.1), "0.1");
  EXPECT_EQ(io::format_number(2.0), "2");
  EXPECT_EQ(io::format_number(-1.5e-7), "-1.5e-07");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double x = unit(rng) / 7.0;
    EXPECT_EQ(std::stod(io::format_number(x)), x);
  }
}

TEST(ModelJson, ParsesTheDocumentedLayout) {
  const MdpModel m = io::model_from_json(kTwoStateModel);
  EXPECT_EQ(m.num_states(), 2);
  EXPECT_EQ(m.beta(), 0.5);
  EXPECT_EQ(m.feasible(1), (std::vector<int>{0}));
  EXPECT_EQ(m.reward(0, 1), -2.0);
  EXPECT_EQ(m.transition(1, 0)[1], 0.75);
  EXPECT_FALSE(m.is_feasible(1, 1));
}

TEST(ModelJson, RoundTripIsBitIdentical) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const MdpModel m = ts::random_model(rng, 2 + trial % 9, 1 + trial % 4, 0.1 + trial * 0.037);
    const std::string text = io::model_to_json(m);
    const MdpModel back = io::model_from_json(text);
    EXPECT_TRUE(back == m) << "trial " << trial;
    EXPECT_EQ(io::model_to_json(back), text);
  }
  for (bool abandon : {false, true}) {
    const MdpModel w = wind::build(wind::WindStorageSpec::defaults(0.7, abandon));
    EXPECT_TRUE(io::model_from_json(io::model_to_json(w)) == w);
  }
}

TEST(ModelJson, FileRoundTrip) {
  const fs::path dir = scratch_dir("file");
  std::mt19937_64 rng(3);
  const MdpModel m = ts::random_model(rng, 5, 3, 0.4);
  io::write_model(dir / "m.json", m);
  EXPECT_TRUE(io::read_model(dir / "m.json") == m);
  EXPECT_THROW(io::read_model(dir / "absent.json"), IoError);
  EXPECT_THROW(io::write_text(dir / "no" / "such" / "dir.txt", "x"), IoError);
}

TEST(ModelJson, SyntaxErrorsNameLineAndColumn) {
  const std::string broken = replace(kTwoStateModel, "\"beta\": 0.5,", "\"beta\": 0.5,,");
  const std::string msg = error_of(broken);
  EXPECT_NE(msg.find("parse: line 4, column"), std::string::npos) << msg;
  EXPECT_NE(error_of("").find("line 1, column 1"), std::string::npos);
}

TEST(ModelJson, FieldErrorsNameTheField) {
  EXPECT_NE(error_of(replace(kTwoStateModel, "\"beta\": 0.5,", "")).find("field \"beta\": missing"),
            std::string::npos);
  EXPECT_NE(error_of(replace(kTwoStateModel, "\"num_states\": 2", "\"num_states\": 2.5"))
                .find("field \"num_states\": expected an integer"),
            std::string::npos);
  EXPECT_NE(error_of(replace(kTwoStateModel, "\"1,0\": [0.25, 0.75]", "\"1,1\": [0.25, 0.75]"))
                .find("field \"kernel[\"1,0\"]\": missing"),
            std::string::npos);
  EXPECT_NE(error_of(replace(kTwoStateModel, "[0.25, 0.75]", "[0.25, \"x\"]"))
                .find("kernel[\"1,0\"][1]"),
            std::string::npos);
  EXPECT_NE(error_of(replace(kTwoStateModel, "\"1,0\": 3.0", "\"1,0\": 3.0, \"1,1\": 0.0"))
                .find("field \"reward\": has entries"),
            std::string::npos);
  EXPECT_NE(error_of(replace(kTwoStateModel, "[[0, 1], [0]]", "[[0, 1]]")).find("field \"feasible\""),
            std::string::npos);
  EXPECT_NE(error_of("[1, 2]").find("JSON object"), std::string::npos);
}

TEST(ModelJson, BadRowIsAValidationErrorNamingThePair) {
  const std::string msg = error_of(replace(kTwoStateModel, "[0.25, 0.75]", "[0.25, 0.7]"));
  EXPECT_EQ(msg.rfind("validation: ", 0), 0u) << msg;
  EXPECT_NE(msg.find("1,0"), std::string::npos) << msg;
  const std::string neg = error_of(replace(kTwoStateModel, "[0.25, 0.75]", "[-0.25, 1.25]"));
  EXPECT_NE(neg.find("1,0"), std::string::npos) << neg;
}

TEST(PolicyJson, RoundTrips) {
  const DeterministicPolicy d({2, 0, 1});
  EXPECT_EQ(io::policy_to_json(d), "{\"actions\":[2,0,1]}\n");
  EXPECT_EQ(std::get<DeterministicPolicy>(io::policy_from_json(io::policy_to_json(d))), d);

  std::mt19937_64 rng(4);
  const MdpModel m = ts::random_model(rng, 4, 3, 0.2);
  const RandomizedPolicy u = RandomizedPolicy::uniform(m);
  const auto back = std::get<RandomizedPolicy>(io::policy_from_json(io::policy_to_json(u)));
  EXPECT_EQ(back.theta(), u.theta());
  EXPECT_THROW(io::policy_from_json("{\"rules\": []}"), ParseError);
  EXPECT_THROW(io::policy_from_json("{\"theta\": [[0.5, 0.5], [1.0]]}"), ParseError);
}

TEST(PolicyJson, ReadPolicyChecksFeasibility) {
  const fs::path dir = scratch_dir("policy");
  const MdpModel m = io::model_from_json(kTwoStateModel);
  io::write_text(dir / "ok.json", "{\"actions\": [1, 0]}");
  io::write_text(dir / "bad.json", "{\"actions\": [0, 1]}");
  io::write_text(dir / "short.json", "{\"actions\": [0]}");
  EXPECT_EQ(std::get<DeterministicPolicy>(io::read_policy(dir / "ok.json", m)), DeterministicPolicy({1, 0}));
  try {
    io::read_policy(dir / "bad.json", m);
    FAIL() << "expected FeasibilityError";
  } catch (const FeasibilityError& e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
  EXPECT_THROW(io::read_policy(dir / "short.json", m), ValidationError);
}

TEST(PolicyId, StableAndDistinct) {
  const DeterministicPolicy a({0, 1, 2});
  EXPECT_EQ(io::policy_id(a), io::policy_id(DeterministicPolicy({0, 1, 2})));
  EXPECT_NE(io::policy_id(a), io::policy_id(DeterministicPolicy({0, 2, 1})));
  EXPECT_NE(io::policy_id(a), io::policy_id(DeterministicPolicy({0, 1, 2, 0})));
  EXPECT_EQ(io::policy_id(a).size(), 16u);
  // FNV-1a offset basis for the empty input.
  EXPECT_EQ(io::policy_id(DeterministicPolicy()), "cbf29ce484222325");
}

TEST(Csv, TablesHaveTheDocumentedHeaders) {
  io::CsvTable t({"a", "b"});
  t.cell(1).cell(0.25).end_row();
  t.cell("x").cell(std::uint64_t{7}).end_row();
  EXPECT_EQ(t.str(), "a,b\n1,0.25\nx,7\n");
  io::CsvTable bad({"a", "b"});
  bad.cell(1);
  EXPECT_THROW(bad.end_row(), ValidationError);
  EXPECT_THROW(bad.cell(2).cell(3), ValidationError);

  std::mt19937_64 rng(5);
  const MdpModel m = ts::random_model(rng, 3, 2, 0.3);
  const PolicyIterationResult r = policy_iteration(m, random_policy(m, rng));
  const std::string trace = io::trace_csv(r.trace);
  EXPECT_EQ(trace.rfind("iter,j_mean,j_var,j_combined,states_changed\n", 0), 0u);
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), static_cast<long>(r.trace.iterations.size()) + 1);

  const std::string metrics = io::metrics_csv({r.policy}, {r.report});
  EXPECT_EQ(metrics, "policy_id,j_mean,j_var,j_combined\n" + io::policy_id(r.policy) + "," +
                         io::format_number(r.report.j_mean) + "," + io::format_number(r.report.j_var) +
                         "," + io::format_number(r.report.j_combined) + "\n");
  EXPECT_THROW(io::metrics_csv({r.policy}, {}), ValidationError);

  const SamplePath path = simulate_path(m, r.policy, 4, 1, 0);
  const std::string p = io::path_csv(path);
  EXPECT_EQ(p.rfind("t,state,action,reward\n0,0,", 0), 0u);
  EXPECT_EQ(std::count(p.begin(), p.end(), '\n'), 5);

  const std::string scores = io::table_csv(improvement_scores(m, r.report.j_mean, r.report.potential));
  EXPECT_EQ(scores.rfind("state,action,score\n", 0), 0u);
}

TEST(ReportJson, CarriesTheMetrics) {
  std::mt19937_64 rng(6);
  const MdpModel m = ts::random_model(rng, 3, 2, 0.3);
  const EvaluationReport r = evaluate(m, random_policy(m, rng));
  const std::string text = io::report_to_json(r);
  for (const char* key : {"\"pi\"", "\"j_mean\"", "\"j_var\"", "\"j_combined\"", "\"potential\"", "\"beta\""})
    EXPECT_NE(text.find(key), std::string::npos) << key;
  ErgodicityOptions opt;
  const std::string erg = io::ergodicity_to_json(check_ergodicity(m, opt));
  EXPECT_NE(erg.find("\"ok\": true"), std::string::npos) << erg;
  EXPECT_NE(erg.find("\"multichain_count\": 0"), std::string::npos) << erg;
}
