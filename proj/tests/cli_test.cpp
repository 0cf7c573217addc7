#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace idiombn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

std::string fixture(const std::string& id) { return testing_support::fixture_dir() + "/" + id + ".idbn"; }

class TempModel {
 public:
  explicit TempModel(const std::string& text) {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("idbn_cli_test_" + std::to_string(::getpid()) + "_" +
                                         std::to_string(counter++) + ".idbn");
    std::ofstream(path_) << text;
  }
  ~TempModel() { fs::remove(path_); }
  std::string path() const { return path_.string(); }

 private:
  fs::path path_;
};

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).status, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).status, cli::kUsage);
  EXPECT_EQ(run({"query", fixture("treatment_triangle"), "--target", "HeartAttack", "--counterfactual"}).status,
            cli::kUsage);
  EXPECT_EQ(run({"query", fixture("xray_measurement"), "--target", "Bleeding", "--evidence", "Xray"}).status,
            cli::kUsage);
  EXPECT_EQ(run({"export", fixture("xray_measurement")}).status, cli::kUsage);
  EXPECT_EQ(run({"export", fixture("xray_measurement"), "--dot", "--json"}).status, cli::kUsage);
  EXPECT_EQ(run({"--help"}).status, cli::kOk);
}

TEST(Cli, CheckExitCodes) {
  for (const auto& info : fixture_registry()) {
    const auto r = run({"check", fixture(info.id)});
    const int expected = info.lint.errors > 0 || info.lint.warnings > 0 ? cli::kDiagnostics : cli::kOk;
    EXPECT_EQ(r.status, expected) << info.id << "\n" << r.err;
    EXPECT_TRUE(r.out.empty());
  }
  EXPECT_EQ(run({"check", fixture("coagulopathy_sketch"), "--no-warn"}).status, cli::kOk);
  EXPECT_EQ(run({"check", fixture("coagulopathy_sketch"), "--disable", "R4"}).status, cli::kOk);
  EXPECT_EQ(run({"check", fixture("head_injury_bad"), "--no-warn"}).status, cli::kDiagnostics);
  EXPECT_EQ(run({"check", "/nonexistent/model.idbn"}).status, cli::kUsage);
}

TEST(Cli, CheckHeadInjury) {
  const auto r = run({"check", fixture("head_injury_bad")});
  EXPECT_EQ(r.status, cli::kDiagnostics);
  EXPECT_NE(r.err.find("R1"), std::string::npos);
  EXPECT_NE(r.err.find("R2"), std::string::npos);
  EXPECT_NE(r.err.find("2 error(s)"), std::string::npos);
  const auto j = run({"check", fixture("head_injury_bad"), "--json"});
  const auto doc = nlohmann::json::parse(j.err);
  EXPECT_EQ(doc["findings"].size(), 2u);
  EXPECT_EQ(doc["summary"]["errors"], 2);
}

TEST(Cli, CheckReportsParseDiagnostics) {
  TempModel bad("variable A { states: yes, no; }\ncpt A { prior: 0.4, 0.4; }\n");
  const auto r = run({"check", bad.path()});
  EXPECT_EQ(r.status, cli::kDiagnostics);
  EXPECT_NE(r.err.find(bad.path() + ":2:"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("error[row-sum]"), std::string::npos);
}

TEST(Cli, ObservationalQuery) {
  const auto r = run({"query", fixture("xray_measurement"), "--target", "Bleeding", "--evidence", "Xray=pos"});
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_EQ(r.out, "Bleeding: yes=0.913462 no=0.086538\n");
}

TEST(Cli, InterventionalQueryMatchesBackdoor) {
  const auto r = run({"query", fixture("treatment_triangle"), "--target", "HeartAttack", "--do", "Medication=given"});
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_EQ(r.out, "HeartAttack: yes=0.160000 no=0.840000\n");
}

TEST(Cli, CounterfactualQuery) {
  const auto r = run({"query", fixture("counterfactual_medication"), "--target", "HeartAttack", "--evidence", "CAD=yes",
                      "--evidence", "Medication=not_given", "--evidence", "HeartAttack=yes", "--do", "Medication=given",
                      "--counterfactual"});
  EXPECT_EQ(r.status, cli::kOk) << r.err;
  EXPECT_EQ(r.out, "HeartAttack': yes=0.300000 no=0.700000\n");
}

TEST(Cli, QueryFailures) {
  TempModel m(
      "variable A { states: yes, no; }\n"
      "variable B { states: yes, no; }\n"
      "edge A -> B\n"
      "cpt A { prior: 1, 0; }\n"
      "cpt B given (A) {\n  row(yes): 1, 0;\n  row(no): 0.5, 0.5;\n}\n");
  const auto r = run({"query", m.path(), "--target", "A", "--evidence", "B=no"});
  EXPECT_EQ(r.status, cli::kQueryFailure);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run({"query", m.path(), "--target", "Q"}).status, cli::kUsage);
}

TEST(Cli, JsonCarriesTextFields) {
  const auto text = run({"query", fixture("treatment_triangle"), "--target", "HeartAttack", "--target", "CAD", "--do",
                         "Medication=given"});
  const auto js = run({"query", fixture("treatment_triangle"), "--target", "HeartAttack", "--target", "CAD", "--do",
                       "Medication=given", "--json"});
  ASSERT_EQ(js.status, cli::kOk);
  const auto doc = nlohmann::ordered_json::parse(js.out);
  EXPECT_EQ(doc["mode"], "interventional");
  ASSERT_EQ(doc["results"].size(), 2u);
  std::string rebuilt;
  for (const auto& r : doc["results"]) {
    rebuilt += r["variable"].get<std::string>() + ":";
    for (const auto& [state, p] : r["probabilities"].items()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", p.get<double>());
      rebuilt += " " + state + "=" + buf;
    }
    rebuilt += "\n";
  }
  EXPECT_EQ(rebuilt, text.out);
  EXPECT_EQ(doc["removed_edges"].size(), 1u);
}

TEST(Cli, LintCommand) {
  const auto good = run({"lint", fixture("cad_composite")});
  EXPECT_EQ(good.status, cli::kOk);
  EXPECT_NE(good.out.find("coverage: 13/13"), std::string::npos) << good.out;
  const auto bad = run({"lint", fixture("head_injury_bad"), "--json"});
  EXPECT_EQ(bad.status, cli::kDiagnostics);
  const auto doc = nlohmann::json::parse(bad.out);
  EXPECT_EQ(doc["summary"]["by_rule"]["R1"], 1);
  EXPECT_EQ(doc["coverage"]["uncovered"].size(), 2u);
}

TEST(Cli, Classify) {
  EXPECT_EQ(run({"classify", fixture("cad_composite")}).out, "no suggestions\n");
  TempModel raw(
      "variable CAD { states: yes, no; role: condition }\n"
      "variable Smoking { states: yes, no; role: risk_factor }\n"
      "edge Smoking -> CAD\n"
      "cpt CAD given (Smoking) {\n  row(yes): 0.3, 0.7;\n  row(no): 0.1, 0.9;\n}\n"
      "cpt Smoking { prior: 0.2, 0.8; }\n");
  const auto r = run({"classify", raw.path()});
  EXPECT_EQ(r.status, cli::kOk);
  EXPECT_NE(r.out.find("1. risk_factor"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("pathogenesis"), std::string::npos);
  const auto hidden = run({"classify", raw.path(), "--mediator-hidden"});
  EXPECT_NE(hidden.out.find("1. pathogenesis"), std::string::npos) << hidden.out;
  const auto js = nlohmann::json::parse(run({"classify", raw.path(), "--json"}).out);
  EXPECT_EQ(js["groups"][0]["suggestions"][0], "risk_factor");

  TempModel empty("# nothing here\n");
  const auto e = run({"classify", empty.path()});
  EXPECT_EQ(e.status, cli::kOk);
  EXPECT_TRUE(e.out.empty());
}

TEST(Cli, Export) {
  const auto dot = run({"export", fixture("cad_composite"), "--dot"});
  EXPECT_EQ(dot.status, cli::kOk);
  EXPECT_EQ(testing_support::check_dot_syntax(dot.out), "");
  const auto js = run({"export", fixture("cad_composite"), "--json"});
  EXPECT_TRUE(nlohmann::json::accept(js.out));
  std::ifstream in(fixture("cad_composite"));
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(run({"export", fixture("cad_composite"), "--canonical"}).out, buf.str());
}

TEST(Cli, Deterministic) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"export", fixture("coagulopathy_sketch"), "--dot"},
           {"lint", fixture("coagulopathy_sketch"), "--json"},
           {"query", fixture("cad_composite"), "--target", "CAD", "--target", "Smoking", "--evidence", "ECG=abnormal"}}) {
    const auto a = run(args), b = run(args);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.err, b.err);
    EXPECT_EQ(a.status, b.status);
  }
}
