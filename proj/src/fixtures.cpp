#include "idiombn/fixtures.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace idiombn {

#ifndef IDIOMBN_FIXTURE_DIR
#define IDIOMBN_FIXTURE_DIR "fixtures"
#endif

namespace {

ExpectedQuery observe(std::string description, std::string target, std::string state, Evidence evidence,
                      double probability, double tolerance = 1e-6) {
  return {std::move(description), QueryMode::Observational, std::move(target), std::move(state), std::move(evidence),
          {}, probability, tolerance};
}

ExpectedQuery intervene(std::string description, std::string target, std::string state, Intervention intervention,
                        Evidence evidence, double probability, double tolerance = 1e-9) {
  return {std::move(description), QueryMode::Interventional, std::move(target), std::move(state), std::move(evidence),
          std::move(intervention), probability, tolerance};
}

ExpectedQuery imagine(std::string description, std::string target, std::string state, Intervention intervention,
                      Evidence evidence, double probability, double tolerance = 1e-9) {
  return {std::move(description), QueryMode::Counterfactual, std::move(target), std::move(state), std::move(evidence),
          std::move(intervention), probability, tolerance};
}

std::vector<FixtureInfo> make_registry() {
  std::vector<FixtureInfo> r;
  auto add = [&](std::string id, std::string description, std::string anchor) -> FixtureInfo& {
    FixtureInfo info;
    info.file = id + ".idbn";
    info.id = std::move(id);
    info.description = std::move(description);
    info.anchor = std::move(anchor);
    info.fully_covered = true;
    r.push_back(std::move(info));
    return r.back();
  };

  {
    auto& f = add("xray_measurement", "X-ray with 1% false positives and 5% false negatives", "measurement idiom");
    f.queries.push_back(observe("bleeding given a positive X-ray", "Bleeding", "yes", {{"Xray", "pos"}},
                                0.095 / 0.104));
  }
  {
    auto& f = add("smoking_chain", "smoking raises the probability of lung cancer", "forward and backward reasoning");
    f.queries.push_back(observe("forward reasoning reads the CPT row", "LungCancer", "yes", {{"Smoking", "yes"}}, 0.1,
                                1e-12));
    f.queries.push_back(observe("prior of lung cancer", "LungCancer", "yes", {}, 0.037));
    f.queries.push_back(observe("backward reasoning", "Smoking", "yes", {{"LungCancer", "yes"}}, 0.03 / 0.037));
  }
  {
    auto& f = add("manifestation_cad", "coronary artery disease with chest pain and ECG", "manifestation idiom");
    f.queries.push_back(observe("chest pain supports CAD", "CAD", "yes", {{"ChestPain", "yes"}}, 0.14 / 0.30));
    f.queries.push_back(observe("chest pain and abnormal ECG", "CAD", "yes", {{"ChestPain", "yes"}, {"ECG", "abnormal"}},
                                0.875));
  }
  {
    auto& f = add("reliability_symptom", "self-reported chest pain with anxiety-dependent reliability",
                  "manifestation reliability idiom");
    f.queries.push_back(observe("reliable report", "CAD", "yes",
                                {{"ReportedChestPain", "yes"}, {"ReportReliability", "reliable"}}, 0.136 / 0.32));
    f.queries.push_back(observe("unreliable report", "CAD", "yes",
                                {{"ReportedChestPain", "yes"}, {"ReportReliability", "unreliable"}}, 0.108 / 0.46));
  }
  add("common_reliability", "one reliability node shared by two reported symptoms", "common reliability");
  {
    auto& f = add("pathogenesis_plaque", "smoking and cholesterol act on CAD through plaque", "pathogenesis idiom");
    f.queries.push_back(observe("smoking raises CAD", "CAD", "yes", {{"Smoking", "yes"}}, 0.391));
  }
  {
    auto& f = add("comorbidity_cause", "smoking causes both CAD and COPD", "comorbidity common cause idiom");
    f.queries.push_back(observe("CAD makes COPD more likely", "COPD", "yes", {{"CAD", "yes"}}, 0.15375));
  }
  {
    auto& f = add("comorbidity_symptom", "chest pain from CAD or lung cancer; explaining away",
                  "comorbidity common symptomology idiom");
    f.queries.push_back(observe("chest pain observed", "CAD", "yes", {{"ChestPain", "yes"}}, 0.505));
    f.queries.push_back(observe("lung cancer explains the pain away", "CAD", "yes",
                                {{"ChestPain", "yes"}, {"LungCancer", "yes"}}, 0.099 / 0.909));
  }
  {
    auto& f = add("complication_mi", "heart failure after MI and haemorrhage after thrombolysis", "complication idiom");
    f.fully_covered = false;
    f.queries.push_back(observe("marginal haemorrhage risk", "Haemorrhage", "yes", {}, 0.015675));
  }
  {
    auto& f = add("treatment_triangle", "medication confounded by CAD", "treatment idiom");
    f.queries.push_back(intervene("effect of giving medication", "HeartAttack", "yes", {{"Medication", "given"}}, {},
                                  0.16));
    f.queries.push_back(observe("confounded conditional", "HeartAttack", "yes", {{"Medication", "given"}},
                                0.086 / 0.38));
  }
  {
    auto& f = add("treatment_reliability", "medication effect depends on adherence", "treatment reliability idiom");
    f.queries.push_back(intervene("given, adherent, CAD present", "HeartAttack", "yes", {{"Medication", "given"}},
                                  {{"Adherence", "reliable"}, {"CAD", "yes"}}, 0.2));
    f.queries.push_back(intervene("given, not adherent, CAD present", "HeartAttack", "yes", {{"Medication", "given"}},
                                  {{"Adherence", "unreliable"}, {"CAD", "yes"}}, 0.5));
  }
  {
    auto& f = add("counterfactual_medication", "would medication have prevented the heart attack",
                  "counterfactual treatment idiom");
    f.queries.push_back(imagine("medication had been given", "HeartAttack", "yes", {{"Medication", "given"}},
                                {{"CAD", "yes"}, {"Medication", "not_given"}, {"HeartAttack", "yes"}}, 0.3));
  }
  add("cad_composite", "coronary artery disease model composed from six idioms", "idiom composition");
  {
    auto& f = add("head_injury_bad", "head-injury outcome model with reversed arcs", "structure assessment");
    f.fully_covered = false;
    f.lint = {2, 0, {{"R1", 1}, {"R2", 1}}};
  }
  add("head_injury_good", "corrected head-injury outcome model", "structure assessment");
  {
    auto& f = add("coagulopathy_sketch", "trauma-induced coagulopathy sketch", "structure assessment");
    f.fully_covered = false;
    f.lint = {0, 2, {{"R4", 2}}};
  }
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

const std::vector<FixtureInfo>& fixture_registry() {
  static const std::vector<FixtureInfo> registry = make_registry();
  return registry;
}

const FixtureInfo& fixture_info(std::string_view id) {
  const auto& reg = fixture_registry();
  auto it = std::find_if(reg.begin(), reg.end(), [&](const FixtureInfo& f) { return f.id == id; });
  if (it == reg.end()) throw Error(ErrorCode::UnknownFixture, "no fixture named '" + std::string(id) + "'");
  return *it;
}

std::string default_fixture_dir() { return IDIOMBN_FIXTURE_DIR; }

LoadedModel load_model(const std::string& path) {
  LoadedModel out;
  out.source = read_file(path);
  auto parsed = parse(out.source);
  out.diagnostics = parsed.diagnostics;
  if (parsed.ok()) {
    auto elaborated = elaborate(*parsed.document);
    out.diagnostics.insert(out.diagnostics.end(), elaborated.diagnostics.begin(), elaborated.diagnostics.end());
    out.document = std::move(*parsed.document);
    out.instances = std::move(elaborated.instances);
    if (elaborated.ok()) {
      out.net = std::move(*elaborated.net);
      return out;
    }
  }
  std::string message = "'" + path + "' is not a valid model";
  for (const auto& d : out.diagnostics)
    if (d.severity == Severity::Error) message += "\n" + format_diagnostic(d, path);
  throw Error(ErrorCode::InvalidNetwork, message);
}

Fixture load_fixture(std::string_view id, const std::string& dir) {
  const FixtureInfo& info = fixture_info(id);
  LoadedModel model = load_model((std::filesystem::path(dir) / info.file).string());
  return Fixture{info, std::move(model.source), std::move(model.document), std::move(model.net),
                 std::move(model.instances)};
}

}  // namespace idiombn
