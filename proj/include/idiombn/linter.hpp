#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "idiombn/graph.hpp"
#include "idiombn/idioms.hpp"
#include "idiombn/model_format.hpp"

namespace idiombn {

// Rule ids are frozen; new rules get new ids.
enum class Rule { R1 = 1, R2, R3, R4, R5, R6, R7, R8 };

inline constexpr std::size_t kRuleCount = 8;

std::string rule_id(Rule rule);  // "R1"
Severity rule_severity(Rule rule);

struct Finding {
  Rule rule;
  Severity severity;
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  std::string message;
  // Short name of the modelling principle the rule enforces.
  std::string anchor;
};

struct LintReport {
  std::vector<Finding> findings;
  std::size_t errors = 0;
  std::size_t warnings = 0;
  std::map<std::string, std::size_t> by_rule;

  bool empty() const { return findings.empty(); }
};

struct LintOptions {
  // Warning rules to skip. Error rules listed here are still evaluated.
  std::set<Rule> disabled;
  // The model is used for observational reasoning (enables R8).
  bool observational_use = true;
};

// Unclassified nodes never trigger role rules. R7 runs only when instances
// are supplied.
LintReport lint(const BayesNet& net, const std::vector<IdiomInstance>* instances = nullptr,
                const LintOptions& options = {});

std::string format_report(const LintReport& report);
std::string report_json(const LintReport& report);

struct CoveredEdge {
  Edge edge;
  // Labels of every instance producing the edge.
  std::vector<std::string> instances;
};

struct CoverageReport {
  std::vector<CoveredEdge> covered;
  std::vector<Edge> uncovered;

  // 1 for a network without edges.
  double fraction() const;
};

CoverageReport coverage(const BayesNet& net, const std::vector<IdiomInstance>& instances);

}  // namespace idiombn
