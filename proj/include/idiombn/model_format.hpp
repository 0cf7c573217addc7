#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idiombn/graph.hpp"
#include "idiombn/idioms.hpp"

namespace idiombn {

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

enum class Severity { Error, Warning };

std::string_view to_string(Severity severity);

// Stable diagnostic codes.
namespace diag {
inline constexpr std::string_view kLexical = "lexical";
inline constexpr std::string_view kSyntax = "syntax";
inline constexpr std::string_view kDuplicateName = "duplicate-name";
inline constexpr std::string_view kUnknownTemplate = "unknown-template";
inline constexpr std::string_view kUnknownSlot = "unknown-slot";
inline constexpr std::string_view kUnknownRole = "unknown-role";
inline constexpr std::string_view kUnknownVariable = "unknown-variable";
inline constexpr std::string_view kUnknownState = "unknown-state";
inline constexpr std::string_view kInvalidStates = "invalid-states";
inline constexpr std::string_view kRowSum = "row-sum";
inline constexpr std::string_view kRowArity = "row-arity";
inline constexpr std::string_view kMissingRow = "missing-row";
inline constexpr std::string_view kDuplicateRow = "duplicate-row";
inline constexpr std::string_view kProbabilityRange = "probability-range";
inline constexpr std::string_view kMissingCpt = "missing-cpt";
inline constexpr std::string_view kDuplicateCpt = "duplicate-cpt";
inline constexpr std::string_view kCptMismatch = "cpt-mismatch";
inline constexpr std::string_view kCompositionCycle = "composition-cycle";
inline constexpr std::string_view kSelfLoop = "self-loop";
inline constexpr std::string_view kDecisionArc = "decision-arc";
inline constexpr std::string_view kMissingSlot = "missing-slot";
inline constexpr std::string_view kArity = "arity";
inline constexpr std::string_view kDuplicateBinding = "duplicate-binding";
inline constexpr std::string_view kRoleMismatch = "role-mismatch";
inline constexpr std::string_view kMultiRole = "multi-role";
inline constexpr std::string_view kNotQuantified = "not-quantified";
}  // namespace diag

struct Diagnostic {
  Severity severity = Severity::Error;
  SourcePos pos;
  std::string code;
  std::string message;
};

// "file:line:col: error[code]: message"
std::string format_diagnostic(const Diagnostic& d, std::string_view file = {});
bool has_errors(const std::vector<Diagnostic>& diagnostics);

struct VariableDecl {
  std::string name;
  std::vector<std::string> states;
  Role role = Role::Unclassified;
  SourcePos pos;
};

struct SlotBinding {
  std::string slot;
  std::vector<std::string> names;
  // Written with brackets.
  bool list = false;
  SourcePos pos;
};

struct IdiomDecl {
  std::string template_name;
  std::string name;
  std::vector<SlotBinding> slots;
  SourcePos pos;
};

struct EdgeDecl {
  std::string from;
  std::string to;
  bool decision = false;
  SourcePos pos;
};

struct RowDecl {
  // Parent state labels, in `given` order; empty for a prior.
  std::vector<std::string> keys;
  std::vector<double> values;
  SourcePos pos;
};

struct CptDecl {
  std::string child;
  std::vector<std::string> parents;
  std::vector<RowDecl> rows;
  SourcePos pos;
};

struct ModelDocument {
  // Leading `#` comment lines, kept verbatim by the serializer.
  std::vector<std::string> preamble;
  std::vector<VariableDecl> variables;
  std::vector<IdiomDecl> idioms;
  std::vector<EdgeDecl> edges;
  std::vector<CptDecl> cpts;

  bool empty() const { return variables.empty() && idioms.empty() && edges.empty() && cpts.empty(); }
};

// Content equality; source positions are ignored.
bool same_content(const ModelDocument& a, const ModelDocument& b);

struct ParseResult {
  // Present whenever no error was reported.
  std::optional<ModelDocument> document;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return document.has_value(); }
};

// Never stops at the first error; LF and CRLF line endings accepted.
ParseResult parse(std::string_view text);

struct ElaborateResult {
  std::optional<BayesNet> net;
  std::vector<IdiomInstance> instances;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return net.has_value(); }
};

ElaborateResult elaborate(const ModelDocument& doc);

// Canonical text: declarations grouped (variables, idioms, edges, cpts) and
// sorted by name, numbers with up to 12 significant digits, LF endings.
std::string serialize(const ModelDocument& doc);

// Canonical rendering of one probability.
std::string format_number(double value);

std::string export_dot(const BayesNet& net, const std::vector<IdiomInstance>& instances);

// JSON mirror of the document with stable key order.
std::string export_json(const ModelDocument& doc);

// Rebuilds a document from a network so programmatic models can be written
// out. Idiom instances become idiom decls; edges they do not cover become raw
// edge decls.
ModelDocument to_document(const BayesNet& net, const std::vector<IdiomInstance>& instances = {});

}  // namespace idiombn
