#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace idiombn {

enum class ErrorCode {
  UnknownVariable,
  UnknownState,
  IncompleteAssignment,
  OverlappingSets,
  EmptyQuerySet,
  InvalidNetwork,
  TooLarge,
  ImpossibleEvidence,
  UnknownTemplate,
  UnknownSlot,
  MissingSlot,
  ArityViolation,
  DuplicateBinding,
  CompositionCycle,
  EmptyGroup,
  EmptyIntervention,
  EvidenceInterventionOverlap,
  InvalidAdjustmentSet,
  BackdoorOpen,
  PositivityViolation,
  UnknownFixture,
  Io,
};

std::string_view to_string(ErrorCode code);

// Thrown by every library operation that can fail. `nodes()` names the
// variables implicated in the failure (a cycle, the offending set, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::string> nodes = {})
      : std::runtime_error(message), code_(code), nodes_(std::move(nodes)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& nodes() const noexcept { return nodes_; }

 private:
  ErrorCode code_;
  std::vector<std::string> nodes_;
};

}  // namespace idiombn
