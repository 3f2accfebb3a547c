#pragma once

#include <stdexcept>
#include <string>

namespace spinpath {

enum class Errc {
  DuplicateEdge,
  SelfLoop,
  VertexOutOfRange,
  GhostInSet,
  ParityViolation,
  InvalidState,
  InvalidConfig,
  PreconditionViolated,
  BudgetExceeded,
  InfiniteCaps,
  AggregateModeUnsupported,
  InadmissiblePair,
  FieldZero,
  UnsupportedN,
  NonConvergence,
  NotEquilibrated,
  NoCandidateSteps,
  InsufficientData,
  InsufficientSignal,
  ExplorationComplete,
  UsageError,
};

const char* errc_name(Errc c);

// Single exception type for all engine errors; tests match on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace spinpath
