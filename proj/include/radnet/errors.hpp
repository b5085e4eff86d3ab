#pragma once

#include <stdexcept>
#include <string>

namespace radnet {

// All library failures derive from Error. `kind` separates bad inputs
// (validation) from runtime faults such as I/O (pipeline); the CLI maps
// them to exit codes 2 and 3 respectively.
class Error : public std::runtime_error {
public:
  enum class Kind { validation, pipeline };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

#define RADNET_ERROR(NAME, KIND)                                                \
  struct NAME final : Error {                                                   \
    explicit NAME(const std::string& what) : Error(Error::Kind::KIND, what) {}  \
  }

RADNET_ERROR(CycleDetected, validation);
RADNET_ERROR(Disconnected, validation);
RADNET_ERROR(WrongEdgeCount, validation);
RADNET_ERROR(UnknownNode, validation);
RADNET_ERROR(DimensionMismatch, validation);
RADNET_ERROR(NotInvertible, validation);
RADNET_ERROR(InvalidSpec, validation);
RADNET_ERROR(InvalidModel, validation);
RADNET_ERROR(InsufficientSamples, validation);
RADNET_ERROR(UnmeasuredNode, validation);
RADNET_ERROR(DisconnectedCandidates, validation);
RADNET_ERROR(NonlinearSpec, validation);
RADNET_ERROR(TooLarge, validation);
RADNET_ERROR(TooManyFictitious, validation);
RADNET_ERROR(SizeMismatch, validation);
RADNET_ERROR(UnknownEdgeSpec, validation);
RADNET_ERROR(ParseError, validation);
RADNET_ERROR(IoError, pipeline);

#undef RADNET_ERROR

}  // namespace radnet
