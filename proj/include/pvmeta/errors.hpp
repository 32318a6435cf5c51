#pragma once

#include <stdexcept>
#include <string>

namespace pvmeta {

// Exit-code families used by the CLI: validation(2), data(3), numerical(4).

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedRow : DataError {
  long line;
  MalformedRow(long line_no, const std::string& reason)
      : DataError("malformed row at line " + std::to_string(line_no) + ": " + reason),
        line(line_no) {}
};

struct NonMonotonicTimestamps : DataError {
  explicit NonMonotonicTimestamps(const std::string& what) : DataError(what) {}
};

struct MissingColumn : DataError {
  explicit MissingColumn(const std::string& column)
      : DataError("missing column: " + column) {}
};

struct EmptyProfile : DataError {
  explicit EmptyProfile(const std::string& what) : DataError(what) {}
};

struct NoDaylightSamples : DataError {
  explicit NoDaylightSamples(const std::string& what) : DataError(what) {}
};

struct IoError : DataError {
  explicit IoError(const std::string& what) : DataError(what) {}
};

struct InvalidScenario : ValidationError {
  explicit InvalidScenario(const std::string& what) : ValidationError(what) {}
};

struct InvalidConfig : ValidationError {
  explicit InvalidConfig(const std::string& what) : ValidationError(what) {}
};

struct LengthMismatch : NumericalError {
  explicit LengthMismatch(const std::string& what) : NumericalError(what) {}
};

struct FactorizationFailure : NumericalError {
  explicit FactorizationFailure(const std::string& what) : NumericalError(what) {}
};

struct DegeneratePrior : NumericalError {
  explicit DegeneratePrior(const std::string& what) : NumericalError(what) {}
};

struct NonFiniteScore : NumericalError {
  explicit NonFiniteScore(const std::string& what) : NumericalError(what) {}
};

struct SensitivityViolated : NumericalError {
  explicit SensitivityViolated(const std::string& what) : NumericalError(what) {}
};

}  // namespace pvmeta
