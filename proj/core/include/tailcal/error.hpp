#pragma once

#include <stdexcept>
#include <string>

namespace tailcal {

/// Base class for every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A generator or model parameter lies outside its documented support.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A series is too short for the requested history/horizon split.
class SplitError : public Error {
 public:
  using Error::Error;
};

/// Invalid input to a scoring rule (non-finite outcome, bad level, ...).
class ScoringError : public Error {
 public:
  using Error::Error;
};

/// Invalid input to a statistic (length mismatch, too few values, ...).
class StatsError : public Error {
 public:
  using Error::Error;
};

/// Correlation is undefined because one input has no rank variance.
class UndefinedCorrelation : public StatsError {
 public:
  using StatsError::StatsError;
};

/// Malformed file or record.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tailcal
