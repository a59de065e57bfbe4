#pragma once

#include <stdexcept>
#include <string>

namespace hetv2v {

/// Invalid or inconsistent configuration (catalog, pathloss, run manifest).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A formula was evaluated outside its domain (e.g. a zero denominator).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed CIS packet on the wire.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// PDR calibration could not reach a requested channel load.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// API misuse such as querying an empty curve family.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace hetv2v
