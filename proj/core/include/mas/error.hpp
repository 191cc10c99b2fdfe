#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mas {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed line in one of the text formats (network, scenario, config, KB, log).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

/// Structurally well-formed input that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// grid
class UnknownBranch : public Error {
 public:
  explicit UnknownBranch(const std::string& id) : Error("unknown branch '" + id + "'") {}
};
class SingularNetwork : public Error {
 public:
  using Error::Error;
};
class InvalidFault : public Error {
 public:
  using Error::Error;
};

// comms
class ModeViolation : public Error {
 public:
  using Error::Error;
};
class NoLink : public Error {
 public:
  using Error::Error;
};
class SelectivityViolation : public Error {
 public:
  using Error::Error;
};
class UnknownArea : public Error {
 public:
  using Error::Error;
};
class UnknownAgent : public Error {
 public:
  using Error::Error;
};
class NotRegional : public Error {
 public:
  using Error::Error;
};

// agents
class WrongBranch : public Error {
 public:
  using Error::Error;
};
class NoActiveGroup : public Error {
 public:
  using Error::Error;
};
class StaleInstruction : public Error {
 public:
  using Error::Error;
};
class AlreadyInState : public Error {
 public:
  using Error::Error;
};
class NotMember : public Error {
 public:
  using Error::Error;
};

// adaptive
class TooManyDgs : public Error {
 public:
  using Error::Error;
};
class InfeasibleVector : public Error {
 public:
  InfeasibleVector(const std::string& bits, const std::string& reason)
      : Error("status vector " + bits + " is infeasible: " + reason), reason_(reason) {}
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string reason_;
};
class HashMismatch : public Error {
 public:
  using Error::Error;
};

// sim
class UnknownElement : public Error {
 public:
  UnknownElement(std::size_t line, const std::string& id)
      : Error("line " + std::to_string(line) + ": unknown element '" + id + "'"), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

}  // namespace mas
