#pragma once

#include <stdexcept>
#include <string>

namespace foon {

/// Base for every error raised by the toolkit. Carries the name of the module
/// that raised it so the CLI can report "<module>: <message>".
class Error : public std::runtime_error {
public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(message), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

private:
  std::string module_;
};

/// Malformed document. `position` is "line N" for syntax errors or a field
/// path like "units[2].motion.weight" for schema errors.
class ParseError : public Error {
public:
  ParseError(const std::string& position, const std::string& message)
      : Error("foon_model", position.empty() ? message : position + ": " + message),
        position_(position) {}

  const std::string& position() const noexcept { return position_; }

private:
  std::string position_;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class PreconditionError : public Error {
public:
  using Error::Error;
};

class PlanningError : public Error {
public:
  using Error::Error;
};

/// The object exists in the FOON but the requested state is never produced.
class MissingStateError : public PlanningError {
public:
  MissingStateError(const std::string& name, const std::string& state)
      : PlanningError("tree_modification",
                      "state '" + state + "' is not reachable for '" + name + "'"),
        name_(name), state_(state) {}

  const std::string& name() const noexcept { return name_; }
  const std::string& state() const noexcept { return state_; }

private:
  std::string name_;
  std::string state_;
};

class BudgetExceededError : public PlanningError {
public:
  using PlanningError::PlanningError;
};

}  // namespace foon
