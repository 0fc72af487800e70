#pragma once

#include <stdexcept>
#include <string>

namespace arl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the number of preferred extensions exceeds the configured cap.
class ExtensionCapExceeded : public Error {
 public:
  explicit ExtensionCapExceeded(std::size_t cap)
      : Error("preferred extension count exceeds cap of " + std::to_string(cap)), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss during reward-model or Q-network training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Failure of one pipeline stage; carries the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace arl
