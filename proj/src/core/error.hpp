#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace quotefam {

// Precondition or domain violation in a pure computation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data does not match its documented format.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

// Invalid configuration value; field() names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A pipeline stage was run before the stage producing its inputs.
class MissingPrerequisite : public std::runtime_error {
 public:
  MissingPrerequisite(std::string stage, const std::string& artifact)
      : std::runtime_error("missing artifact " + artifact + "; run `" + stage + "` first"),
        stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace quotefam
