#pragma once

#include <stdexcept>
#include <string>

namespace prefpower {

// Caller misuse: bad arguments, mismatched lengths, unusable configuration.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed or unusable input data (files, records, schemas).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A well-posed question whose answer is "not achievable within constraints":
// zero-margin budgets, policies that do not fit the budget, exhausted pools.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace prefpower
