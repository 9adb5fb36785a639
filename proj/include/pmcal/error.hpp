// Copyright 2026 The pmcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PMCAL_ERROR_HPP_
#define PMCAL_ERROR_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace pmcal {

// Bad parameters or an inconsistent request (unknown attribute, lambda out
// of range, exact mode without p_star, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data violating a dataset invariant. Carries the 1-based data row and
// column name when the violation came from a file.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
  ValidationError(std::size_t row, std::string column, const std::string& what)
      : std::runtime_error("row " + std::to_string(row) + ", column '" +
                           column + "': " + what),
        row_(row),
        column_(std::move(column)) {}

  std::optional<std::size_t> row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  std::optional<std::size_t> row_;
  std::string column_;
};

// Raised by enumerate_groups when the mass filter leaves nothing to audit.
class EmptyCollectionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pmcal

#endif  // PMCAL_ERROR_HPP_
