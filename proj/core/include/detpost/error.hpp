// Copyright 2026 The detpost Authors
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

#ifndef DETPOST_ERROR_HPP_
#define DETPOST_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace detpost {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (mixed groups, volume mismatch, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A box with non-finite coordinates or non-positive extent.
class InvalidBox : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for the input (zero lesions, zero GT boxes).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/// The synthetic generator could not satisfy its placement constraints.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A record references a volume or slice outside the inventory.
class ReferentialError : public Error {
 public:
  using Error::Error;
};

/// A problem with an input file, addressed by file, line and field.
///
/// `line` is 1-based; 0 means the error is not tied to a line.
class InputError : public Error {
 public:
  InputError(std::string file, std::size_t line, std::string field, const std::string& message)
      : Error(format(file, line, field, message)),
        file_(std::move(file)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(const std::string& file, std::size_t line, const std::string& field,
                            const std::string& message) {
    std::string out = file;
    if (line > 0) out += ":" + std::to_string(line);
    if (!field.empty()) out += ": field '" + field + "'";
    out += ": " + message;
    return out;
  }

  std::string file_;
  std::size_t line_;
  std::string field_;
};

/// Malformed syntax (bad JSON, truncated payload).
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

/// Well-formed input that breaks a field invariant.
class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

/// A record whose volume_id is not in the inventory, or whose slice is out of range.
class DanglingReference : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace detpost

#endif  // DETPOST_ERROR_HPP_
