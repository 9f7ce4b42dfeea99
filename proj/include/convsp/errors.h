// Copyright 2026 The convsp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONVSP_ERRORS_H_
#define CONVSP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace convsp {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (KB files, logical-form text, dataset records).
class ParseError : public Error {
 public:
  ParseError(const std::string &what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// An identifier that does not resolve in the relevant catalog.
class ReferenceError : public Error {
 public:
  using Error::Error;
};

// A token sequence or tree that violates the operator grammar.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Logical form cannot be evaluated (unresolved pointer, bad operand).
class ExecutionError : public Error {
 public:
  using Error::Error;
};

// Evaluation or search exceeded its configured work budget.
class BudgetExceeded : public ExecutionError {
 public:
  using ExecutionError::ExecutionError;
};

// Pointer leaves could not be mapped to KB entities or numbers.
class SubstitutionError : public Error {
 public:
  using Error::Error;
};

// Inconsistent training or evaluation data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Model input outside the configured vocabulary or length limits.
class InputError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace convsp

#endif  // CONVSP_ERRORS_H_
