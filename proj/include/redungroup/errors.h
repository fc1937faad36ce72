// Copyright 2026 The RedunGroup Authors
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

#ifndef REDUNGROUP_ERRORS_H_
#define REDUNGROUP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace redungroup {

// Base class for every error raised by the library. The CLI maps these to
// exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. `row` and `column` are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int row, int column)
      : Error(message), row_(row), column_(column) {}

  int row() const { return row_; }
  int column() const { return column_; }

 private:
  int row_;
  int column_;
};

class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& message, int epoch)
      : Error(message), epoch_(epoch) {}

  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

}  // namespace redungroup

#endif  // REDUNGROUP_ERRORS_H_
