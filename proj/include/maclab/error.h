// Copyright 2026 The maclab Authors
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

#ifndef MACLAB_ERROR_H_
#define MACLAB_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace maclab {

// Every failure raised by the library carries one of these kinds. The CLI
// maps them onto process exit codes.
enum class ErrorKind {
  kConfig,           // invalid configuration field
  kContract,         // precondition / shape violation
  kNumeric,          // non-finite values
  kUnsupported,      // input outside an implemented regime
  kSyntax,           // clause text does not follow the grammar
  kVocabulary,       // clause text uses an undeclared symbol
  kCoverage,         // symbolic execution found no applicable clause
  kNotFound,         // unknown clause id
  kValidation,       // well-formed but semantically rejected input
  kMissingArtifact,  // an expected run file is absent
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Syntax errors additionally report where parsing stopped (1-based).
class SyntaxError : public Error {
 public:
  SyntaxError(int line, int column, const std::string& message);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) Fail(ErrorKind::kContract, message);
}

}  // namespace maclab

#endif  // MACLAB_ERROR_H_
