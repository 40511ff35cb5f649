// Copyright 2026 The snapseq Authors
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

#ifndef SNAPSEQ_ERRORS_H
#define SNAPSEQ_ERRORS_H

#include <stdexcept>
#include <string>

namespace snapseq {

/// Category of a failure, mapped onto CLI exit codes by the job runner.
enum class ErrorKind {
    Config,      // bad user input: dimensions, ranges, malformed files
    Numeric,     // nonfinite values, solver failures
    Saturation,  // objective already at its numerical ceiling
};

class SnapError : public std::runtime_error {
   public:
    SnapError(ErrorKind kind, const std::string &message, std::string field = {});

    ErrorKind kind() const { return kind_; }
    /// Dotted path of the offending input field, empty when not applicable.
    const std::string &field() const { return field_; }

   private:
    ErrorKind kind_;
    std::string field_;
};

[[noreturn]] void throw_config(const std::string &message, const std::string &field = {});
[[noreturn]] void throw_numeric(const std::string &message);

const char *error_kind_name(ErrorKind kind);

}  // namespace snapseq

#endif
