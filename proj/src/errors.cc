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

#include "snapseq/errors.h"

namespace snapseq {

SnapError::SnapError(ErrorKind kind, const std::string &message, std::string field)
    : std::runtime_error(message), kind_(kind), field_(std::move(field)) {
}

void throw_config(const std::string &message, const std::string &field) {
    throw SnapError(ErrorKind::Config, message, field);
}

void throw_numeric(const std::string &message) {
    throw SnapError(ErrorKind::Numeric, message);
}

const char *error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
            return "config";
        case ErrorKind::Numeric:
            return "numeric";
        case ErrorKind::Saturation:
            return "saturation";
    }
    return "unknown";
}

}  // namespace snapseq
