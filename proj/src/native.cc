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

#include "snapseq/native.h"

#include <cmath>
#include <numbers>
#include <string>

#include "snapseq/errors.h"

namespace snapseq {

namespace {

constexpr double kNetTolerance = 1e-12;

}  // namespace

double NativeSequence::net_displacement() const {
    double sum = 0.0;
    for (double a : displacements) {
        sum += a;
    }
    return sum;
}

void NativeSequence::validate() const {
    if (dim < 1) {
        throw_config("dim must be positive", "native.dim");
    }
    if (displacements.size() != snaps.size() + 1) {
        throw_config("expected one more displacement than SNAP gates", "native.displacements");
    }
    for (std::size_t s = 0; s < displacements.size(); ++s) {
        if (!std::isfinite(displacements[s])) {
            throw_config("displacement is not finite",
                         "native.displacements[" + std::to_string(s) + "]");
        }
    }
    for (std::size_t s = 0; s < snaps.size(); ++s) {
        std::string field = "native.snaps[" + std::to_string(s) + "]";
        if (snaps[s].size() != dim) {
            throw_config("SNAP phase vector length does not match dim", field);
        }
        if (!snaps[s].allFinite()) {
            throw_config("SNAP phase is not finite", field);
        }
    }
}

NativeSequence to_native(const BlockSequence &seq) {
    seq.validate();
    NativeSequence out;
    out.dim = seq.dim;
    double prev = 0.0;
    for (const Block &b : seq.blocks) {
        out.displacements.push_back(b.alpha - prev);
        out.snaps.push_back(b.theta);
        prev = b.alpha;
    }
    out.displacements.push_back(-prev);
    return out;
}

BlockSequence from_native(const NativeSequence &native) {
    native.validate();
    BlockSequence seq;
    seq.dim = native.dim;
    double prefix = 0.0;
    for (int t = 0; t < native.size(); ++t) {
        prefix += native.displacements[t];
        seq.blocks.push_back(Block{prefix, native.snaps[t]});
    }
    double net = prefix + native.displacements.back();
    if (std::abs(net) > kNetTolerance) {
        SnapPhases parity = rotation_phases(std::numbers::pi, native.dim);
        seq.blocks.push_back(Block{net / 4.0, parity});
        seq.blocks.push_back(Block{-net / 4.0, parity});
    }
    return seq;
}

ComplexMatrix native_unitary(const NativeSequence &native) {
    native.validate();
    const DisplacementBasis &basis = displacement_basis(native.dim);
    ComplexMatrix u = basis.matrix(native.displacements[0]);
    for (int t = 0; t < native.size(); ++t) {
        Eigen::VectorXcd s =
            native.snaps[t].unaryExpr([](double x) { return std::polar(1.0, x); });
        u = basis.matrix(native.displacements[t + 1]) * (s.asDiagonal() * u);
    }
    return u;
}

}  // namespace snapseq
