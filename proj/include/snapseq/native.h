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

#ifndef SNAPSEQ_NATIVE_H
#define SNAPSEQ_NATIVE_H

#include <vector>

#include "snapseq/fock_linalg.h"

namespace snapseq {

/// D(alpha_{T+1}) S(theta_T) D(alpha_T) ... S(theta_1) D(alpha_1).
struct NativeSequence {
    int dim = kDefaultDim;
    std::vector<double> displacements;  // T + 1 entries
    std::vector<SnapPhases> snaps;      // T entries

    int size() const { return static_cast<int>(snaps.size()); }
    double net_displacement() const;
    void validate() const;
};

NativeSequence to_native(const BlockSequence &seq);

/// Inverse of to_native. A nonzero net displacement is absorbed by two
/// parity blocks B(-a/4, rot(pi)) B(a/4, rot(pi)) = D(a) appended at the end.
BlockSequence from_native(const NativeSequence &native);

/// Product of the native gates in application order.
ComplexMatrix native_unitary(const NativeSequence &native);

}  // namespace snapseq

#endif
