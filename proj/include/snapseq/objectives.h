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

#ifndef SNAPSEQ_OBJECTIVES_H
#define SNAPSEQ_OBJECTIVES_H

#include <vector>

#include "snapseq/fock_linalg.h"
#include "snapseq/targets.h"

namespace snapseq {

/// Fidelities at or above this value are clamped before taking ln(1 - F).
inline constexpr double kSaturationCeiling = 1.0 - 1e-15;

struct PhotonNumbers {
    std::vector<double> forward;  // nbar_t: during SNAP t, started from the inputs
    std::vector<double> reverse;  // nbar'_t: during SNAP t of the inverse sequence
};

struct ObjectiveReport {
    double fidelity = 0.0;
    std::vector<double> nbar_forward;
    std::vector<double> nbar_reverse;
    double photon_cost = 0.0;  // sum_t (nbar_t + nbar'_t) / 2
    double lambda = 0.0;
    double total_cost = 0.0;  // ln(1 - F) + lambda * photon_cost
    double non_leakage = 0.0;
    bool saturated = false;  // F was clamped to kSaturationCeiling
};

/// tr[V^dag U] for U = B_T ... B_1, evaluated from the 2L basis states.
cdouble overlap(const TargetOperation &target, const BlockSequence &seq);

/// Mean overlap (1/L) |tr[V^dag U]|.
double fidelity(const TargetOperation &target, const BlockSequence &seq);

PhotonNumbers photon_numbers(const TargetOperation &target, const BlockSequence &seq);

/// (1/L) ||V U^dag V||_1, computed from the L x L matrix <y_j|U|x_k>.
double non_leakage(const TargetOperation &target, const BlockSequence &seq);

/// Every figure of merit in one pass.
ObjectiveReport total_cost(const TargetOperation &target, const BlockSequence &seq,
                           double lambda);

/// ln(1 - F) with the saturation clamp applied.
double log_infidelity(double fidelity, bool *saturated = nullptr);

/// Throws a config error unless target and sequence share a dimension and the
/// sequence is well formed.
void check_compatible(const TargetOperation &target, const BlockSequence &seq);

}  // namespace snapseq

#endif
