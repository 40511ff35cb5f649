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

#include "snapseq/objectives.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "snapseq/errors.h"

namespace snapseq {

namespace {

struct Sweep {
    std::vector<double> nbar;  // one entry per block
    StateSet final_states;     // Fock coordinates
};

/// Pushes `states` through the blocks in the given order (forward, or reverse
/// with conjugated phases) and records the photon number seen by each SNAP.
Sweep sweep(const BlockSequence &seq, const StateSet &states, bool inverse) {
    Sweep out;
    int T = seq.size();
    out.nbar.assign(T, 0.0);
    if (T == 0) {
        out.final_states = states;
        return out;
    }
    const DisplacementBasis &basis = displacement_basis(seq.dim);
    const ComplexMatrix &w = basis.eigenvectors();
    Eigen::VectorXd number = number_diagonal(seq.dim);
    double inv_l = 1.0 / static_cast<double>(states.cols());
    StateSet eig = w.adjoint() * states;
    for (int k = 0; k < T; ++k) {
        int t = inverse ? T - 1 - k : k;
        const Block &b = seq.blocks[t];
        Eigen::VectorXcd e = basis.phases(b.alpha);
        StateSet fock = w * (e.asDiagonal() * eig);
        out.nbar[t] = inv_l * number.dot(fock.cwiseAbs2().rowwise().sum());
        double sign = inverse ? -1.0 : 1.0;
        for (int n = 0; n < seq.dim; ++n) {
            fock.row(n) *= std::polar(1.0, sign * b.theta[n]);
        }
        eig.noalias() = e.conjugate().asDiagonal() * (w.adjoint() * fock);
    }
    out.final_states = w * eig;
    return out;
}

}  // namespace

void check_compatible(const TargetOperation &target, const BlockSequence &seq) {
    if (target.dim() != seq.dim) {
        throw_config("target dimension " + std::to_string(target.dim()) +
                         " does not match sequence dimension " + std::to_string(seq.dim),
                     "dim");
    }
    seq.validate();
}

cdouble overlap(const TargetOperation &target, const BlockSequence &seq) {
    check_compatible(target, seq);
    StateSet ux = apply_sequence(seq, target.inputs());
    return target.outputs().conjugate().cwiseProduct(ux).sum();
}

double fidelity(const TargetOperation &target, const BlockSequence &seq) {
    return std::abs(overlap(target, seq)) / target.logical_dim();
}

PhotonNumbers photon_numbers(const TargetOperation &target, const BlockSequence &seq) {
    check_compatible(target, seq);
    PhotonNumbers p;
    p.forward = sweep(seq, target.inputs(), false).nbar;
    p.reverse = sweep(seq, target.outputs(), true).nbar;
    return p;
}

double non_leakage(const TargetOperation &target, const BlockSequence &seq) {
    check_compatible(target, seq);
    StateSet ux = apply_sequence(seq, target.inputs());
    ComplexMatrix m = target.outputs().adjoint() * ux;
    return trace_norm(m) / target.logical_dim();
}

double log_infidelity(double fidelity, bool *saturated) {
    bool sat = fidelity >= kSaturationCeiling;
    if (saturated != nullptr) {
        *saturated = sat;
    }
    return std::log(1.0 - std::min(fidelity, kSaturationCeiling));
}

ObjectiveReport total_cost(const TargetOperation &target, const BlockSequence &seq,
                           double lambda) {
    check_compatible(target, seq);
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw_config("lambda must be finite and nonnegative", "lambda");
    }
    ObjectiveReport r;
    r.lambda = lambda;
    Sweep fwd = sweep(seq, target.inputs(), false);
    Sweep rev = sweep(seq, target.outputs(), true);
    ComplexMatrix m = target.outputs().adjoint() * fwd.final_states;
    double inv_l = 1.0 / target.logical_dim();
    r.fidelity = std::abs(m.trace()) * inv_l;
    r.non_leakage = trace_norm(m) * inv_l;
    r.nbar_forward = std::move(fwd.nbar);
    r.nbar_reverse = std::move(rev.nbar);
    for (int t = 0; t < seq.size(); ++t) {
        r.photon_cost += 0.5 * (r.nbar_forward[t] + r.nbar_reverse[t]);
    }
    r.total_cost = log_infidelity(r.fidelity, &r.saturated) + lambda * r.photon_cost;
    return r;
}

}  // namespace snapseq
