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

#include "snapseq/targets.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "snapseq/errors.h"
#include "snapseq/rng.h"

namespace snapseq {

namespace {

constexpr double kOrthoTol = 1e-10;

void require_unitary(const ComplexMatrix &v, const char *field) {
    if (v.rows() != v.cols() || v.rows() < 1) {
        throw_config("logical matrix must be square and nonempty", field);
    }
    if (!v.allFinite() || unitarity_error(v) > kOrthoTol) {
        throw_config("logical matrix is not unitary within 1e-10", field);
    }
}

double gram_error(const StateSet &s) {
    ComplexMatrix g = s.adjoint() * s;
    return (g - ComplexMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

void require_levels(const std::vector<int> &levels, int dim) {
    std::set<int> seen;
    for (int lv : levels) {
        if (lv < 0 || lv >= dim) {
            throw_config("Fock level " + std::to_string(lv) + " outside [0, " +
                             std::to_string(dim) + ")",
                         "levels");
        }
        if (!seen.insert(lv).second) {
            throw_config("duplicate Fock level " + std::to_string(lv), "levels");
        }
    }
}

}  // namespace

TargetOperation::TargetOperation(StateSet inputs, StateSet outputs)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
    if (inputs_.rows() != outputs_.rows() || inputs_.cols() != outputs_.cols()) {
        throw_config("input and output bases must have equal shapes", "target");
    }
    if (inputs_.rows() < 2) {
        throw_config("dimension must be at least 2", "dim");
    }
    if (inputs_.cols() < 1 || inputs_.cols() > inputs_.rows()) {
        throw_config("logical dimension must lie in [1, dim]", "target");
    }
    if (!inputs_.allFinite() || !outputs_.allFinite()) {
        throw_config("target bases contain nonfinite entries", "target");
    }
    if (gram_error(inputs_) > kOrthoTol) {
        throw_config("input basis is not orthonormal within 1e-10", "target.inputs");
    }
    if (gram_error(outputs_) > kOrthoTol) {
        throw_config("output basis is not orthonormal within 1e-10", "target.outputs");
    }
    v_ = outputs_ * inputs_.adjoint();
}

double unitarity_error(const ComplexMatrix &m) {
    return (m.adjoint() * m - ComplexMatrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

StateVector fock_state(int n, int dim) {
    if (n < 0 || n >= dim) {
        throw_config("Fock level " + std::to_string(n) + " outside truncation " +
                         std::to_string(dim),
                     "dim");
    }
    StateVector v = StateVector::Zero(dim);
    v[n] = 1.0;
    return v;
}

StateVector binomial_b0(int dim) {
    return (fock_state(0, dim) + std::sqrt(3.0) * fock_state(6, dim)) / 2.0;
}

StateVector binomial_b1(int dim) {
    return (std::sqrt(3.0) * fock_state(3, dim) + fock_state(9, dim)) / 2.0;
}

TargetOperation fock_subspace_unitary(const ComplexMatrix &v, const std::vector<int> &levels,
                                      int dim) {
    require_unitary(v, "target.matrix");
    if (static_cast<Eigen::Index>(levels.size()) != v.rows()) {
        throw_config("number of levels does not match the logical matrix", "levels");
    }
    require_levels(levels, dim);
    int n = static_cast<int>(levels.size());
    StateSet in = StateSet::Zero(dim, n);
    StateSet out = StateSet::Zero(dim, n);
    for (int k = 0; k < n; ++k) {
        in(levels[k], k) = 1.0;
        for (int m = 0; m < n; ++m) {
            out(levels[m], k) = v(m, k);
        }
    }
    return TargetOperation(std::move(in), std::move(out));
}

TargetOperation fock_subspace_unitary(const ComplexMatrix &v, int dim) {
    std::vector<int> levels(v.rows());
    std::iota(levels.begin(), levels.end(), 0);
    return fock_subspace_unitary(v, levels, dim);
}

ComplexMatrix random_unitary(int n, std::uint64_t seed) {
    if (n < 1) {
        throw_config("random_unitary needs n >= 1", "N");
    }
    Rng rng(seed);
    ComplexMatrix a(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            double re = rng.normal();
            double im = rng.normal();
            a(i, j) = cdouble(re, im);
        }
    }
    ComplexMatrix h = (a + a.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    if (solver.info() != Eigen::Success) {
        throw_numeric("random_unitary: eigensolver failed");
    }
    ComplexMatrix u = solver.eigenvectors();
    for (int j = 0; j < n; ++j) {
        Eigen::Index k = 0;
        u.col(j).cwiseAbs().maxCoeff(&k);
        cdouble pivot = u(k, j);
        u.col(j) *= std::abs(pivot) / pivot;
        u(k, j) = std::abs(u(k, j));
    }
    return u;
}

std::vector<int> random_permutation(int n, std::uint64_t seed) {
    if (n < 1) {
        throw_config("random_permutation needs n >= 1", "N");
    }
    Rng rng(seed);
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(p[i], p[j]);
    }
    return p;
}

ComplexMatrix permutation_matrix(const std::vector<int> &perm) {
    int n = static_cast<int>(perm.size());
    ComplexMatrix v = ComplexMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        if (perm[k] < 0 || perm[k] >= n) {
            throw_config("permutation entry out of range", "permutation");
        }
        v(perm[k], k) = 1.0;
    }
    return v;
}

ComplexMatrix inversion_matrix(int n) {
    std::vector<int> p(n);
    for (int k = 0; k < n; ++k) {
        p[k] = n - 1 - k;
    }
    return permutation_matrix(p);
}

ComplexMatrix block_inversion_matrix(int n) {
    std::vector<int> p(n);
    for (int k = 0; k < n; ++k) {
        p[k] = (k + n / 2) % n;
    }
    return permutation_matrix(p);
}

ComplexMatrix hadamard() {
    ComplexMatrix v(2, 2);
    v << 1.0, 1.0, 1.0, -1.0;
    return v / std::sqrt(2.0);
}

ComplexMatrix pauli_x() {
    ComplexMatrix v(2, 2);
    v << 0.0, 1.0, 1.0, 0.0;
    return v;
}

ComplexMatrix pauli_y() {
    const cdouble i(0.0, 1.0);
    ComplexMatrix v(2, 2);
    v << 0.0, -i, i, 0.0;
    return v;
}

ComplexMatrix sqrt_pauli_x() {
    const cdouble p(1.0, 1.0);
    const cdouble m(1.0, -1.0);
    ComplexMatrix v(2, 2);
    v << m, p, p, m;
    return v / 2.0;
}

cdouble odd_superposition_alpha() {
    return std::sqrt((1.0 + std::sin(0.72104)) / 2.0);
}

cdouble odd_superposition_beta() {
    return std::sqrt((1.0 - std::sin(0.72104)) / 2.0) * std::polar(1.0, -1.27275);
}

TargetOperation state_prep_target(cdouble alpha, cdouble beta, int dim) {
    double norm2 = std::norm(alpha) + std::norm(beta);
    if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > 1e-10) {
        throw_config("state coefficients must satisfy |alpha|^2 + |beta|^2 = 1", "target");
    }
    StateSet in = fock_state(0, dim);
    StateSet out = alpha * binomial_b0(dim) + beta * binomial_b1(dim);
    return TargetOperation(std::move(in), std::move(out));
}

StateVector decayed_state(Syndrome syndrome, cdouble alpha, cdouble beta, DecayParams decay,
                          int dim) {
    double g = decay.gamma_t;
    if (!std::isfinite(g) || g < 0.0) {
        throw_config("gamma_t must be finite and nonnegative", "gamma_t");
    }
    auto e = [g](double k) { return std::exp(-k * g); };
    StateVector zero_part = StateVector::Zero(dim);
    StateVector one_part = StateVector::Zero(dim);
    double n0 = 0.0;
    double n1 = 0.0;
    switch (syndrome) {
        case Syndrome::Identity:
            zero_part = fock_state(0, dim) + std::sqrt(3.0) * e(6) * fock_state(6, dim);
            one_part = std::sqrt(3.0) * e(3) * fock_state(3, dim) + e(9) * fock_state(9, dim);
            n0 = 1.0 + 3.0 * e(12);
            n1 = 3.0 * e(6) + e(18);
            break;
        case Syndrome::A:
            zero_part = std::sqrt(2.0) * e(3) * fock_state(5, dim);
            one_part = fock_state(2, dim) + e(6) * fock_state(8, dim);
            n0 = 2.0 * e(6);
            n1 = 1.0 + e(12);
            break;
        case Syndrome::A2:
            zero_part = std::sqrt(5.0) * e(3) * fock_state(4, dim);
            one_part = fock_state(1, dim) + 2.0 * e(6) * fock_state(7, dim);
            n0 = 5.0 * e(6);
            n1 = 1.0 + 4.0 * e(12);
            break;
    }
    double norm = std::sqrt(std::norm(alpha) * n0 + std::norm(beta) * n1);
    return (alpha * zero_part + beta * one_part) / norm;
}

TargetOperation recovery_target(Syndrome syndrome, DecayParams decay, int dim) {
    StateSet in(dim, 2);
    in.col(0) = decayed_state(syndrome, 1.0, 0.0, decay, dim);
    in.col(1) = decayed_state(syndrome, 0.0, 1.0, decay, dim);
    StateSet out(dim, 2);
    out.col(0) = binomial_b0(dim);
    out.col(1) = binomial_b1(dim);
    return TargetOperation(std::move(in), std::move(out));
}

TargetOperation logical_op_target(const ComplexMatrix &v, Code code, int dim) {
    if (v.rows() != 2 || v.cols() != 2) {
        throw_config("logical operation must be a 2x2 matrix", "target.matrix");
    }
    require_unitary(v, "target.matrix");
    StateSet words(dim, 2);
    if (code == Code::Binomial) {
        words.col(0) = binomial_b0(dim);
        words.col(1) = binomial_b1(dim);
    } else {
        words.col(0) = fock_state(0, dim);
        words.col(1) = fock_state(1, dim);
    }
    StateSet out = words * v;
    return TargetOperation(words, std::move(out));
}

}  // namespace snapseq
