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

#include "snapseq/fock_linalg.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "snapseq/errors.h"

namespace snapseq {

namespace {

constexpr double kPi = std::numbers::pi;

void require_dim(int dim) {
    if (dim < 2) {
        throw_config("dimension must be at least 2, got " + std::to_string(dim), "dim");
    }
}

void require_finite(const SnapPhases &theta) {
    if (!theta.allFinite()) {
        throw_config("SNAP phases must be finite", "theta");
    }
}

}  // namespace

void BlockSequence::validate() const {
    require_dim(dim);
    for (int t = 0; t < size(); ++t) {
        const Block &b = blocks[t];
        std::string where = "blocks[" + std::to_string(t) + "]";
        if (!std::isfinite(b.alpha)) {
            throw_config("alpha is not finite", where + ".alpha");
        }
        if (b.theta.size() != dim) {
            throw_config("theta has length " + std::to_string(b.theta.size()) + ", expected " +
                             std::to_string(dim),
                         where + ".theta");
        }
        if (!b.theta.allFinite()) {
            throw_config("theta contains nonfinite entries", where + ".theta");
        }
    }
}

double max_safe_alpha(int dim) {
    return 0.6 * std::sqrt(static_cast<double>(dim));
}

int reliable_levels(int dim, double alpha) {
    int k = dim - 8 * static_cast<int>(std::ceil(alpha * alpha)) - 8;
    return k < 0 ? 0 : k;
}

DisplacementBasis::DisplacementBasis(int dim) : dim_(dim) {
    require_dim(dim);
    // H0 = i (a - a^dag) is Hermitian and K = a^dag - a = i H0.
    ComplexMatrix a = annihilation(dim);
    ComplexMatrix h0 = cdouble(0.0, 1.0) * (a - a.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h0);
    if (solver.info() != Eigen::Success) {
        throw_numeric("eigendecomposition of the displacement generator failed");
    }
    vectors_ = solver.eigenvectors();
    values_ = solver.eigenvalues();
}

Eigen::VectorXcd DisplacementBasis::phases(double alpha) const {
    Eigen::VectorXcd e(dim_);
    for (int k = 0; k < dim_; ++k) {
        e[k] = std::polar(1.0, alpha * values_[k]);
    }
    return e;
}

ComplexMatrix DisplacementBasis::matrix(double alpha) const {
    return vectors_ * phases(alpha).asDiagonal() * vectors_.adjoint();
}

StateSet DisplacementBasis::apply(double alpha, const StateSet &states) const {
    StateSet eig = vectors_.adjoint() * states;
    eig = phases(alpha).asDiagonal() * eig;
    return vectors_ * eig;
}

const DisplacementBasis &displacement_basis(int dim) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<DisplacementBasis>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto &slot = cache[dim];
    if (!slot) {
        slot = std::make_unique<DisplacementBasis>(dim);
    }
    return *slot;
}

ComplexMatrix annihilation(int dim) {
    ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

Eigen::VectorXd number_diagonal(int dim) {
    return Eigen::VectorXd::LinSpaced(dim, 0.0, static_cast<double>(dim - 1));
}

ComplexMatrix build_displacement(double alpha, int dim, TruncationPolicy policy) {
    if (!std::isfinite(alpha)) {
        throw_config("displacement amplitude is not finite", "alpha");
    }
    require_dim(dim);
    if (std::abs(alpha) > max_safe_alpha(dim)) {
        std::string msg = "|alpha| = " + std::to_string(std::abs(alpha)) +
                          " exceeds the safe bound " + std::to_string(max_safe_alpha(dim)) +
                          " for dim " + std::to_string(dim);
        if (policy == TruncationPolicy::Throw) {
            throw_config(msg, "alpha");
        }
        if (policy == TruncationPolicy::Warn) {
            std::cerr << "warning: " << msg << "\n";
        }
    }
    return displacement_basis(dim).matrix(alpha);
}

ComplexMatrix build_displacement_complex(cdouble beta, int dim) {
    if (!std::isfinite(beta.real()) || !std::isfinite(beta.imag())) {
        throw_config("displacement amplitude is not finite", "alpha");
    }
    require_dim(dim);
    ComplexMatrix a = annihilation(dim);
    // exp(G) with G = beta a^dag - conj(beta) a = i H, H = i (conj(beta) a - beta a^dag).
    ComplexMatrix h = cdouble(0.0, 1.0) * (std::conj(beta) * a - beta * a.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    if (solver.info() != Eigen::Success) {
        throw_numeric("eigendecomposition of the displacement generator failed");
    }
    Eigen::VectorXcd e(dim);
    for (int k = 0; k < dim; ++k) {
        e[k] = std::polar(1.0, solver.eigenvalues()[k]);
    }
    const ComplexMatrix &w = solver.eigenvectors();
    return w * e.asDiagonal() * w.adjoint();
}

ComplexMatrix build_snap(const SnapPhases &theta) {
    require_finite(theta);
    require_dim(static_cast<int>(theta.size()));
    Eigen::VectorXcd diag(theta.size());
    for (Eigen::Index n = 0; n < theta.size(); ++n) {
        diag[n] = std::polar(1.0, theta[n]);
    }
    return diag.asDiagonal();
}

ComplexMatrix build_block(double alpha, const SnapPhases &theta) {
    require_finite(theta);
    int dim = static_cast<int>(theta.size());
    ComplexMatrix d = build_displacement(alpha, dim);
    return d.adjoint() * build_snap(theta) * d;
}

SnapPhases rotation_phases(double phi, int dim) {
    return phi * number_diagonal(dim);
}

double wrap_phase(double x) {
    double y = std::remainder(x, 2.0 * kPi);  // [-pi, pi]
    if (y <= -kPi) {
        y += 2.0 * kPi;
    }
    return y;
}

SnapPhases canonical_phases(const SnapPhases &theta) {
    return theta.unaryExpr([](double x) { return wrap_phase(x); });
}

cdouble hs_inner(const ComplexMatrix &a, const ComplexMatrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw_config("hs_inner: dimension mismatch");
    }
    return a.conjugate().cwiseProduct(b).sum();
}

double trace_norm(const ComplexMatrix &a) {
    if (!a.allFinite()) {
        throw_numeric("trace_norm: matrix has nonfinite entries");
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(a);
    if (svd.info() != Eigen::Success) {
        throw_numeric("trace_norm: SVD did not converge for a " + std::to_string(a.rows()) +
                      "x" + std::to_string(a.cols()) + " matrix");
    }
    return svd.singularValues().sum();
}

namespace {

StateSet propagate(const BlockSequence &seq, const StateSet &states, bool inverse) {
    if (states.rows() != seq.dim) {
        throw_config("state dimension " + std::to_string(states.rows()) +
                     " does not match sequence dimension " + std::to_string(seq.dim));
    }
    if (seq.empty()) {
        return states;
    }
    const DisplacementBasis &basis = displacement_basis(seq.dim);
    const ComplexMatrix &w = basis.eigenvectors();
    double sign = inverse ? -1.0 : 1.0;
    StateSet eig = w.adjoint() * states;
    int T = seq.size();
    for (int k = 0; k < T; ++k) {
        const Block &b = seq.blocks[inverse ? T - 1 - k : k];
        Eigen::VectorXcd e = basis.phases(b.alpha);
        StateSet fock = w * (e.asDiagonal() * eig);
        for (int n = 0; n < seq.dim; ++n) {
            fock.row(n) *= std::polar(1.0, sign * b.theta[n]);
        }
        eig.noalias() = e.conjugate().asDiagonal() * (w.adjoint() * fock);
    }
    return w * eig;
}

}  // namespace

StateSet apply_sequence(const BlockSequence &seq, const StateSet &states) {
    return propagate(seq, states, false);
}

StateSet apply_inverse_sequence(const BlockSequence &seq, const StateSet &states) {
    return propagate(seq, states, true);
}

StateVector apply_sequence(const BlockSequence &seq, const StateVector &psi) {
    StateSet in = psi;
    return apply_sequence(seq, in).col(0);
}

ComplexMatrix sequence_unitary(const BlockSequence &seq) {
    return apply_sequence(seq, StateSet(ComplexMatrix::Identity(seq.dim, seq.dim)));
}

Eigen::MatrixXd wigner_grid(const StateVector &psi, Interval x_range, Interval p_range,
                            int resolution) {
    if (resolution < 2) {
        throw_config("wigner resolution must be at least 2", "resolution");
    }
    if (!(x_range.hi > x_range.lo) || !(p_range.hi > p_range.lo)) {
        throw_config("wigner ranges must be nonempty intervals", "range");
    }
    double norm = psi.norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-6) {
        throw_config("wigner_grid expects a normalized state", "psi");
    }
    // Work in a padded space so every displaced copy of psi stays on the
    // reliable sub-block of the truncated displacement.
    double reach = std::hypot(std::max(std::abs(x_range.lo), std::abs(x_range.hi)),
                              std::max(std::abs(p_range.lo), std::abs(p_range.hi))) /
                   std::numbers::sqrt2;
    int src_dim = static_cast<int>(psi.size());
    int dim = src_dim + 8 * static_cast<int>(std::ceil(reach * reach)) + 8;
    const DisplacementBasis &basis = displacement_basis(dim);
    const ComplexMatrix &w = basis.eigenvectors();
    Eigen::VectorXd parity(dim);
    for (int n = 0; n < dim; ++n) {
        parity[n] = (n % 2 == 0) ? 1.0 : -1.0;
    }

    Eigen::MatrixXd out(resolution, resolution);
    StateSet columns(dim, resolution);
    Eigen::MatrixXcd phase(dim, resolution);
    for (int i = 0; i < resolution; ++i) {
        double x = x_range.lo + (x_range.hi - x_range.lo) * i / (resolution - 1);
        for (int j = 0; j < resolution; ++j) {
            double p = p_range.lo + (p_range.hi - p_range.lo) * j / (resolution - 1);
            cdouble beta = cdouble(x, p) / std::numbers::sqrt2;
            double r = std::abs(beta);
            double phi = std::arg(beta);
            // D^dag(beta) = S(theta_rot(phi)) D(-r) S(-theta_rot(phi)); the leading SNAP
            // drops out of the parity expectation.
            columns.col(j).setZero();
            for (int n = 0; n < src_dim; ++n) {
                columns(n, j) = psi[n] * std::polar(1.0, -phi * n);
            }
            phase.col(j) = basis.phases(-r);
        }
        StateSet shifted = w * phase.cwiseProduct(w.adjoint() * columns);
        for (int j = 0; j < resolution; ++j) {
            out(i, j) = parity.dot(shifted.col(j).cwiseAbs2()) / std::numbers::pi;
        }
    }
    return out;
}

}  // namespace snapseq
