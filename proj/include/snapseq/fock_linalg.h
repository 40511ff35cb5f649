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

#ifndef SNAPSEQ_FOCK_LINALG_H
#define SNAPSEQ_FOCK_LINALG_H

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace snapseq {

using cdouble = std::complex<double>;

/// Operator on the truncated Fock space spanned by |0>, ..., |dim-1>.
using ComplexMatrix = Eigen::MatrixXcd;
/// Single state; amplitudes in the Fock basis.
using StateVector = Eigen::VectorXcd;
/// Several states stored as columns (dim x L).
using StateSet = Eigen::MatrixXcd;
/// One SNAP phase per Fock level, in radians.
using SnapPhases = Eigen::VectorXd;

inline constexpr int kDefaultDim = 100;

/// What build_displacement does when |alpha| exceeds the safe amplitude.
enum class TruncationPolicy { Ignore, Warn, Throw };

/// Building block D^dag(alpha) S(theta) D(alpha).
struct Block {
    double alpha = 0.0;
    SnapPhases theta;
};

/// Sequence of building blocks; blocks[0] acts first.
struct BlockSequence {
    int dim = kDefaultDim;
    std::vector<Block> blocks;

    int size() const { return static_cast<int>(blocks.size()); }
    bool empty() const { return blocks.empty(); }

    /// Throws a config error when a phase vector has the wrong length or a
    /// parameter is not finite.
    void validate() const;
};

/// Largest |alpha| considered safe for the given truncation (6 at dim 100).
double max_safe_alpha(int dim);

/// Number of low Fock levels on which a displacement by alpha is trusted:
/// dim - 8 ceil(alpha^2) - 8, clamped at zero.
int reliable_levels(int dim, double alpha);

/// Cached spectral decomposition of the displacement generator K = a^dag - a.
///
/// K = W diag(i lambda) W^dag, so D(alpha) = exp(alpha K) = W diag(e^{i alpha lambda}) W^dag
/// for every real alpha. Applying D to a state costs two dense mat-vecs.
class DisplacementBasis {
   public:
    explicit DisplacementBasis(int dim);

    int dim() const { return dim_; }
    const ComplexMatrix &eigenvectors() const { return vectors_; }
    const Eigen::VectorXd &eigenvalues() const { return values_; }

    /// e^{i alpha lambda_k}: D(alpha) in eigen coordinates.
    Eigen::VectorXcd phases(double alpha) const;
    ComplexMatrix matrix(double alpha) const;
    StateSet apply(double alpha, const StateSet &states) const;

   private:
    int dim_;
    ComplexMatrix vectors_;
    Eigen::VectorXd values_;
};

/// Shared, lazily built basis for a dimension. Safe to call from any thread.
const DisplacementBasis &displacement_basis(int dim);

/// Annihilation operator truncated to dim levels.
ComplexMatrix annihilation(int dim);
/// Diagonal of the number operator: 0, 1, ..., dim-1.
Eigen::VectorXd number_diagonal(int dim);

ComplexMatrix build_displacement(double alpha, int dim,
                                 TruncationPolicy policy = TruncationPolicy::Warn);
/// exp(beta a^dag - conj(beta) a) for complex beta from its own Hermitian
/// eigendecomposition. Slow; intended for checks and one-off use.
ComplexMatrix build_displacement_complex(cdouble beta, int dim);
ComplexMatrix build_snap(const SnapPhases &theta);
ComplexMatrix build_block(double alpha, const SnapPhases &theta);

/// theta_rot(phi): phase n*phi on level n.
SnapPhases rotation_phases(double phi, int dim);
/// Wraps every entry into (-pi, pi].
SnapPhases canonical_phases(const SnapPhases &theta);
double wrap_phase(double x);

/// tr[a^dag b] without forming the product.
cdouble hs_inner(const ComplexMatrix &a, const ComplexMatrix &b);
/// Sum of singular values.
double trace_norm(const ComplexMatrix &a);

/// B_T ... B_1 |psi> with matrix-vector products only.
StateVector apply_sequence(const BlockSequence &seq, const StateVector &psi);
StateSet apply_sequence(const BlockSequence &seq, const StateSet &states);
/// (B_T ... B_1)^dag applied to each column.
StateSet apply_inverse_sequence(const BlockSequence &seq, const StateSet &states);
/// Full product B_T ... B_1 as a dim x dim matrix.
ComplexMatrix sequence_unitary(const BlockSequence &seq);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wigner function W(x, p) of a pure state on a resolution x resolution grid
/// (row = x index, column = p index, both ranges inclusive). Normalized so
/// that the integral over dx dp is one and the vacuum gives 1/pi at the origin.
Eigen::MatrixXd wigner_grid(const StateVector &psi, Interval x_range, Interval p_range,
                            int resolution);

}  // namespace snapseq

#endif
