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

#ifndef SNAPSEQ_TARGETS_H
#define SNAPSEQ_TARGETS_H

#include <cstdint>
#include <vector>

#include "snapseq/fock_linalg.h"

namespace snapseq {

/// Isometry V = sum_l |y_l><x_l| from an L-dimensional input space to an
/// output space of the same dimension.
class TargetOperation {
   public:
    /// Columns of `inputs` and `outputs` are the bases {|x_l>} and {|y_l>};
    /// both must be orthonormal within 1e-10.
    TargetOperation(StateSet inputs, StateSet outputs);

    int dim() const { return static_cast<int>(inputs_.rows()); }
    int logical_dim() const { return static_cast<int>(inputs_.cols()); }
    const StateSet &inputs() const { return inputs_; }
    const StateSet &outputs() const { return outputs_; }
    const ComplexMatrix &matrix() const { return v_; }

   private:
    StateSet inputs_;
    StateSet outputs_;
    ComplexMatrix v_;
};

struct DecayParams {
    double gamma_t = 0.02;  // dimensionless product Gamma * t
};

enum class Syndrome { Identity, A, A2 };
enum class Code { Binomial, Trivial };

/// Max-norm deviation of m^dag m from the identity.
double unitarity_error(const ComplexMatrix &m);

StateVector fock_state(int n, int dim);
/// Binomial (kitten) codewords (|0> + sqrt3 |6>)/2 and (sqrt3 |3> + |9>)/2.
StateVector binomial_b0(int dim);
StateVector binomial_b1(int dim);

/// Target acting as the unitary v on the Fock levels `levels`:
/// V = sum_{mn} v_{mn} |levels[m]><levels[n]|.
TargetOperation fock_subspace_unitary(const ComplexMatrix &v, const std::vector<int> &levels,
                                      int dim);
/// Convenience: levels 0..v.rows()-1.
TargetOperation fock_subspace_unitary(const ComplexMatrix &v, int dim);

/// Eigenvectors of a random Hermitian matrix with independent standard-normal
/// real and imaginary parts (symmetrized). Each eigenvector is rescaled so its
/// largest-magnitude entry is real positive.
ComplexMatrix random_unitary(int n, std::uint64_t seed);
/// Uniformly random permutation of 0..n-1 (Fisher-Yates).
std::vector<int> random_permutation(int n, std::uint64_t seed);
/// v_{p(n), n} = 1.
ComplexMatrix permutation_matrix(const std::vector<int> &perm);
/// |N-1-n><n|.
ComplexMatrix inversion_matrix(int n);
/// |mod(n + N/2, N)><n|.
ComplexMatrix block_inversion_matrix(int n);

ComplexMatrix hadamard();
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix sqrt_pauli_x();

/// Coefficients of the "odd superposition" preparation target.
cdouble odd_superposition_alpha();
cdouble odd_superposition_beta();

/// |0> -> alpha |b0> + beta |b1>.
TargetOperation state_prep_target(cdouble alpha, cdouble beta, int dim = kDefaultDim);

/// Normalized binomial-code state alpha|b0> + beta|b1> after amplitude decay
/// over gamma_t, conditioned on the given photon-loss syndrome.
StateVector decayed_state(Syndrome syndrome, cdouble alpha, cdouble beta, DecayParams decay,
                          int dim);

/// Maps the two decayed logical states of a syndrome back onto |b0>, |b1>.
TargetOperation recovery_target(Syndrome syndrome, DecayParams decay, int dim = kDefaultDim);

/// Logical unitary v (2x2) on the chosen two-level code.
TargetOperation logical_op_target(const ComplexMatrix &v, Code code, int dim = kDefaultDim);

}  // namespace snapseq

#endif
