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

#ifndef SNAPSEQ_WORKSPACE_H
#define SNAPSEQ_WORKSPACE_H

#include <vector>

#include "snapseq/finetuner.h"
#include "snapseq/fock_linalg.h"
#include "snapseq/targets.h"

namespace snapseq {

/// Operator-level adjoints for the gradient of ln(1 - F) and of the photon
/// cost. Index t refers to block t (0-based); all matrices are dim x dim.
///
///   G[t]     = -(z / |z|) B_{t+1}...B_{T-1} V B_0^dag...B_{t-1}^dag / (L - |z|),
///              with z = tr[V^dag U]; G[t+1] = B_{t+1} G[t] B_t^dag
///   rho_x[t] = B_{t-1}...B_0 (V^dag V / L) B_0^dag...B_{t-1}^dag
///   rho_y[t] = B_{t+1}^dag...B_{T-1}^dag (V V^dag / L) B_{T-1}...B_{t+1}
///   X[t]     = sum_{s>t} A^dag D_s^dag n D_s A,  A = B_{s-1}...B_{t+1}
///   Y[t]     = sum_{s<t} A D_s^dag n D_s A^dag,  A = B_{t-1}...B_{s+1}
struct GradientWorkspace {
    std::vector<ComplexMatrix> G;
    std::vector<ComplexMatrix> rho_x;
    std::vector<ComplexMatrix> rho_y;
    std::vector<ComplexMatrix> X;
    std::vector<ComplexMatrix> Y;
    cdouble overlap;
    bool saturated = false;
};

/// Fills every list with O(T) matrix products.
GradientWorkspace build_workspace(const TargetOperation &target, const BlockSequence &seq);

/// dB/dalpha = B K - K B for block (alpha, theta).
ComplexMatrix block_alpha_derivative(double alpha, const SnapPhases &theta);
/// dB/dtheta_n = i e^{i theta_n} D^dag |n><n| D.
ComplexMatrix block_theta_derivative(double alpha, const SnapPhases &theta, int n);

/// Gradients from the workspace contractions
///   d ln(1 - F) = Re<G_t, dB>,
///   d sum nbar  = Re<2 X_t B_t rho_x_t, dB> + Re<2 rho_x_t, D^dag n K D>,
///   d sum nbar' = Re<2 rho_y_t B_t Y_t, dB> + Re<2 rho_y_t, D^dag n K D>.
/// Slower than cost_gradient; kept as an independent route.
CostGradient workspace_gradient(const TargetOperation &target, const BlockSequence &seq,
                                double lambda);

}  // namespace snapseq

#endif
