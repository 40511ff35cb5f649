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

#include "snapseq/workspace.h"

#include <cmath>

#include "snapseq/objectives.h"

namespace snapseq {

namespace {

const cdouble kI(0.0, 1.0);

ComplexMatrix generator(int dim) {
    ComplexMatrix a = annihilation(dim);
    return a.adjoint() - a;
}

ComplexMatrix number_operator(int dim) {
    return number_diagonal(dim).cast<cdouble>().asDiagonal();
}

}  // namespace

ComplexMatrix block_alpha_derivative(double alpha, const SnapPhases &theta) {
    int dim = static_cast<int>(theta.size());
    ComplexMatrix b = build_block(alpha, theta);
    ComplexMatrix k = generator(dim);
    return b * k - k * b;
}

ComplexMatrix block_theta_derivative(double alpha, const SnapPhases &theta, int n) {
    int dim = static_cast<int>(theta.size());
    ComplexMatrix d = displacement_basis(dim).matrix(alpha);
    return kI * std::polar(1.0, theta[n]) * d.row(n).adjoint() * d.row(n);
}

GradientWorkspace build_workspace(const TargetOperation &target, const BlockSequence &seq) {
    check_compatible(target, seq);
    const int T = seq.size();
    const int dim = seq.dim;
    const double L = target.logical_dim();
    const DisplacementBasis &basis = displacement_basis(dim);
    const ComplexMatrix number = number_operator(dim);
    const ComplexMatrix &v = target.matrix();

    std::vector<ComplexMatrix> b(T);
    std::vector<ComplexMatrix> dnd(T);
    for (int t = 0; t < T; ++t) {
        ComplexMatrix d = basis.matrix(seq.blocks[t].alpha);
        b[t] = build_block(seq.blocks[t].alpha, seq.blocks[t].theta);
        dnd[t] = d.adjoint() * number * d;
    }

    GradientWorkspace ws;
    ws.G.resize(T);
    ws.rho_x.resize(T);
    ws.rho_y.resize(T);
    ws.X.resize(T);
    ws.Y.resize(T);
    ws.overlap = hs_inner(v, sequence_unitary(seq));
    if (T == 0) {
        return ws;
    }

    double absz = std::abs(ws.overlap);
    log_infidelity(absz / L, &ws.saturated);
    cdouble phase = absz > 0.0 ? ws.overlap / absz : cdouble(1.0, 0.0);
    cdouble coef = ws.saturated ? cdouble(0.0, 0.0) : -phase / (L - absz);

    ComplexMatrix tail = v;
    for (int t = T - 1; t >= 1; --t) {
        tail = b[t].adjoint() * tail;
    }
    ws.G[0] = coef * tail;
    ws.rho_x[0] = v.adjoint() * v / L;
    ws.Y[0] = ComplexMatrix::Zero(dim, dim);
    for (int t = 0; t + 1 < T; ++t) {
        ws.G[t + 1] = b[t + 1] * ws.G[t] * b[t].adjoint();
        ws.rho_x[t + 1] = b[t] * ws.rho_x[t] * b[t].adjoint();
        ws.Y[t + 1] = b[t] * ws.Y[t] * b[t].adjoint() + dnd[t];
    }
    ws.rho_y[T - 1] = v * v.adjoint() / L;
    ws.X[T - 1] = ComplexMatrix::Zero(dim, dim);
    for (int t = T - 1; t >= 1; --t) {
        ws.rho_y[t - 1] = b[t].adjoint() * ws.rho_y[t] * b[t];
        ws.X[t - 1] = b[t].adjoint() * ws.X[t] * b[t] + dnd[t];
    }
    return ws;
}

CostGradient workspace_gradient(const TargetOperation &target, const BlockSequence &seq,
                                double lambda) {
    GradientWorkspace ws = build_workspace(target, seq);
    const int T = seq.size();
    const int dim = seq.dim;
    const DisplacementBasis &basis = displacement_basis(dim);
    const ComplexMatrix number = number_operator(dim);
    const ComplexMatrix k = generator(dim);

    CostGradient out;
    out.overlap = Gradient::zero(T, dim);
    out.photon = Gradient::zero(T, dim);
    out.fidelity = std::abs(ws.overlap) / target.logical_dim();
    double log_term = log_infidelity(out.fidelity, &out.saturated);

    for (int t = 0; t < T; ++t) {
        const Block &blk = seq.blocks[t];
        ComplexMatrix d = basis.matrix(blk.alpha);
        ComplexMatrix b = build_block(blk.alpha, blk.theta);
        ComplexMatrix db_alpha = b * k - k * b;
        ComplexMatrix photon_adj = ws.X[t] * b * ws.rho_x[t] + ws.rho_y[t] * b * ws.Y[t];
        ComplexMatrix direct_op = d.adjoint() * number * k * d;

        out.overlap.alpha[t] = std::real(hs_inner(ws.G[t], db_alpha));
        out.photon.alpha[t] = std::real(hs_inner(photon_adj, db_alpha)) +
                              std::real(hs_inner(ws.rho_x[t] + ws.rho_y[t], direct_op));
        // <M, i e^{i theta_n} D^dag|n><n|D> = i e^{i theta_n} (D M^dag D^dag)_nn.
        Eigen::VectorXcd g_diag = (d * ws.G[t].adjoint() * d.adjoint()).diagonal();
        Eigen::VectorXcd p_diag = (d * photon_adj.adjoint() * d.adjoint()).diagonal();
        for (int n = 0; n < dim; ++n) {
            cdouble factor = kI * std::polar(1.0, blk.theta[n]);
            out.overlap.theta(t, n) = std::real(factor * g_diag[n]);
            out.photon.theta(t, n) = std::real(factor * p_diag[n]);
        }
        out.photon_cost += 0.5 * std::real(hs_inner(ws.rho_x[t] + ws.rho_y[t], d.adjoint() * number * d));
    }
    out.total_cost = log_term + lambda * out.photon_cost;
    out.total = out.overlap;
    out.total += out.photon.scaled(lambda);
    return out;
}

}  // namespace snapseq
