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

#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "snapseq/finetuner.h"
#include "snapseq/workspace.h"

namespace snapseq {
namespace {

constexpr double kTol = 1e-10;

double max_abs(const ComplexMatrix &m) { return m.cwiseAbs().maxCoeff(); }

// Ordered product B_{hi} ... B_{lo}; identity when hi < lo.
ComplexMatrix partial_product(const BlockSequence &seq, int lo, int hi) {
    ComplexMatrix u = ComplexMatrix::Identity(seq.dim, seq.dim);
    for (int s = lo; s <= hi; ++s) {
        u = oracle::block(seq.blocks[s].alpha, seq.blocks[s].theta) * u;
    }
    return u;
}

ComplexMatrix displaced_number(const BlockSequence &seq, int s) {
    ComplexMatrix d = oracle::expm_displacement(seq.blocks[s].alpha, seq.dim);
    return d.adjoint() * oracle::number_operator(seq.dim) * d;
}

class WorkspaceTest : public ::testing::Test {
   protected:
    void SetUp() override {
        std::mt19937_64 gen(61);
        target_ = std::make_unique<TargetOperation>(oracle::random_target(gen, 16, 2, 6));
        seq_ = oracle::random_sequence(gen, 4, 16, 0.8);
        ws_ = build_workspace(*target_, seq_);
    }
    std::unique_ptr<TargetOperation> target_;
    BlockSequence seq_;
    GradientWorkspace ws_;
};

TEST_F(WorkspaceTest, RecursionsMatchClosedForms) {
    const int T = 4;
    const ComplexMatrix &v = target_->matrix();
    const double L = 2.0;
    cdouble z = hs_inner(v, oracle::product(seq_));
    EXPECT_LT(std::abs(z - ws_.overlap), kTol);
    cdouble coef = -(z / std::abs(z)) / (L - std::abs(z));
    for (int t = 0; t < T; ++t) {
        ComplexMatrix after = partial_product(seq_, t + 1, T - 1);
        ComplexMatrix before = partial_product(seq_, 0, t - 1);
        EXPECT_LT(max_abs(ws_.G[t] - coef * after.adjoint() * v * before.adjoint()), kTol) << t;
        EXPECT_LT(max_abs(ws_.rho_x[t] - before * v.adjoint() * v * before.adjoint() / L), kTol);
        EXPECT_LT(max_abs(ws_.rho_y[t] - after.adjoint() * v * v.adjoint() * after / L), kTol);
        ComplexMatrix x = ComplexMatrix::Zero(16, 16);
        for (int s = t + 1; s < T; ++s) {
            ComplexMatrix q = partial_product(seq_, t + 1, s - 1);
            x += q.adjoint() * displaced_number(seq_, s) * q;
        }
        EXPECT_LT(max_abs(ws_.X[t] - x), kTol) << t;
        ComplexMatrix y = ComplexMatrix::Zero(16, 16);
        for (int s = 0; s < t; ++s) {
            ComplexMatrix r = partial_product(seq_, s + 1, t - 1);
            y += r * displaced_number(seq_, s) * r.adjoint();
        }
        EXPECT_LT(max_abs(ws_.Y[t] - y), kTol) << t;
    }
}

TEST_F(WorkspaceTest, DensityOperatorsAreStates) {
    for (const auto *family : {&ws_.rho_x, &ws_.rho_y}) {
        for (const ComplexMatrix &rho : *family) {
            EXPECT_LT(max_abs(rho - rho.adjoint()), kTol);
            EXPECT_NEAR(rho.trace().real(), 1.0, kTol);
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
            EXPECT_GT(es.eigenvalues().minCoeff(), -kTol);
        }
    }
    EXPECT_LT(max_abs(ws_.rho_x[0] - target_->matrix().adjoint() * target_->matrix() / 2.0), kTol);
    EXPECT_LT(max_abs(ws_.rho_y[3] - target_->matrix() * target_->matrix().adjoint() / 2.0), kTol);
}

TEST_F(WorkspaceTest, PhotonAccumulatorsAreHermitian) {
    for (int t = 0; t < 4; ++t) {
        EXPECT_LT(max_abs(ws_.X[t] - ws_.X[t].adjoint()), kTol);
        EXPECT_LT(max_abs(ws_.Y[t] - ws_.Y[t].adjoint()), kTol);
    }
    EXPECT_EQ(max_abs(ws_.X[3]), 0.0);
    EXPECT_EQ(max_abs(ws_.Y[0]), 0.0);
}

TEST_F(WorkspaceTest, GradientAgreesWithStatePropagation) {
    for (double lambda : {0.0, 0.7}) {
        CostGradient a = workspace_gradient(*target_, seq_, lambda);
        CostGradient b = cost_gradient(*target_, seq_, lambda);
        EXPECT_NEAR(a.total_cost, b.total_cost, 1e-10);
        EXPECT_NEAR(a.photon_cost, b.photon_cost, 1e-10);
        for (int t = 0; t < 4; ++t) {
            EXPECT_NEAR(a.total.alpha[t], b.total.alpha[t], 1e-9);
            EXPECT_LT((a.total.theta.row(t) - b.total.theta.row(t)).cwiseAbs().maxCoeff(), 1e-9);
        }
    }
}

TEST(BlockDerivatives, MatchFiniteDifferences) {
    std::mt19937_64 gen(62);
    BlockSequence seq = oracle::random_sequence(gen, 1, 14, 1.2);
    double alpha = seq.blocks[0].alpha;
    SnapPhases theta = seq.blocks[0].theta;
    const double h = 1e-6;
    ComplexMatrix fd = (build_block(alpha + h, theta) - build_block(alpha - h, theta)) / (2 * h);
    EXPECT_LT(max_abs(block_alpha_derivative(alpha, theta) - fd), 1e-8);
    for (int n : {0, 5, 13}) {
        SnapPhases up = theta;
        SnapPhases down = theta;
        up[n] += h;
        down[n] -= h;
        ComplexMatrix fdn = (build_block(alpha, up) - build_block(alpha, down)) / (2 * h);
        EXPECT_LT(max_abs(block_theta_derivative(alpha, theta, n) - fdn), 1e-8);
    }
}

TEST(Workspace, EmptySequence) {
    TargetOperation target = logical_op_target(ComplexMatrix::Identity(2, 2), Code::Trivial, 8);
    BlockSequence empty;
    empty.dim = 8;
    GradientWorkspace ws = build_workspace(target, empty);
    EXPECT_TRUE(ws.G.empty());
    EXPECT_NEAR(ws.overlap.real(), 2.0, 1e-15);
}

}  // namespace
}  // namespace snapseq
