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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "snapseq/errors.h"
#include "snapseq/objectives.h"

namespace snapseq {
namespace {

StateSet fock_column(int n, int dim) {
    StateSet s = StateSet::Zero(dim, 1);
    s(n, 0) = 1.0;
    return s;
}

BlockSequence single_block(double alpha, int dim) {
    BlockSequence seq;
    seq.dim = dim;
    seq.blocks.push_back(Block{alpha, SnapPhases::Zero(dim)});
    return seq;
}

BlockSequence inverse_of(const BlockSequence &seq) {
    BlockSequence inv;
    inv.dim = seq.dim;
    for (auto it = seq.blocks.rbegin(); it != seq.blocks.rend(); ++it) {
        inv.blocks.push_back(Block{it->alpha, -it->theta});
    }
    return inv;
}

TEST(Fidelity, TrivialCases) {
    TargetOperation id = logical_op_target(ComplexMatrix::Identity(2, 2), Code::Trivial, 10);
    BlockSequence empty;
    empty.dim = 10;
    EXPECT_NEAR(fidelity(id, empty), 1.0, 1e-15);
    TargetOperation flip(fock_column(0, 10), fock_column(1, 10));
    EXPECT_NEAR(fidelity(flip, empty), 0.0, 1e-15);
}

TEST(Fidelity, MatchesTraceOfOracleProduct) {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 5; ++trial) {
        TargetOperation t = oracle::random_target(gen, 24, 1 + trial % 2, 6);
        BlockSequence seq = oracle::random_sequence(gen, 3, 24, 1.0);
        ComplexMatrix u = oracle::product(seq);
        ComplexMatrix v = t.outputs() * t.inputs().adjoint();
        double expected = std::abs((v.adjoint() * u).trace()) / t.logical_dim();
        EXPECT_NEAR(fidelity(t, seq), expected, 1e-12);
    }
}

TEST(Fidelity, MonteCarloAverageOverLogicalStates) {
    std::mt19937_64 gen(22);
    TargetOperation t = oracle::random_target(gen, 20, 2, 6);
    BlockSequence seq = oracle::random_sequence(gen, 2, 20, 1.0);
    StateSet ux = apply_sequence(seq, t.inputs());
    ComplexMatrix m = t.outputs().adjoint() * ux;  // <y_j|U|x_k>
    cdouble phase = std::polar(1.0, -std::arg(m.trace()));
    std::normal_distribution<double> g;
    const int samples = 20000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int s = 0; s < samples; ++s) {
        Eigen::Vector2cd c(cdouble(g(gen), g(gen)), cdouble(g(gen), g(gen)));
        c.normalize();
        double val = (phase * c.dot(m * c)).real();
        sum += val;
        sum2 += val * val;
    }
    double mean = sum / samples;
    double se = std::sqrt((sum2 / samples - mean * mean) / samples);
    EXPECT_LT(std::abs(mean - fidelity(t, seq)), 3.0 * se);
}

TEST(Fidelity, GlobalPhaseInvariance) {
    std::mt19937_64 gen(23);
    TargetOperation t = oracle::random_target(gen, 20, 2, 6);
    BlockSequence seq = oracle::random_sequence(gen, 3, 20, 1.0);
    double f = fidelity(t, seq);
    seq.blocks.back().theta.array() += 0.731;
    EXPECT_NEAR(fidelity(t, seq), f, 1e-12);
}

TEST(Fidelity, RejectsDimensionMismatch) {
    std::mt19937_64 gen(24);
    TargetOperation t = oracle::random_target(gen, 20, 2, 6);
    BlockSequence seq = oracle::random_sequence(gen, 1, 21, 1.0);
    EXPECT_THROW(fidelity(t, seq), SnapError);
    EXPECT_THROW(photon_numbers(t, seq), SnapError);
    EXPECT_THROW(total_cost(t, seq, 0.1), SnapError);
}

TEST(PhotonNumbers, VacuumAndCoherentState) {
    TargetOperation t(fock_column(0, 40), fock_column(0, 40));
    PhotonNumbers p0 = photon_numbers(t, single_block(0.0, 40));
    EXPECT_NEAR(p0.forward[0], 0.0, 1e-14);
    PhotonNumbers p1 = photon_numbers(t, single_block(1.0, 40));
    EXPECT_NEAR(p1.forward[0], 1.0, 1e-12);
    EXPECT_NEAR(p1.reverse[0], 1.0, 1e-12);
}

TEST(PhotonNumbers, MatchHilbertSchmidtForm) {
    std::mt19937_64 gen(25);
    for (int trial = 0; trial < 6; ++trial) {
        int L = 1 + trial % 2;
        TargetOperation t = oracle::random_target(gen, 20, L, 5);
        BlockSequence seq = oracle::random_sequence(gen, 1 + trial % 4, 20, 1.0);
        PhotonNumbers p = photon_numbers(t, seq);
        PhotonNumbers hs = oracle::hs_photon_numbers(t, seq);
        for (int k = 0; k < seq.size(); ++k) {
            EXPECT_NEAR(p.forward[k], hs.forward[k], 1e-10);
            EXPECT_NEAR(p.reverse[k], hs.reverse[k], 1e-10);
        }
    }
}

TEST(PhotonNumbers, IndependentOfOwnSnap) {
    std::mt19937_64 gen(26);
    TargetOperation t = oracle::random_target(gen, 24, 2, 6);
    BlockSequence seq = oracle::random_sequence(gen, 3, 24, 1.0);
    PhotonNumbers p = photon_numbers(t, seq);
    seq.blocks[1].theta = oracle::random_sequence(gen, 1, 24, 1.0).blocks[0].theta;
    PhotonNumbers q = photon_numbers(t, seq);
    EXPECT_NEAR(p.forward[1], q.forward[1], 1e-12);
    EXPECT_NEAR(p.reverse[1], q.reverse[1], 1e-12);
}

TEST(PhotonNumbers, ReverseIsForwardOfInverseProblem) {
    std::mt19937_64 gen(27);
    TargetOperation t = fock_subspace_unitary(random_unitary(4, 9), 24);
    BlockSequence seq = oracle::random_sequence(gen, 4, 24, 1.0);
    TargetOperation inv_target(t.outputs(), t.inputs());
    PhotonNumbers p = photon_numbers(t, seq);
    PhotonNumbers q = photon_numbers(inv_target, inverse_of(seq));
    for (int k = 0; k < seq.size(); ++k) {
        EXPECT_NEAR(q.forward[k], p.reverse[seq.size() - 1 - k], 1e-10);
        EXPECT_NEAR(q.reverse[k], p.forward[seq.size() - 1 - k], 1e-10);
    }
}

TEST(TotalCost, LogOfInfidelity) {
    double c = 1.0 - std::exp(-1.0);
    StateSet y = StateSet::Zero(10, 1);
    y(0, 0) = c;
    y(1, 0) = std::sqrt(1.0 - c * c);
    TargetOperation t(fock_column(0, 10), y);
    BlockSequence empty;
    empty.dim = 10;
    ObjectiveReport r = total_cost(t, empty, 0.0);
    EXPECT_NEAR(r.total_cost, -1.0, 1e-12);
    EXPECT_FALSE(r.saturated);
}

TEST(TotalCost, InternalConsistency) {
    std::mt19937_64 gen(28);
    TargetOperation t = oracle::random_target(gen, 24, 2, 6);
    BlockSequence seq = oracle::random_sequence(gen, 3, 24, 1.0);
    ObjectiveReport r = total_cost(t, seq, 0.6);
    PhotonNumbers p = photon_numbers(t, seq);
    double cost = 0.0;
    for (int k = 0; k < 3; ++k) {
        cost += 0.5 * (p.forward[k] + p.reverse[k]);
        EXPECT_GE(r.nbar_forward[k], -1e-9);
    }
    EXPECT_NEAR(r.photon_cost, cost, 1e-12);
    EXPECT_NEAR(r.total_cost, std::log(1.0 - r.fidelity) + 0.6 * r.photon_cost, 1e-12);
    EXPECT_NEAR(r.fidelity, fidelity(t, seq), 1e-12);
    EXPECT_LE(r.fidelity, r.non_leakage + 1e-9);
    EXPECT_THROW(total_cost(t, seq, -1.0), SnapError);
}

TEST(TotalCost, SaturationClamp) {
    TargetOperation t = logical_op_target(ComplexMatrix::Identity(2, 2), Code::Trivial, 10);
    ObjectiveReport r = total_cost(t, single_block(0.0, 10), 0.0);
    EXPECT_TRUE(r.saturated);
    EXPECT_NEAR(r.total_cost, std::log(1e-15), 1e-3);
    bool sat = false;
    EXPECT_DOUBLE_EQ(log_infidelity(1.0, &sat), log_infidelity(kSaturationCeiling));
    EXPECT_TRUE(sat);
}

TEST(NonLeakage, Extremes) {
    TargetOperation id = logical_op_target(ComplexMatrix::Identity(2, 2), Code::Trivial, 10);
    BlockSequence empty;
    empty.dim = 10;
    EXPECT_NEAR(non_leakage(id, empty), 1.0, 1e-12);
    TargetOperation out(StateSet::Identity(10, 2), StateSet::Identity(10, 4).rightCols(2));
    EXPECT_NEAR(non_leakage(out, empty), 0.0, 1e-12);
}

TEST(NonLeakage, ReducedFormMatchesFullTraceNorm) {
    std::mt19937_64 gen(29);
    for (int trial = 0; trial < 4; ++trial) {
        TargetOperation t = oracle::random_target(gen, 20, 1 + trial % 2, 6);
        BlockSequence seq = oracle::random_sequence(gen, 2, 20, 1.0);
        ComplexMatrix u = oracle::product(seq);
        ComplexMatrix v = t.outputs() * t.inputs().adjoint();
        Eigen::JacobiSVD<ComplexMatrix> svd(v * u.adjoint() * v);
        double full = svd.singularValues().sum() / t.logical_dim();
        EXPECT_NEAR(non_leakage(t, seq), full, 1e-10);
    }
}

}  // namespace
}  // namespace snapseq
