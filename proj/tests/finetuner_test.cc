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

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "snapseq/errors.h"
#include "snapseq/finetuner.h"
#include "snapseq/objectives.h"

namespace snapseq {
namespace {

template <typename F>
double central_difference(BlockSequence seq, int t, int n, double h, F f) {
    double &p = n < 0 ? seq.blocks[t].alpha : seq.blocks[t].theta[n];
    double x = p;
    p = x + h;
    double up = f(seq);
    p = x - h;
    double down = f(seq);
    return (up - down) / (2 * h);
}

bool close(double analytic, double numeric) {
    double err = std::abs(analytic - numeric);
    return err < 1e-8 || err < 1e-6 * std::max(std::abs(analytic), std::abs(numeric));
}

double component(const Gradient &g, int t, int n) {
    return n < 0 ? g.alpha[t] : g.theta(t, n);
}

TEST(CostGradient, MatchesFiniteDifferences) {
    std::mt19937_64 gen(41);
    for (int trial = 0; trial < 8; ++trial) {
        int T = 1 + trial % 3;
        int dim = trial % 2 == 0 ? 12 : 24;
        int L = 1 + (trial / 2) % 2;
        double lambda = trial % 4 < 2 ? 0.0 : 0.5;
        TargetOperation target = oracle::random_target(gen, dim, L, 5);
        BlockSequence seq = oracle::random_sequence(gen, T, dim, 1.0);
        CostGradient cg = cost_gradient(target, seq, lambda);
        EXPECT_NEAR(cg.total_cost, total_cost(target, seq, lambda).total_cost, 1e-12);
        auto cost = [&](const BlockSequence &s) { return total_cost(target, s, lambda).total_cost; };
        for (int t = 0; t < T; ++t) {
            for (int n = -1; n < dim; ++n) {
                double fd = central_difference(seq, t, n, 1e-6, cost);
                EXPECT_PRED2(close, component(cg.total, t, n), fd) << "t=" << t << " n=" << n;
            }
        }
    }
}

TEST(CostGradient, PartsMatchTheirObjectives) {
    std::mt19937_64 gen(42);
    TargetOperation target = oracle::random_target(gen, 16, 2, 5);
    BlockSequence seq = oracle::random_sequence(gen, 3, 16, 1.0);
    Gradient og = overlap_gradient(target, seq);
    Gradient pg = photon_gradient(target, seq);
    auto log_term = [&](const BlockSequence &s) { return std::log(1.0 - fidelity(target, s)); };
    auto photon = [&](const BlockSequence &s) { return total_cost(target, s, 0.0).photon_cost; };
    for (int t = 0; t < 3; ++t) {
        for (int n = -1; n < 16; n += 3) {
            EXPECT_PRED2(close, component(og, t, n), central_difference(seq, t, n, 1e-6, log_term));
            EXPECT_PRED2(close, component(pg, t, n), central_difference(seq, t, n, 1e-6, photon));
        }
    }
}

TEST(CostGradient, SaturatedOverlapGradientIsZeroed) {
    TargetOperation target = logical_op_target(ComplexMatrix::Identity(2, 2), Code::Trivial, 12);
    BlockSequence seq;
    seq.dim = 12;
    seq.blocks.push_back(Block{0.0, SnapPhases::Zero(12)});
    bool saturated = false;
    Gradient g = overlap_gradient(target, seq, &saturated);
    EXPECT_TRUE(saturated);
    EXPECT_EQ(g.theta.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(g.alpha[0], 0.0);
    CostGradient cg = cost_gradient(target, seq, 1.0);
    EXPECT_TRUE(cg.saturated);
    EXPECT_EQ(cg.total.theta, cg.photon.theta);
}

TEST(CostGradient, GlobalPhaseDirectionIsFlat) {
    std::mt19937_64 gen(43);
    TargetOperation target = oracle::random_target(gen, 24, 2, 6);
    BlockSequence seq = oracle::random_sequence(gen, 3, 24, 1.0);
    Gradient g = overlap_gradient(target, seq);
    EXPECT_NEAR(g.theta.row(2).sum(), 0.0, 1e-10);
}

TEST(PhotonGradient, VacuumThroughIdentityBlocks) {
    StateSet vac = StateSet::Zero(20, 1);
    vac(0, 0) = 1.0;
    TargetOperation target(vac, vac);
    BlockSequence seq;
    seq.dim = 20;
    seq.blocks.assign(2, Block{0.3, SnapPhases::Zero(20)});
    Gradient g = photon_gradient(target, seq);
    EXPECT_LT(g.theta.cwiseAbs().maxCoeff(), 1e-12);
    for (double a : g.alpha) {
        EXPECT_TRUE(std::isfinite(a));
        EXPECT_GT(a, 0.0);
    }
}

TEST(PhotonGradient, InverseProblemDuality) {
    std::mt19937_64 gen(44);
    TargetOperation target = oracle::random_target(gen, 20, 2, 6);
    BlockSequence seq = oracle::random_sequence(gen, 3, 20, 1.0);
    TargetOperation inverse_target(target.outputs(), target.inputs());
    BlockSequence inverse;
    inverse.dim = 20;
    for (int t = 2; t >= 0; --t) {
        inverse.blocks.push_back(Block{seq.blocks[t].alpha, -seq.blocks[t].theta});
    }
    Gradient g = photon_gradient(target, seq);
    Gradient h = photon_gradient(inverse_target, inverse);
    for (int t = 0; t < 3; ++t) {
        EXPECT_NEAR(h.alpha[2 - t], g.alpha[t], 1e-10);
        EXPECT_LT((h.theta.row(2 - t) + g.theta.row(t)).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Clip, Values) {
    EXPECT_EQ(clip(150.0, 100.0), 100.0);
    EXPECT_EQ(clip(-75.0, 50.0), -50.0);
    EXPECT_EQ(clip(3.0, 50.0), 3.0);
}

TEST(Adam, FirstStepClosedForm) {
    TrainConfig cfg;
    OptimizerState s = OptimizerState::zeros(1);
    Eigen::VectorXd p(1);
    p << 0.7;
    Eigen::VectorXd g(1);
    g << -2.5;
    adam_step(s, p, g, cfg);
    EXPECT_NEAR(p[0], 0.7 + cfg.eta * 2.5 / (2.5 + cfg.epsilon), 1e-15);
    EXPECT_EQ(s.step, 1);
}

TEST(Adam, ZeroGradientKeepsParameters) {
    TrainConfig cfg;
    OptimizerState s = OptimizerState::zeros(3);
    Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(3, -1.0, 1.0);
    Eigen::VectorXd before = p;
    adam_step(s, p, Eigen::VectorXd::Zero(3), cfg);
    EXPECT_EQ(p, before);
    EXPECT_THROW(adam_step(s, p, Eigen::VectorXd::Zero(4), cfg), SnapError);
}

TEST(Packing, RoundTrip) {
    std::mt19937_64 gen(45);
    BlockSequence seq = oracle::random_sequence(gen, 3, 10, 1.0);
    Eigen::VectorXd p = pack_parameters(seq);
    ASSERT_EQ(p.size(), 33);
    EXPECT_EQ(p[11], seq.blocks[1].alpha);
    EXPECT_EQ(p[12], seq.blocks[1].theta[0]);
    BlockSequence copy = seq;
    copy.blocks[2].alpha = 0.0;
    unpack_parameters(p, copy);
    EXPECT_EQ(copy.blocks[2].alpha, seq.blocks[2].alpha);
    Gradient g = Gradient::zero(3, 10);
    g.alpha[1] = 4.0;
    g.theta(2, 9) = -1.0;
    Eigen::VectorXd flat = pack_gradient(g);
    EXPECT_EQ(flat[11], 4.0);
    EXPECT_EQ(flat[32], -1.0);
}

TEST(TrainConfig, PresetsAndValidation) {
    TrainConfig s = TrainConfig::standard();
    EXPECT_EQ(s.eta, 1e-4);
    EXPECT_EQ(s.beta1, 0.9);
    EXPECT_EQ(s.beta2, 0.999);
    EXPECT_EQ(s.epsilon, 1e-8);
    EXPECT_EQ(s.clip_alpha, 100.0);
    EXPECT_EQ(s.clip_theta, 50.0);
    EXPECT_EQ(s.iterations, 100000);
    EXPECT_TRUE(s.clipping);
    TrainConfig f = TrainConfig::no_clip_high_lr();
    EXPECT_EQ(f.eta, 2.5e-4);
    EXPECT_EQ(f.beta2, 0.99);
    EXPECT_FALSE(f.clipping);
    TrainConfig bad;
    bad.beta2 = 1.0;
    EXPECT_THROW(bad.validate(), SnapError);
    bad = TrainConfig{};
    bad.eta = 0.0;
    EXPECT_THROW(bad.validate(), SnapError);
    bad = TrainConfig{};
    bad.clip_theta = -1.0;
    EXPECT_THROW(bad.validate(), SnapError);
}

TEST(Finetune, EmptySequence) {
    TargetOperation target = logical_op_target(ComplexMatrix::Identity(2, 2), Code::Trivial, 10);
    BlockSequence empty;
    empty.dim = 10;
    TrainConfig cfg;
    cfg.iterations = 50;
    FinetuneResult r = finetune(target, empty, cfg);
    EXPECT_TRUE(r.sequence.empty());
    ASSERT_EQ(r.trace.records.size(), 1u);
    EXPECT_NEAR(r.trace.records[0].fidelity, 1.0, 1e-15);
}

TEST(Finetune, RecordCountAndProgress) {
    std::mt19937_64 gen(46);
    TargetOperation target = oracle::random_target(gen, 16, 1, 4);
    BlockSequence seq = oracle::random_sequence(gen, 2, 16, 1.0);
    for (int iterations : {0, 1, 7, 10, 23}) {
        TrainConfig cfg;
        cfg.iterations = iterations;
        cfg.log_every = 5;
        int calls = 0;
        FinetuneResult r = finetune(target, seq, cfg, [&](const TrainRecord &) { ++calls; });
        std::size_t expected = (iterations + 4) / 5 + 1;
        EXPECT_EQ(r.trace.records.size(), expected);
        EXPECT_EQ(static_cast<std::size_t>(calls), expected);
        EXPECT_EQ(r.trace.records.back().iteration, iterations);
    }
}

TEST(Finetune, ReplayAndDeterminism) {
    std::mt19937_64 gen(47);
    TargetOperation target = oracle::random_target(gen, 16, 2, 4);
    BlockSequence seq = oracle::random_sequence(gen, 2, 16, 1.0);
    TrainConfig cfg;
    cfg.lambda = 0.3;
    cfg.iterations = 40;
    cfg.log_every = 10;
    FinetuneResult full = finetune(target, seq, cfg);
    FinetuneResult again = finetune(target, seq, cfg);
    EXPECT_EQ(pack_parameters(full.sequence), pack_parameters(again.sequence));
    TrainConfig part = cfg;
    part.iterations = 20;
    FinetuneResult half = finetune(target, seq, part);
    EXPECT_NEAR(full.trace.records[2].total_cost,
                total_cost(target, half.sequence, cfg.lambda).total_cost, 1e-12);
    EXPECT_NEAR(full.trace.records.back().total_cost,
                total_cost(target, full.sequence, cfg.lambda).total_cost, 1e-12);
}

TEST(Finetune, ResumeEqualsContinuousRun) {
    std::mt19937_64 gen(48);
    TargetOperation target = oracle::random_target(gen, 16, 2, 4);
    BlockSequence seq = oracle::random_sequence(gen, 3, 16, 1.0);
    TrainConfig cfg;
    cfg.lambda = 0.2;
    cfg.iterations = 60;
    FinetuneResult full = finetune(target, seq, cfg);
    cfg.iterations = 25;
    FinetuneResult first = finetune(target, seq, cfg);
    cfg.iterations = 35;
    FinetuneResult second = finetune(target, first.sequence, cfg, {}, &first.optimizer);
    EXPECT_EQ(pack_parameters(full.sequence), pack_parameters(second.sequence));
    EXPECT_EQ(second.optimizer.step, 60);
}

TEST(Finetune, CostTrendsDownWithoutPhotonTerm) {
    std::mt19937_64 gen(49);
    for (int trial = 0; trial < 3; ++trial) {
        TargetOperation target = oracle::random_target(gen, 20, 2, 5);
        BlockSequence seq = oracle::random_sequence(gen, 3, 20, 1.0);
        TrainConfig cfg;
        cfg.iterations = 100;
        cfg.log_every = 1;
        FinetuneResult r = finetune(target, seq, cfg);
        std::vector<double> diffs;
        for (std::size_t k = 1; k < r.trace.records.size(); ++k) {
            diffs.push_back(r.trace.records[k].total_cost - r.trace.records[k - 1].total_cost);
        }
        std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
        EXPECT_LE(diffs[diffs.size() / 2], 0.0);
        EXPECT_LT(r.trace.records.back().total_cost, r.trace.records.front().total_cost);
    }
}

TEST(Finetune, NonfiniteCostAborts) {
    std::mt19937_64 gen(50);
    TargetOperation target = oracle::random_target(gen, 12, 1, 4);
    BlockSequence seq = oracle::random_sequence(gen, 1, 12, 1.0);
    TrainConfig cfg;
    cfg.eta = 1e308;
    cfg.iterations = 10;
    cfg.log_every = 1;
    FinetuneResult r = finetune(target, seq, cfg);
    EXPECT_EQ(r.status, FinetuneStatus::NumericAbort);
    EXPECT_FALSE(r.message.empty());
    EXPECT_GE(r.trace.records.size(), 1u);
    EXPECT_LT(r.trace.records.size(), 11u);
}

}  // namespace
}  // namespace snapseq
