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

#ifndef SNAPSEQ_FINETUNER_H
#define SNAPSEQ_FINETUNER_H

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "snapseq/fock_linalg.h"
#include "snapseq/objectives.h"
#include "snapseq/targets.h"

namespace snapseq {

struct TrainConfig {
    double lambda = 0.0;
    int iterations = 100000;
    double eta = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    bool clipping = true;
    double clip_alpha = 100.0;
    double clip_theta = 50.0;
    int log_every = 100;
    std::uint64_t seed = 0;

    /// Adam with per-component gradient clipping (the defaults above).
    static TrainConfig standard();
    /// Faster but less stable: eta 2.5e-4, beta2 0.99, no clipping.
    static TrainConfig no_clip_high_lr();

    void validate() const;
};

/// Partial derivatives with respect to every block parameter.
struct Gradient {
    std::vector<double> alpha;  // T entries
    Eigen::MatrixXd theta;      // T x dim

    static Gradient zero(int T, int dim);
    Gradient &operator+=(const Gradient &other);
    Gradient scaled(double factor) const;
};

/// Value and gradient of C = ln(1 - F) + lambda P in one evaluation.
struct CostGradient {
    double fidelity = 0.0;
    double photon_cost = 0.0;
    double total_cost = 0.0;
    bool saturated = false;
    Gradient overlap;  // d ln(1 - F); zero when saturated
    Gradient photon;   // d P, P = sum_t (nbar_t + nbar'_t) / 2
    Gradient total;    // overlap + lambda * photon
};

/// State-propagation evaluation: a forward sweep of the inputs, a backward
/// sweep of the outputs, and two adjoint sweeps for the photon terms. Cost is
/// O(T L dim^2); no dim x dim products are formed.
CostGradient cost_gradient(const TargetOperation &target, const BlockSequence &seq,
                           double lambda);

Gradient overlap_gradient(const TargetOperation &target, const BlockSequence &seq,
                          bool *saturated = nullptr);
Gradient photon_gradient(const TargetOperation &target, const BlockSequence &seq);

/// Clamp to [-bound, bound].
double clip(double grad, double bound);

/// Flattened layout: [alpha_1, theta_1(0..dim-1), alpha_2, theta_2, ...].
Eigen::VectorXd pack_parameters(const BlockSequence &seq);
void unpack_parameters(const Eigen::VectorXd &params, BlockSequence &seq);
Eigen::VectorXd pack_gradient(const Gradient &grad);

struct OptimizerState {
    long step = 0;
    Eigen::VectorXd m;
    Eigen::VectorXd v;

    static OptimizerState zeros(Eigen::Index n);
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(OptimizerState &state, Eigen::VectorXd &params, const Eigen::VectorXd &grads,
               const TrainConfig &cfg);

struct TrainRecord {
    long iteration = 0;
    double fidelity = 0.0;
    double photon_cost = 0.0;
    double total_cost = 0.0;
    double max_grad_alpha = 0.0;
    double max_grad_theta = 0.0;
    bool saturated = false;
};

struct TrainTrace {
    std::vector<TrainRecord> records;
};

enum class FinetuneStatus { Completed, NumericAbort };

struct FinetuneResult {
    BlockSequence sequence;
    TrainTrace trace;
    OptimizerState optimizer;
    FinetuneStatus status = FinetuneStatus::Completed;
    std::string message;
};

using ProgressCallback = std::function<void(const TrainRecord &)>;

/// Runs cfg.iterations steps of gradient -> clip -> Adam and returns the
/// parameters after the last step. Records are taken before every
/// log_every-th update and once more at the end.
FinetuneResult finetune(const TargetOperation &target, const BlockSequence &seq,
                        const TrainConfig &cfg, const ProgressCallback &progress = {},
                        const OptimizerState *resume = nullptr);

}  // namespace snapseq

#endif
