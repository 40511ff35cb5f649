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

#include "snapseq/initializer.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <string>
#include <utility>

#include "snapseq/errors.h"
#include "snapseq/objectives.h"
#include "snapseq/rng.h"

namespace snapseq {

namespace {

double safe_arg(cdouble z) {
    return z == cdouble(0.0, 0.0) ? 0.0 : std::arg(z);
}

/// Distance of x to the nearest multiple of pi.
double distance_to_real_phase(double x) {
    double r = std::remainder(x, std::numbers::pi);
    return std::abs(r);
}

BlockChoice choose(const std::vector<double> &grid, int cutoff, int dim, double inv_l,
                   const auto &g_of) {
    // Candidates are visited by increasing |alpha|, then alpha, so the strict
    // comparison below realizes the tie-break.
    std::vector<double> order = grid;
    std::sort(order.begin(), order.end(), [](double a, double b) {
        if (std::abs(a) != std::abs(b)) {
            return std::abs(a) < std::abs(b);
        }
        return a < b;
    });
    int c = std::clamp(cutoff, 0, dim);
    BlockChoice best;
    double best_value = -1.0;
    Eigen::VectorXcd best_g;
    cdouble best_tail;
    for (double alpha : order) {
        Eigen::VectorXcd g = g_of(alpha);
        double head = g.head(c).cwiseAbs().sum();
        cdouble tail = g.tail(dim - c).conjugate().sum();
        double value = (head + std::abs(tail)) * inv_l;
        if (value > best_value + 1e-12 * std::max(1.0, best_value)) {
            best_value = value;
            best.alpha = alpha;
            best.score = g.cwiseAbs().sum() * inv_l;
            best.fidelity = value;
            best_g = std::move(g);
            best_tail = tail;
        }
    }
    // Common offset arg(tail) aligns the free phases with the frozen tail; it
    // vanishes when the cutoff covers every level.
    double offset = safe_arg(best_tail);
    best.theta = SnapPhases::Zero(dim);
    for (int n = 0; n < c; ++n) {
        best.theta[n] = wrap_phase(safe_arg(best_g[n]) + offset);
    }
    return best;
}

}  // namespace

std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int k = -10; k <= 10; ++k) {
        grid.push_back(k / 5.0);
    }
    return grid;
}

void InitConfig::validate() const {
    if (T < 1) {
        throw_config("sequence length T must be at least 1", "T");
    }
    if (alpha_grid.empty()) {
        throw_config("alpha grid must not be empty", "init.alpha_grid");
    }
    for (double a : alpha_grid) {
        if (!std::isfinite(a)) {
            throw_config("alpha grid contains nonfinite values", "init.alpha_grid");
        }
    }
    if (snap_cutoff < 0) {
        throw_config("snap cutoff must be nonnegative", "init.snap_cutoff");
    }
}

Eigen::VectorXcd g_vector(const ComplexMatrix &effective_target, double alpha) {
    if (effective_target.rows() != effective_target.cols()) {
        throw_config("effective target must be square");
    }
    int dim = static_cast<int>(effective_target.rows());
    ComplexMatrix d = displacement_basis(dim).matrix(alpha);
    return (d * effective_target).cwiseProduct(d.conjugate()).rowwise().sum();
}

Eigen::VectorXcd g_vector(const StateSet &left, const StateSet &right, double alpha) {
    if (left.rows() != right.rows() || left.cols() != right.cols()) {
        throw_config("g_vector: left and right state sets differ in shape");
    }
    const DisplacementBasis &basis = displacement_basis(static_cast<int>(left.rows()));
    StateSet dl = basis.apply(alpha, left);
    StateSet dr = basis.apply(alpha, right);
    return dr.cwiseProduct(dl.conjugate()).rowwise().sum();
}

BlockChoice optimal_block(const ComplexMatrix &effective_target, int logical_dim,
                          const InitConfig &cfg) {
    if (cfg.alpha_grid.empty()) {
        throw_config("alpha grid must not be empty", "init.alpha_grid");
    }
    int dim = static_cast<int>(effective_target.rows());
    return choose(cfg.alpha_grid, cfg.snap_cutoff, dim, 1.0 / logical_dim,
                  [&](double a) { return g_vector(effective_target, a); });
}

BlockChoice optimal_block(const StateSet &left, const StateSet &right, const InitConfig &cfg) {
    if (cfg.alpha_grid.empty()) {
        throw_config("alpha grid must not be empty", "init.alpha_grid");
    }
    int dim = static_cast<int>(left.rows());
    return choose(cfg.alpha_grid, cfg.snap_cutoff, dim, 1.0 / static_cast<double>(left.cols()),
                  [&](double a) { return g_vector(left, right, a); });
}

std::vector<int> insertion_order(int T) {
    if (T < 1) {
        throw_config("sequence length T must be at least 1", "T");
    }
    std::vector<int> order;
    std::deque<std::pair<int, int>> queue{{1, T}};
    while (!queue.empty()) {
        auto [lo, hi] = queue.front();
        queue.pop_front();
        if (lo > hi) {
            continue;
        }
        int mid = (lo + hi + 1) / 2;
        order.push_back(mid);
        queue.emplace_back(lo, mid - 1);
        queue.emplace_back(mid + 1, hi);
    }
    return order;
}

InitResult initialize(const TargetOperation &target, const InitConfig &cfg) {
    cfg.validate();
    int dim = target.dim();
    Rng rng(cfg.seed);
    InitResult result;
    result.sequence.dim = dim;
    std::vector<int> positions;  // final positions of placed blocks, kept sorted

    BlockSequence empty{dim, {}};
    double current = fidelity(target, empty);
    result.trace.initial_fidelity = current;

    std::vector<int> order = insertion_order(cfg.T);
    for (int step = 0; step < cfg.T; ++step) {
        int slot = order[step];
        auto it = std::lower_bound(positions.begin(), positions.end(), slot);
        int index = static_cast<int>(it - positions.begin());

        BlockSequence left{dim, {}};
        BlockSequence right{dim, {}};
        left.blocks.assign(result.sequence.blocks.begin(), result.sequence.blocks.begin() + index);
        right.blocks.assign(result.sequence.blocks.begin() + index, result.sequence.blocks.end());
        StateSet left_states = apply_sequence(left, target.inputs());
        StateSet right_states = apply_inverse_sequence(right, target.outputs());

        Block block;
        bool random = false;
        if (step == 0 && cfg.random_first_block) {
            random = true;
        } else {
            BlockChoice choice = optimal_block(left_states, right_states, cfg);
            if (step == 0 && cfg.auto_detect) {
                int c = std::min(cfg.snap_cutoff, dim);
                bool real_phases = true;
                for (int n = 0; n < c; ++n) {
                    if (distance_to_real_phase(choice.theta[n]) > cfg.detect_phase_tol) {
                        real_phases = false;
                        break;
                    }
                }
                bool stalled = choice.fidelity - current < cfg.detect_gain_tol;
                bool headroom = 1.0 - current > cfg.detect_gain_tol;
                if (real_phases && stalled && headroom) {
                    result.trace.auto_detected = true;
                    random = true;
                }
            }
            if (!random) {
                block.alpha = choice.alpha;
                block.theta = std::move(choice.theta);
            }
        }
        if (random) {
            result.trace.random_first = true;
            block.alpha = cfg.alpha_grid[rng.below(cfg.alpha_grid.size())];
            block.theta = SnapPhases::Zero(dim);
            int c = std::min(cfg.snap_cutoff, dim);
            for (int n = 0; n < c; ++n) {
                block.theta[n] = rng.uniform_open_closed(-std::numbers::pi, std::numbers::pi);
            }
        }

        result.sequence.blocks.insert(result.sequence.blocks.begin() + index, block);
        positions.insert(it, slot);
        current = fidelity(target, result.sequence);
        result.trace.records.push_back({step, slot, index, block.alpha, current, random});
    }
    return result;
}

}  // namespace snapseq
