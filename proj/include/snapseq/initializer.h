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

#ifndef SNAPSEQ_INITIALIZER_H
#define SNAPSEQ_INITIALIZER_H

#include <cstdint>
#include <vector>

#include "snapseq/fock_linalg.h"
#include "snapseq/targets.h"

namespace snapseq {

/// {-2.0, -1.8, ..., 2.0}.
std::vector<double> default_alpha_grid();

struct InitConfig {
    int T = 1;
    std::vector<double> alpha_grid = default_alpha_grid();
    /// SNAP phases on levels >= snap_cutoff stay at zero during initialization.
    int snap_cutoff = 15;
    /// Start from one random block instead of the greedy choice.
    bool random_first_block = false;
    /// Switch to a random first block when the greedy one is stuck on real
    /// phases without improving an overlap that is not already within
    /// detect_gain_tol of one.
    bool auto_detect = true;
    double detect_phase_tol = 1e-9;
    double detect_gain_tol = 1e-6;
    std::uint64_t seed = 0;

    void validate() const;
};

struct InsertionRecord {
    int step = 0;        // 0-based insertion count
    int slot = 0;        // 1-based final position of the inserted block
    int index = 0;       // 0-based index in the sequence right after insertion
    double alpha = 0.0;
    double fidelity = 0.0;  // of the whole sequence after insertion
    bool random = false;
};

struct InitTrace {
    double initial_fidelity = 0.0;  // empty sequence
    bool auto_detected = false;     // blockade detector fired
    bool random_first = false;      // first block was drawn at random
    std::vector<InsertionRecord> records;
};

/// Result of the single-block optimization for a fixed effective target.
struct BlockChoice {
    double alpha = 0.0;
    SnapPhases theta;
    /// (1/L) sum_n |g_n(alpha)|: the optimum without the SNAP cutoff.
    double score = 0.0;
    /// Overlap actually reached by (alpha, theta) with the cutoff applied.
    double fidelity = 0.0;
};

/// g_n(alpha) = <n| D(alpha) M D^dag(alpha) |n>.
Eigen::VectorXcd g_vector(const ComplexMatrix &effective_target, double alpha);
/// Same for the rank-L effective target M = right * left^dag.
Eigen::VectorXcd g_vector(const StateSet &left, const StateSet &right, double alpha);

/// Best block on the alpha grid for the effective target M (L = logical
/// dimension, used only for normalization).
BlockChoice optimal_block(const ComplexMatrix &effective_target, int logical_dim,
                          const InitConfig &cfg);
BlockChoice optimal_block(const StateSet &left, const StateSet &right, const InitConfig &cfg);

/// Final positions (1-based) in insertion order: breadth-first traversal of
/// the balanced binary tree over [1, T] with root ceil((lo + hi) / 2).
std::vector<int> insertion_order(int T);

struct InitResult {
    BlockSequence sequence;
    InitTrace trace;
};

InitResult initialize(const TargetOperation &target, const InitConfig &cfg);

}  // namespace snapseq

#endif
