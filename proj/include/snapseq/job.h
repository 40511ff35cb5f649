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

#ifndef SNAPSEQ_JOB_H
#define SNAPSEQ_JOB_H

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "snapseq/errors.h"
#include "snapseq/finetuner.h"
#include "snapseq/fock_linalg.h"
#include "snapseq/initializer.h"
#include "snapseq/native.h"
#include "snapseq/objectives.h"
#include "snapseq/targets.h"

namespace snapseq {

using Json = nlohmann::json;

/// Target descriptor, e.g. {"family": "state_prep", "preset": "b1"}.
///
/// Families and their keys:
///   state_prep    preset (b0 | b1 | odd) or alpha, beta
///   recovery      syndrome (identity | a | a2), gamma_t
///   logical_op    code (binomial | trivial), op (identity | hadamard | pauli_x |
///                 pauli_y | sqrt_pauli_x) or matrix
///   fock_unitary  kind (identity | inversion | block_inversion | random_permutation |
///                 random_unitary | matrix), N, seed, levels
/// Complex numbers are written as a number or as [re, im]; matrices as rows.
TargetOperation build_target(const Json &descriptor, int dim);

/// Logical dimension N of a fock_unitary descriptor, 2 for the code families
/// and 1 for state preparation.
int descriptor_size(const Json &descriptor);

/// Tabulated photon-cost coefficient for a target family and length.
double default_lambda(const Json &descriptor, int T);

struct WignerExport {
    bool enabled = false;
    Interval x{-5.0, 5.0};
    Interval p{-5.0, 5.0};
    int resolution = 101;
    int state = 0;  // which input state to follow
};

struct JobSpec {
    std::string job_id = "job";
    int dim = kDefaultDim;
    int T = 1;
    Json target;
    InitConfig init;
    TrainConfig train;
    /// False when lambda comes from default_lambda.
    bool lambda_explicit = false;
    std::string preset = "standard";
    std::filesystem::path output = "out";
    /// Treat an objective already saturated after initialization as an error.
    bool strict_saturation = false;
    WignerExport wigner;

    void validate() const;
};

/// Parses a job file. Unknown keys and bad values raise config errors that
/// name the offending field.
JobSpec parse_job(const Json &config);
/// Normalized echo with every default filled in and lambda resolved.
Json job_to_json(const JobSpec &spec);
/// FNV-1a of the compact echo, as 16 hex digits.
std::string config_hash(const JobSpec &spec);

struct SequenceMeta {
    std::uint64_t init_seed = 0;
    std::uint64_t train_seed = 0;
    std::uint64_t target_seed = 0;
    std::string config_hash;
};

/// {dim, T, blocks, native, meta}; theta is exported in canonical form.
Json sequence_to_json(const BlockSequence &seq, const SequenceMeta &meta = {});
/// Reads the blocks (the native part is informational) and validates them.
BlockSequence sequence_from_json(const Json &doc);

Json report_to_json(const ObjectiveReport &report);
Json init_trace_to_json(const InitTrace &trace);

/// Raw parameters plus Adam moments, so that a resumed run continues exactly.
Json checkpoint_to_json(const BlockSequence &seq, const OptimizerState &state);
std::pair<BlockSequence, OptimizerState> checkpoint_from_json(const Json &doc);

void write_init_csv(const std::filesystem::path &path, const InitTrace &trace);
void write_train_csv(const std::filesystem::path &path, const TrainTrace &trace);

Json read_json_file(const std::filesystem::path &path);
void write_json_file(const std::filesystem::path &path, const Json &doc);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

struct JobResult {
    BlockSequence initial;
    BlockSequence final_sequence;
    InitTrace init_trace;
    TrainTrace train_trace;
    ObjectiveReport report;
    bool saturated_at_start = false;
    double wall_seconds = 0.0;
};

/// Optional hook receiving every logged training record.
using JobProgress = std::function<void(const JobSpec &, const TrainRecord &)>;

/// Initialize, finetune, evaluate; writes config.json, init_trace.csv,
/// train_trace.csv, sequence.json, checkpoint.json, report.json and, when
/// enabled, wigner_<k>.csv for every inter-block snapshot k = 0..T.
JobResult run_job(const JobSpec &spec, const JobProgress &progress = {});

/// Initialization only; writes config.json, init_trace.csv, sequence.json.
InitResult run_init(const JobSpec &spec);

/// Finetuning of a stored sequence, optionally resumed from a checkpoint.
JobResult run_finetune(const JobSpec &spec, const BlockSequence &start,
                       const OptimizerState *resume = nullptr,
                       const JobProgress &progress = {});

/// Re-evaluates a stored sequence; the dump is byte-stable for fixed inputs.
std::string evaluate(const Json &sequence_doc, const Json &target_descriptor, double lambda);

struct SweepSpec {
    std::filesystem::path output;
    std::vector<JobSpec> jobs;
};

/// A job file with an extra "sweep": {"T": [...], "N": [...]} section expands
/// to one job per (N, T) pair; N applies only to fock_unitary targets. Each
/// job writes into <output>/<job_id> and takes its own default lambda.
SweepSpec parse_sweep(const Json &config);

struct SweepRow {
    std::string job_id;
    int N = 0;
    int T = 0;
    double lambda = 0.0;
    ObjectiveReport report;
    std::string error;
};

/// Runs every job on a pool of SNAPSEQ_WORKERS threads (default: hardware
/// concurrency) and writes sweep.csv in job order.
std::vector<SweepRow> run_sweep(const SweepSpec &sweep, const JobProgress &progress = {});

/// Wigner grids of one followed input state before the first block and
/// after each block.
std::vector<Eigen::MatrixXd> wigner_snapshots(const TargetOperation &target,
                                              const BlockSequence &seq,
                                              const WignerExport &opts);
void write_wigner_csv(const std::filesystem::path &path, const Eigen::MatrixXd &grid,
                      const WignerExport &opts);

/// 0 ok, 2 config error, 3 numeric failure or saturation.
int exit_code(ErrorKind kind);
Json error_json(const SnapError &err);

}  // namespace snapseq

#endif
