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

#include "snapseq/job.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "snapseq/rng.h"

namespace snapseq {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string &path, const std::string &key) {
    return path.empty() ? key : path + "." + key;
}

std::string index(const std::string &path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

void require_object(const Json &j, const std::string &path) {
    if (!j.is_object()) {
        throw_config("expected an object", path);
    }
}

void reject_unknown(const Json &j, const std::string &path, std::set<std::string> allowed) {
    for (const auto &[key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw_config("unknown key", join(path, key));
        }
    }
}

const Json *find(const Json &j, const std::string &key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double get_double(const Json &j, const std::string &key, double fallback,
                  const std::string &path) {
    const Json *v = find(j, key);
    if (v == nullptr) {
        return fallback;
    }
    if (!v->is_number()) {
        throw_config("expected a number", join(path, key));
    }
    double x = v->get<double>();
    if (!std::isfinite(x)) {
        throw_config("expected a finite number", join(path, key));
    }
    return x;
}

long long get_int(const Json &j, const std::string &key, long long fallback,
                  const std::string &path) {
    const Json *v = find(j, key);
    if (v == nullptr) {
        return fallback;
    }
    if (!v->is_number_integer()) {
        throw_config("expected an integer", join(path, key));
    }
    return v->get<long long>();
}

std::uint64_t get_seed(const Json &j, const std::string &key, std::uint64_t fallback,
                       const std::string &path) {
    const Json *v = find(j, key);
    if (v == nullptr) {
        return fallback;
    }
    if (v->is_number_unsigned()) {
        return v->get<std::uint64_t>();
    }
    if (v->is_number_integer() && v->get<long long>() >= 0) {
        return static_cast<std::uint64_t>(v->get<long long>());
    }
    throw_config("expected a nonnegative integer", join(path, key));
}

bool get_bool(const Json &j, const std::string &key, bool fallback, const std::string &path) {
    const Json *v = find(j, key);
    if (v == nullptr) {
        return fallback;
    }
    if (!v->is_boolean()) {
        throw_config("expected true or false", join(path, key));
    }
    return v->get<bool>();
}

std::string get_string(const Json &j, const std::string &key, const std::string &fallback,
                       const std::string &path) {
    const Json *v = find(j, key);
    if (v == nullptr) {
        return fallback;
    }
    if (!v->is_string()) {
        throw_config("expected a string", join(path, key));
    }
    return v->get<std::string>();
}

int to_int(long long x, const std::string &field) {
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        throw_config("integer out of range", field);
    }
    return static_cast<int>(x);
}

cdouble parse_complex(const Json &j, const std::string &path) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw_config("expected a number or [re, im]", path);
}

ComplexMatrix parse_matrix(const Json &j, const std::string &path) {
    if (!j.is_array() || j.empty()) {
        throw_config("expected a nonempty array of rows", path);
    }
    std::size_t n = j.size();
    ComplexMatrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        const Json &row = j[r];
        if (!row.is_array() || row.size() != n) {
            throw_config("expected a square matrix", index(path, r));
        }
        for (std::size_t c = 0; c < n; ++c) {
            m(r, c) = parse_complex(row[c], index(index(path, r), c));
        }
    }
    if (!m.allFinite()) {
        throw_config("matrix entries must be finite", path);
    }
    return m;
}

std::vector<double> parse_reals(const Json &j, const std::string &path) {
    if (!j.is_array()) {
        throw_config("expected an array of numbers", path);
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number() || !std::isfinite(j[i].get<double>())) {
            throw_config("expected a finite number", index(path, i));
        }
        out.push_back(j[i].get<double>());
    }
    return out;
}

std::vector<int> parse_ints(const Json &j, const std::string &path) {
    if (!j.is_array()) {
        throw_config("expected an array of integers", path);
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_integer()) {
            throw_config("expected an integer", index(path, i));
        }
        out.push_back(to_int(j[i].get<long long>(), index(path, i)));
    }
    return out;
}

Interval parse_interval(const Json &j, const std::string &path) {
    std::vector<double> v = parse_reals(j, path);
    if (v.size() != 2 || !(v[0] < v[1])) {
        throw_config("expected [lo, hi] with lo < hi", path);
    }
    return {v[0], v[1]};
}

std::string family_of(const Json &d) {
    require_object(d, "target");
    std::string family = get_string(d, "family", "", "target");
    if (family.empty()) {
        throw_config("missing target family", "target.family");
    }
    return family;
}

ComplexMatrix named_logical_op(const std::string &op) {
    if (op == "identity") {
        return ComplexMatrix::Identity(2, 2);
    }
    if (op == "hadamard") {
        return hadamard();
    }
    if (op == "pauli_x") {
        return pauli_x();
    }
    if (op == "pauli_y") {
        return pauli_y();
    }
    if (op == "sqrt_pauli_x") {
        return sqrt_pauli_x();
    }
    throw_config("unknown logical operation '" + op + "'", "target.op");
}

int fock_unitary_size(const Json &d) {
    std::string kind = get_string(d, "kind", "", "target");
    if (kind == "matrix") {
        const Json *m = find(d, "matrix");
        if (m == nullptr || !m->is_array()) {
            throw_config("matrix kind needs a matrix", "target.matrix");
        }
        return static_cast<int>(m->size());
    }
    return to_int(get_int(d, "N", 10, "target"), "target.N");
}

double lambda_by_size(int n) {
    if (n <= 3) {
        return 2.4;
    }
    if (n <= 5) {
        return 1.8;
    }
    return 1.6;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

TargetOperation build_target(const Json &d, int dim) {
    std::string family = family_of(d);
    if (family == "state_prep") {
        reject_unknown(d, "target", {"family", "preset", "alpha", "beta"});
        std::string preset = get_string(d, "preset", "", "target");
        cdouble alpha;
        cdouble beta;
        if (preset == "b0") {
            alpha = 1.0;
            beta = 0.0;
        } else if (preset == "b1") {
            alpha = 0.0;
            beta = 1.0;
        } else if (preset == "odd") {
            alpha = odd_superposition_alpha();
            beta = odd_superposition_beta();
        } else if (preset.empty()) {
            const Json *a = find(d, "alpha");
            const Json *b = find(d, "beta");
            if (a == nullptr || b == nullptr) {
                throw_config("state_prep needs a preset or alpha and beta", "target.preset");
            }
            alpha = parse_complex(*a, "target.alpha");
            beta = parse_complex(*b, "target.beta");
        } else {
            throw_config("unknown preset '" + preset + "'", "target.preset");
        }
        return state_prep_target(alpha, beta, dim);
    }
    if (family == "recovery") {
        reject_unknown(d, "target", {"family", "syndrome", "gamma_t"});
        std::string s = get_string(d, "syndrome", "identity", "target");
        Syndrome syndrome;
        if (s == "identity") {
            syndrome = Syndrome::Identity;
        } else if (s == "a") {
            syndrome = Syndrome::A;
        } else if (s == "a2") {
            syndrome = Syndrome::A2;
        } else {
            throw_config("unknown syndrome '" + s + "'", "target.syndrome");
        }
        DecayParams decay;
        decay.gamma_t = get_double(d, "gamma_t", decay.gamma_t, "target");
        if (decay.gamma_t < 0.0) {
            throw_config("gamma_t must be nonnegative", "target.gamma_t");
        }
        return recovery_target(syndrome, decay, dim);
    }
    if (family == "logical_op") {
        reject_unknown(d, "target", {"family", "code", "op", "matrix"});
        std::string c = get_string(d, "code", "binomial", "target");
        Code code;
        if (c == "binomial") {
            code = Code::Binomial;
        } else if (c == "trivial") {
            code = Code::Trivial;
        } else {
            throw_config("unknown code '" + c + "'", "target.code");
        }
        ComplexMatrix v;
        if (const Json *m = find(d, "matrix")) {
            v = parse_matrix(*m, "target.matrix");
            if (v.rows() != 2) {
                throw_config("logical operations act on two levels", "target.matrix");
            }
        } else {
            v = named_logical_op(get_string(d, "op", "identity", "target"));
        }
        return logical_op_target(v, code, dim);
    }
    if (family == "fock_unitary") {
        reject_unknown(d, "target", {"family", "kind", "N", "seed", "levels", "matrix"});
        std::string kind = get_string(d, "kind", "", "target");
        int n = fock_unitary_size(d);
        if (n < 1) {
            throw_config("N must be positive", "target.N");
        }
        std::uint64_t seed = get_seed(d, "seed", 0, "target");
        ComplexMatrix v;
        if (kind == "identity") {
            v = ComplexMatrix::Identity(n, n);
        } else if (kind == "inversion") {
            v = inversion_matrix(n);
        } else if (kind == "block_inversion") {
            v = block_inversion_matrix(n);
        } else if (kind == "random_permutation") {
            v = permutation_matrix(random_permutation(n, seed));
        } else if (kind == "random_unitary") {
            v = random_unitary(n, seed);
        } else if (kind == "matrix") {
            v = parse_matrix(d["matrix"], "target.matrix");
        } else {
            throw_config("unknown kind '" + kind + "'", "target.kind");
        }
        std::vector<int> levels(n);
        for (int i = 0; i < n; ++i) {
            levels[i] = i;
        }
        if (const Json *l = find(d, "levels")) {
            levels = parse_ints(*l, "target.levels");
            if (static_cast<int>(levels.size()) != n) {
                throw_config("need one level per logical state", "target.levels");
            }
        }
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (levels[i] < 0 || levels[i] >= dim) {
                throw_config("Fock level outside the truncated space", index("target.levels", i));
            }
        }
        return fock_subspace_unitary(v, levels, dim);
    }
    throw_config("unknown target family '" + family + "'", "target.family");
}

int descriptor_size(const Json &d) {
    std::string family = family_of(d);
    if (family == "fock_unitary") {
        return fock_unitary_size(d);
    }
    if (family == "state_prep") {
        return 1;
    }
    return 2;
}

double default_lambda(const Json &d, int T) {
    std::string family = family_of(d);
    if (family == "state_prep") {
        return 0.6;
    }
    if (family == "recovery") {
        return get_string(d, "syndrome", "identity", "target") == "a" && T <= 4 ? 0.6 : 0.4;
    }
    if (family == "logical_op") {
        if (get_string(d, "code", "binomial", "target") == "trivial") {
            return 2.4;
        }
        bool pauli_x_op = find(d, "matrix") == nullptr &&
                          get_string(d, "op", "identity", "target") == "pauli_x";
        return pauli_x_op && T <= 3 ? 1.0 : 0.32;
    }
    if (family == "fock_unitary") {
        std::string kind = get_string(d, "kind", "", "target");
        int n = fock_unitary_size(d);
        if (kind == "inversion") {
            return T <= 8 ? 0.16 : 0.4;
        }
        if (kind == "block_inversion") {
            return 0.8;
        }
        if (kind == "random_permutation") {
            return 1.6;
        }
        return lambda_by_size(n);
    }
    throw_config("unknown target family '" + family + "'", "target.family");
}

void JobSpec::validate() const {
    if (dim < 2) {
        throw_config("dim must be at least 2", "dim");
    }
    if (T < 1) {
        throw_config("T must be at least 1", "T");
    }
    if (job_id.empty() || job_id.find('/') != std::string::npos) {
        throw_config("job_id must be a nonempty name without '/'", "job_id");
    }
    init.validate();
    train.validate();
    if (wigner.enabled && wigner.resolution < 2) {
        throw_config("resolution must be at least 2", "wigner.resolution");
    }
}

JobSpec parse_job(const Json &config) {
    require_object(config, "");
    reject_unknown(config, "", {"job_id", "dim", "T", "target", "init", "train", "output",
                                "strict_saturation", "wigner"});
    JobSpec spec;
    spec.job_id = get_string(config, "job_id", spec.job_id, "");
    spec.dim = to_int(get_int(config, "dim", spec.dim, ""), "dim");
    spec.T = to_int(get_int(config, "T", spec.T, ""), "T");
    spec.output = get_string(config, "output", spec.output.string(), "");
    spec.strict_saturation = get_bool(config, "strict_saturation", false, "");
    const Json *descriptor = find(config, "target");
    if (descriptor == nullptr) {
        throw_config("missing target descriptor", "target");
    }
    spec.target = *descriptor;

    if (const Json *init = find(config, "init")) {
        require_object(*init, "init");
        reject_unknown(*init, "init", {"alpha_grid", "snap_cutoff", "random_first_block",
                                       "auto_detect", "detect_phase_tol", "detect_gain_tol",
                                       "seed"});
        if (const Json *grid = find(*init, "alpha_grid")) {
            spec.init.alpha_grid = parse_reals(*grid, "init.alpha_grid");
        }
        spec.init.snap_cutoff =
            to_int(get_int(*init, "snap_cutoff", spec.init.snap_cutoff, "init"), "init.snap_cutoff");
        spec.init.random_first_block =
            get_bool(*init, "random_first_block", spec.init.random_first_block, "init");
        spec.init.auto_detect = get_bool(*init, "auto_detect", spec.init.auto_detect, "init");
        spec.init.detect_phase_tol =
            get_double(*init, "detect_phase_tol", spec.init.detect_phase_tol, "init");
        spec.init.detect_gain_tol =
            get_double(*init, "detect_gain_tol", spec.init.detect_gain_tol, "init");
        spec.init.seed = get_seed(*init, "seed", spec.init.seed, "init");
    }
    spec.init.T = spec.T;

    if (const Json *train = find(config, "train")) {
        require_object(*train, "train");
        reject_unknown(*train, "train", {"preset", "lambda", "iterations", "eta", "beta1", "beta2",
                                         "epsilon", "clipping", "clip_alpha", "clip_theta",
                                         "log_every", "seed"});
        spec.preset = get_string(*train, "preset", spec.preset, "train");
        if (spec.preset == "standard") {
            spec.train = TrainConfig::standard();
        } else if (spec.preset == "no_clip_high_lr") {
            spec.train = TrainConfig::no_clip_high_lr();
        } else {
            throw_config("unknown preset '" + spec.preset + "'", "train.preset");
        }
        TrainConfig &t = spec.train;
        t.iterations = to_int(get_int(*train, "iterations", t.iterations, "train"),
                              "train.iterations");
        t.eta = get_double(*train, "eta", t.eta, "train");
        t.beta1 = get_double(*train, "beta1", t.beta1, "train");
        t.beta2 = get_double(*train, "beta2", t.beta2, "train");
        t.epsilon = get_double(*train, "epsilon", t.epsilon, "train");
        t.clipping = get_bool(*train, "clipping", t.clipping, "train");
        t.clip_alpha = get_double(*train, "clip_alpha", t.clip_alpha, "train");
        t.clip_theta = get_double(*train, "clip_theta", t.clip_theta, "train");
        t.log_every = to_int(get_int(*train, "log_every", t.log_every, "train"), "train.log_every");
        t.seed = get_seed(*train, "seed", t.seed, "train");
        if (find(*train, "lambda") != nullptr) {
            t.lambda = get_double(*train, "lambda", 0.0, "train");
            spec.lambda_explicit = true;
        }
    }
    if (!spec.lambda_explicit) {
        spec.train.lambda = default_lambda(spec.target, spec.T);
    }

    if (const Json *w = find(config, "wigner")) {
        require_object(*w, "wigner");
        reject_unknown(*w, "wigner", {"enabled", "x", "p", "resolution", "state"});
        spec.wigner.enabled = get_bool(*w, "enabled", true, "wigner");
        if (const Json *x = find(*w, "x")) {
            spec.wigner.x = parse_interval(*x, "wigner.x");
        }
        if (const Json *p = find(*w, "p")) {
            spec.wigner.p = parse_interval(*p, "wigner.p");
        }
        spec.wigner.resolution =
            to_int(get_int(*w, "resolution", spec.wigner.resolution, "wigner"), "wigner.resolution");
        spec.wigner.state = to_int(get_int(*w, "state", spec.wigner.state, "wigner"), "wigner.state");
    }

    spec.validate();
    // Builds the target once so that descriptor errors surface at parse time.
    TargetOperation target = build_target(spec.target, spec.dim);
    if (spec.wigner.enabled &&
        (spec.wigner.state < 0 || spec.wigner.state >= target.logical_dim())) {
        throw_config("no such input state", "wigner.state");
    }
    return spec;
}

Json job_to_json(const JobSpec &spec) {
    const TrainConfig &t = spec.train;
    const InitConfig &i = spec.init;
    Json j;
    j["job_id"] = spec.job_id;
    j["dim"] = spec.dim;
    j["T"] = spec.T;
    j["target"] = spec.target;
    j["init"] = {{"alpha_grid", i.alpha_grid},
                 {"snap_cutoff", i.snap_cutoff},
                 {"random_first_block", i.random_first_block},
                 {"auto_detect", i.auto_detect},
                 {"detect_phase_tol", i.detect_phase_tol},
                 {"detect_gain_tol", i.detect_gain_tol},
                 {"seed", i.seed}};
    j["train"] = {{"preset", spec.preset},   {"lambda", t.lambda},
                  {"iterations", t.iterations}, {"eta", t.eta},
                  {"beta1", t.beta1},         {"beta2", t.beta2},
                  {"epsilon", t.epsilon},     {"clipping", t.clipping},
                  {"clip_alpha", t.clip_alpha}, {"clip_theta", t.clip_theta},
                  {"log_every", t.log_every}, {"seed", t.seed}};
    j["output"] = spec.output.string();
    j["strict_saturation"] = spec.strict_saturation;
    if (spec.wigner.enabled) {
        j["wigner"] = {{"enabled", true},
                       {"x", {spec.wigner.x.lo, spec.wigner.x.hi}},
                       {"p", {spec.wigner.p.lo, spec.wigner.p.hi}},
                       {"resolution", spec.wigner.resolution},
                       {"state", spec.wigner.state}};
    }
    return j;
}

std::string config_hash(const JobSpec &spec) {
    Json j = job_to_json(spec);
    j.erase("output");
    std::string text = j.dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

Json sequence_to_json(const BlockSequence &seq, const SequenceMeta &meta) {
    Json doc;
    doc["dim"] = seq.dim;
    doc["T"] = seq.size();
    Json blocks = Json::array();
    for (const Block &b : seq.blocks) {
        SnapPhases theta = canonical_phases(b.theta);
        blocks.push_back({{"alpha", b.alpha},
                          {"theta", std::vector<double>(theta.data(), theta.data() + theta.size())}});
    }
    doc["blocks"] = blocks;
    if (!seq.empty()) {
        NativeSequence native = to_native(seq);
        Json snaps = Json::array();
        for (const SnapPhases &s : native.snaps) {
            SnapPhases c = canonical_phases(s);
            snaps.push_back(std::vector<double>(c.data(), c.data() + c.size()));
        }
        doc["native"] = {{"displacements", native.displacements}, {"snaps", snaps}};
    } else {
        doc["native"] = {{"displacements", Json::array({0.0})}, {"snaps", Json::array()}};
    }
    doc["meta"] = {{"seeds",
                    {{"init", meta.init_seed},
                     {"train", meta.train_seed},
                     {"target", meta.target_seed}}},
                   {"config_hash", meta.config_hash},
                   {"rng", std::string(Rng::kName) + " v" + std::to_string(Rng::kVersion)}};
    return doc;
}

BlockSequence sequence_from_json(const Json &doc) {
    require_object(doc, "");
    BlockSequence seq;
    seq.dim = to_int(get_int(doc, "dim", kDefaultDim, ""), "dim");
    if (seq.dim < 2) {
        throw_config("dim must be at least 2", "dim");
    }
    const Json *blocks = find(doc, "blocks");
    if (blocks == nullptr || !blocks->is_array()) {
        throw_config("expected an array of blocks", "blocks");
    }
    for (std::size_t t = 0; t < blocks->size(); ++t) {
        const Json &b = (*blocks)[t];
        std::string path = index("blocks", t);
        require_object(b, path);
        Block blk;
        if (find(b, "alpha") == nullptr) {
            throw_config("missing alpha", join(path, "alpha"));
        }
        blk.alpha = get_double(b, "alpha", 0.0, path);
        const Json *theta = find(b, "theta");
        if (theta == nullptr) {
            throw_config("missing theta", join(path, "theta"));
        }
        std::vector<double> phases = parse_reals(*theta, join(path, "theta"));
        if (static_cast<int>(phases.size()) != seq.dim) {
            throw_config("theta has " + std::to_string(phases.size()) + " entries, expected " +
                             std::to_string(seq.dim),
                         join(path, "theta"));
        }
        blk.theta = Eigen::Map<SnapPhases>(phases.data(), seq.dim);
        seq.blocks.push_back(std::move(blk));
    }
    if (const Json *t = find(doc, "T")) {
        if (!t->is_number_integer() || t->get<long long>() != seq.size()) {
            throw_config("T does not match the number of blocks", "T");
        }
    }
    seq.validate();
    return seq;
}

Json report_to_json(const ObjectiveReport &r) {
    return {{"fidelity", r.fidelity},
            {"infidelity", 1.0 - r.fidelity},
            {"nbar_forward", r.nbar_forward},
            {"nbar_reverse", r.nbar_reverse},
            {"photon_cost", r.photon_cost},
            {"lambda", r.lambda},
            {"total_cost", r.total_cost},
            {"non_leakage", r.non_leakage},
            {"saturated", r.saturated}};
}

Json init_trace_to_json(const InitTrace &trace) {
    Json records = Json::array();
    for (const InsertionRecord &r : trace.records) {
        records.push_back({{"step", r.step},
                           {"slot", r.slot},
                           {"index", r.index},
                           {"alpha", r.alpha},
                           {"fidelity", r.fidelity},
                           {"random", r.random}});
    }
    return {{"initial_fidelity", trace.initial_fidelity},
            {"auto_detected", trace.auto_detected},
            {"random_first", trace.random_first},
            {"records", records}};
}

Json checkpoint_to_json(const BlockSequence &seq, const OptimizerState &state) {
    Json blocks = Json::array();
    for (const Block &b : seq.blocks) {
        blocks.push_back(
            {{"alpha", b.alpha},
             {"theta", std::vector<double>(b.theta.data(), b.theta.data() + b.theta.size())}});
    }
    return {{"dim", seq.dim},
            {"T", seq.size()},
            {"blocks", blocks},
            {"optimizer",
             {{"step", state.step},
              {"m", std::vector<double>(state.m.data(), state.m.data() + state.m.size())},
              {"v", std::vector<double>(state.v.data(), state.v.data() + state.v.size())}}}};
}

std::pair<BlockSequence, OptimizerState> checkpoint_from_json(const Json &doc) {
    BlockSequence seq = sequence_from_json(doc);
    const Json *opt = find(doc, "optimizer");
    if (opt == nullptr) {
        throw_config("missing optimizer state", "optimizer");
    }
    require_object(*opt, "optimizer");
    OptimizerState state;
    state.step = static_cast<long>(get_int(*opt, "step", 0, "optimizer"));
    std::vector<double> m = parse_reals(opt->value("m", Json::array()), "optimizer.m");
    std::vector<double> v = parse_reals(opt->value("v", Json::array()), "optimizer.v");
    std::size_t n = static_cast<std::size_t>(seq.size()) * (seq.dim + 1);
    if (m.size() != n || v.size() != n) {
        throw_config("optimizer moments do not match the sequence", "optimizer");
    }
    state.m = Eigen::Map<Eigen::VectorXd>(m.data(), n);
    state.v = Eigen::Map<Eigen::VectorXd>(v.data(), n);
    return {seq, state};
}

namespace {

std::ofstream open_output(const fs::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw_config("cannot write " + path.string(), "output");
    }
    return out;
}

}  // namespace

void write_init_csv(const fs::path &path, const InitTrace &trace) {
    std::ofstream out = open_output(path);
    out << "step,slot,index,alpha,fidelity,random\n";
    out << "-1,0,-1,0," << format_double(trace.initial_fidelity) << ",0\n";
    for (const InsertionRecord &r : trace.records) {
        out << r.step << ',' << r.slot << ',' << r.index << ',' << format_double(r.alpha) << ','
            << format_double(r.fidelity) << ',' << (r.random ? 1 : 0) << '\n';
    }
}

void write_train_csv(const fs::path &path, const TrainTrace &trace) {
    std::ofstream out = open_output(path);
    out << "iteration,fidelity,photon_cost,total_cost,max_grad_alpha,max_grad_theta,saturated\n";
    for (const TrainRecord &r : trace.records) {
        out << r.iteration << ',' << format_double(r.fidelity) << ','
            << format_double(r.photon_cost) << ',' << format_double(r.total_cost) << ','
            << format_double(r.max_grad_alpha) << ',' << format_double(r.max_grad_theta) << ','
            << (r.saturated ? 1 : 0) << '\n';
    }
}

Json read_json_file(const fs::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw_config("cannot open " + path.string(), path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    try {
        return Json::parse(text);
    } catch (const Json::parse_error &e) {
        std::size_t upto = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
        std::size_t line = 1 + std::count(text.begin(), text.begin() + upto, '\n');
        std::size_t last = text.rfind('\n', upto == 0 ? 0 : upto - 1);
        std::size_t column = last == std::string::npos || upto == 0 ? upto + 1 : upto - last;
        throw_config("parse error: " + std::string(e.what()),
                     path.string() + ":" + std::to_string(line) + ":" + std::to_string(column));
    }
}

void write_json_file(const fs::path &path, const Json &doc) {
    std::ofstream out = open_output(path);
    out << doc.dump(2) << '\n';
}

std::vector<Eigen::MatrixXd> wigner_snapshots(const TargetOperation &target,
                                              const BlockSequence &seq, const WignerExport &opts) {
    if (opts.state < 0 || opts.state >= target.logical_dim()) {
        throw_config("no such input state", "wigner.state");
    }
    std::vector<Eigen::MatrixXd> grids;
    StateVector psi = target.inputs().col(opts.state);
    grids.push_back(wigner_grid(psi, opts.x, opts.p, opts.resolution));
    for (const Block &b : seq.blocks) {
        BlockSequence one;
        one.dim = seq.dim;
        one.blocks.push_back(b);
        psi = apply_sequence(one, psi);
        grids.push_back(wigner_grid(psi, opts.x, opts.p, opts.resolution));
    }
    return grids;
}

void write_wigner_csv(const fs::path &path, const Eigen::MatrixXd &grid,
                      const WignerExport &opts) {
    std::ofstream out = open_output(path);
    out << "x,p,wigner\n";
    int r = opts.resolution;
    for (int i = 0; i < r; ++i) {
        double x = opts.x.lo + (opts.x.hi - opts.x.lo) * i / (r - 1);
        for (int k = 0; k < r; ++k) {
            double p = opts.p.lo + (opts.p.hi - opts.p.lo) * k / (r - 1);
            out << format_double(x) << ',' << format_double(p) << ','
                << format_double(grid(i, k)) << '\n';
        }
    }
}

namespace {

SequenceMeta meta_for(const JobSpec &spec) {
    SequenceMeta meta;
    meta.init_seed = spec.init.seed;
    meta.train_seed = spec.train.seed;
    if (spec.target.is_object()) {
        meta.target_seed = get_seed(spec.target, "seed", 0, "target");
    }
    meta.config_hash = config_hash(spec);
    return meta;
}

void prepare_output(const JobSpec &spec) {
    std::error_code ec;
    fs::create_directories(spec.output, ec);
    if (ec) {
        throw_config("cannot create " + spec.output.string() + ": " + ec.message(), "output");
    }
    Json echo = job_to_json(spec);
    echo["lambda_source"] = spec.lambda_explicit ? "explicit" : "default";
    echo["config_hash"] = config_hash(spec);
    write_json_file(spec.output / "config.json", echo);
}

void finish(const JobSpec &spec, const TargetOperation &target, JobResult &result,
            const OptimizerState &optimizer) {
    SequenceMeta meta = meta_for(spec);
    write_json_file(spec.output / "sequence.json", sequence_to_json(result.final_sequence, meta));
    write_json_file(spec.output / "checkpoint.json",
                    checkpoint_to_json(result.final_sequence, optimizer));
    result.report = total_cost(target, result.final_sequence, spec.train.lambda);
    Json report = report_to_json(result.report);
    report["job_id"] = spec.job_id;
    report["T"] = spec.T;
    report["dim"] = spec.dim;
    report["saturated_at_start"] = result.saturated_at_start;
    report["wall_seconds"] = result.wall_seconds;
    write_json_file(spec.output / "report.json", report);
    if (spec.wigner.enabled) {
        std::vector<Eigen::MatrixXd> grids =
            wigner_snapshots(target, result.final_sequence, spec.wigner);
        for (std::size_t k = 0; k < grids.size(); ++k) {
            write_wigner_csv(spec.output / ("wigner_" + std::to_string(k) + ".csv"), grids[k],
                             spec.wigner);
        }
    }
}

JobResult finetune_stage(const JobSpec &spec, const TargetOperation &target,
                         const BlockSequence &start, const OptimizerState *resume,
                         const JobProgress &progress,
                         std::chrono::steady_clock::time_point t0) {
    JobResult result;
    result.initial = start;
    check_compatible(target, start);
    bool saturated = false;
    log_infidelity(fidelity(target, start), &saturated);
    result.saturated_at_start = saturated;
    if (saturated && spec.strict_saturation) {
        throw SnapError(ErrorKind::Saturation, "fidelity is saturated before finetuning");
    }
    ProgressCallback cb;
    if (progress) {
        cb = [&](const TrainRecord &r) { progress(spec, r); };
    }
    FinetuneResult fr = finetune(target, start, spec.train, cb, resume);
    result.train_trace = fr.trace;
    write_train_csv(spec.output / "train_trace.csv", fr.trace);
    if (fr.status == FinetuneStatus::NumericAbort) {
        throw_numeric(fr.message);
    }
    result.final_sequence = fr.sequence;
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    finish(spec, target, result, fr.optimizer);
    return result;
}

}  // namespace

InitResult run_init(const JobSpec &spec) {
    spec.validate();
    prepare_output(spec);
    TargetOperation target = build_target(spec.target, spec.dim);
    InitConfig cfg = spec.init;
    cfg.T = spec.T;
    InitResult init = initialize(target, cfg);
    write_init_csv(spec.output / "init_trace.csv", init.trace);
    write_json_file(spec.output / "init_trace.json", init_trace_to_json(init.trace));
    write_json_file(spec.output / "sequence.json", sequence_to_json(init.sequence, meta_for(spec)));
    return init;
}

JobResult run_finetune(const JobSpec &spec, const BlockSequence &start,
                       const OptimizerState *resume, const JobProgress &progress) {
    auto t0 = std::chrono::steady_clock::now();
    spec.validate();
    prepare_output(spec);
    TargetOperation target = build_target(spec.target, spec.dim);
    return finetune_stage(spec, target, start, resume, progress, t0);
}

JobResult run_job(const JobSpec &spec, const JobProgress &progress) {
    auto t0 = std::chrono::steady_clock::now();
    InitResult init = run_init(spec);
    TargetOperation target = build_target(spec.target, spec.dim);
    JobResult result = finetune_stage(spec, target, init.sequence, nullptr, progress, t0);
    result.init_trace = init.trace;
    return result;
}

std::string evaluate(const Json &sequence_doc, const Json &target_descriptor, double lambda) {
    BlockSequence seq = sequence_from_json(sequence_doc);
    TargetOperation target = build_target(target_descriptor, seq.dim);
    return report_to_json(total_cost(target, seq, lambda)).dump(2);
}

SweepSpec parse_sweep(const Json &config) {
    require_object(config, "");
    const Json *sweep = find(config, "sweep");
    if (sweep == nullptr) {
        throw_config("missing sweep section", "sweep");
    }
    require_object(*sweep, "sweep");
    reject_unknown(*sweep, "sweep", {"T", "N"});
    Json base = config;
    base.erase("sweep");
    JobSpec base_spec = parse_job(base);

    std::vector<int> ts = {base_spec.T};
    if (const Json *t = find(*sweep, "T")) {
        ts = parse_ints(*t, "sweep.T");
    }
    std::vector<int> ns;
    if (const Json *n = find(*sweep, "N")) {
        ns = parse_ints(*n, "sweep.N");
        if (family_of(base_spec.target) != "fock_unitary") {
            throw_config("an N grid needs a fock_unitary target", "sweep.N");
        }
    }
    if (ts.empty()) {
        throw_config("empty T grid", "sweep.T");
    }

    SweepSpec out;
    out.output = base_spec.output;
    std::vector<int> n_axis = ns.empty() ? std::vector<int>{0} : ns;
    for (int n : n_axis) {
        for (int t : ts) {
            Json job = base;
            job["T"] = t;
            std::string id = base_spec.job_id;
            if (n > 0) {
                job["target"]["N"] = n;
                id += "_N" + std::to_string(n);
            }
            id += "_T" + std::to_string(t);
            job["job_id"] = id;
            job["output"] = (base_spec.output / id).string();
            out.jobs.push_back(parse_job(job));
        }
    }
    return out;
}

std::vector<SweepRow> run_sweep(const SweepSpec &sweep, const JobProgress &progress) {
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("SNAPSEQ_WORKERS")) {
        int w = 0;
        auto res = std::from_chars(env, env + std::char_traits<char>::length(env), w);
        if (res.ec != std::errc() || *res.ptr != '\0' || w < 1) {
            throw_config("SNAPSEQ_WORKERS must be a positive integer", "SNAPSEQ_WORKERS");
        }
        workers = static_cast<unsigned>(w);
    }
    workers = std::min<unsigned>(workers, std::max<std::size_t>(1, sweep.jobs.size()));

    std::vector<SweepRow> rows(sweep.jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    JobProgress locked;
    if (progress) {
        locked = [&](const JobSpec &s, const TrainRecord &r) {
            std::lock_guard<std::mutex> lock(progress_mutex);
            progress(s, r);
        };
    }
    auto worker = [&] {
        for (std::size_t i = next++; i < sweep.jobs.size(); i = next++) {
            const JobSpec &spec = sweep.jobs[i];
            SweepRow &row = rows[i];
            row.job_id = spec.job_id;
            row.T = spec.T;
            row.N = descriptor_size(spec.target);
            row.lambda = spec.train.lambda;
            try {
                row.report = run_job(spec, locked).report;
            } catch (const std::exception &e) {
                row.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    for (std::thread &th : pool) {
        th.join();
    }

    std::error_code ec;
    fs::create_directories(sweep.output, ec);
    std::ofstream out = open_output(sweep.output / "sweep.csv");
    out << "job_id,N,T,lambda,fidelity,neg_log_infidelity,photon_cost,total_cost,non_leakage,error\n";
    for (const SweepRow &r : rows) {
        out << r.job_id << ',' << r.N << ',' << r.T << ',' << format_double(r.lambda) << ',';
        if (r.error.empty()) {
            out << format_double(r.report.fidelity) << ','
                << format_double(-std::log(std::max(1.0 - r.report.fidelity, 1e-15))) << ','
                << format_double(r.report.photon_cost) << ','
                << format_double(r.report.total_cost) << ','
                << format_double(r.report.non_leakage) << ",\n";
        } else {
            std::string msg = r.error;
            std::replace(msg.begin(), msg.end(), '"', '\'');
            out << ",,,,,\"" << msg << "\"\n";
        }
    }
    return rows;
}

int exit_code(ErrorKind kind) {
    return kind == ErrorKind::Config ? 2 : 3;
}

Json error_json(const SnapError &err) {
    Json e = {{"kind", error_kind_name(err.kind())}, {"message", err.what()}};
    if (!err.field().empty()) {
        e["field"] = err.field();
    }
    return {{"error", e}};
}

}  // namespace snapseq
