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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "snapseq/job.h"

using namespace snapseq;

namespace {

struct Overrides {
    std::string config;
    std::string target;
    std::optional<int> dim;
    std::optional<int> T;
    std::optional<double> lambda;
    std::optional<int> iterations;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
    bool quiet = false;
};

void add_job_flags(CLI::App *cmd, Overrides &o, bool need_config) {
    auto *config = cmd->add_option("--config", o.config, "Job file (JSON)");
    if (need_config) {
        config->required();
    }
    cmd->add_option("--target", o.target, "Target descriptor as inline JSON");
    cmd->add_option("--dim", o.dim, "Fock truncation");
    cmd->add_option("--T", o.T, "Number of building blocks");
    cmd->add_option("--lambda", o.lambda, "Photon-cost coefficient");
    cmd->add_option("--iterations", o.iterations, "Finetuning iterations");
    cmd->add_option("--seed", o.seed, "Seed for initialization and training");
    cmd->add_option("--output", o.output, "Output directory");
    cmd->add_flag("--quiet", o.quiet, "No progress lines on stderr");
}

Json load_config(const Overrides &o) {
    Json cfg = o.config.empty() ? Json::object() : read_json_file(o.config);
    if (!cfg.is_object()) {
        throw_config("expected an object", o.config);
    }
    if (!o.target.empty()) {
        try {
            cfg["target"] = Json::parse(o.target);
        } catch (const Json::parse_error &e) {
            throw_config(std::string("bad target JSON: ") + e.what(), "--target");
        }
    }
    if (o.dim) {
        cfg["dim"] = *o.dim;
    }
    if (o.T) {
        cfg["T"] = *o.T;
    }
    if (o.lambda) {
        cfg["train"]["lambda"] = *o.lambda;
    }
    if (o.iterations) {
        cfg["train"]["iterations"] = *o.iterations;
    }
    if (o.seed) {
        cfg["init"]["seed"] = *o.seed;
        cfg["train"]["seed"] = *o.seed;
    }
    if (o.output) {
        cfg["output"] = *o.output;
    }
    return cfg;
}

JobProgress reporter(bool quiet) {
    if (quiet) {
        return {};
    }
    return [](const JobSpec &spec, const TrainRecord &r) {
        if (r.iteration % (10L * spec.train.log_every) == 0 ||
            r.iteration == spec.train.iterations) {
            std::fprintf(stderr, "[%s] iter %ld  F %.9f  nbar %.4f  cost %.6f\n",
                         spec.job_id.c_str(), r.iteration, r.fidelity, r.photon_cost,
                         r.total_cost);
        }
    };
}

void print_summary(const JobSpec &spec, const ObjectiveReport &report) {
    Json out = report_to_json(report);
    out["job_id"] = spec.job_id;
    out["output"] = spec.output.string();
    std::cout << out.dump(2) << '\n';
}

int fail(const SnapError &e) {
    std::cout << error_json(e).dump(2) << '\n';
    return exit_code(e.kind());
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Synthesis of SNAP-displacement gate sequences"};
    app.require_subcommand(1);

    Overrides o;
    std::string sequence_file;
    std::string resume_file;
    int resolution = 101;
    int state = 0;
    double range = 5.0;

    CLI::App *init = app.add_subcommand("init", "Greedy initialization only");
    add_job_flags(init, o, false);

    CLI::App *fine = app.add_subcommand("finetune", "Finetune a stored sequence");
    add_job_flags(fine, o, false);
    fine->add_option("--sequence", sequence_file, "Sequence file to start from");
    fine->add_option("--resume", resume_file, "Checkpoint file (parameters and Adam moments)");

    CLI::App *run = app.add_subcommand("run", "Initialize, finetune and evaluate");
    add_job_flags(run, o, false);

    CLI::App *eval = app.add_subcommand("evaluate", "Recompute all objectives of a sequence");
    add_job_flags(eval, o, false);
    eval->add_option("--sequence", sequence_file, "Sequence file")->required();

    CLI::App *sweep = app.add_subcommand("sweep", "Grid of jobs over T and N");
    add_job_flags(sweep, o, true);

    CLI::App *wig = app.add_subcommand("wigner", "Wigner grids after every block");
    add_job_flags(wig, o, false);
    wig->add_option("--sequence", sequence_file, "Sequence file")->required();
    wig->add_option("--resolution", resolution, "Grid points per axis");
    wig->add_option("--state", state, "Index of the followed input state");
    wig->add_option("--range", range, "Half width of the square x, p window");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        return fail(SnapError(ErrorKind::Config, e.what()));
    }

    try {
        Json cfg = load_config(o);
        if (*init) {
            JobSpec spec = parse_job(cfg);
            InitResult r = run_init(spec);
            Json out = init_trace_to_json(r.trace);
            out["job_id"] = spec.job_id;
            out["output"] = spec.output.string();
            std::cout << out.dump(2) << '\n';
        } else if (*fine) {
            if (sequence_file.empty() == resume_file.empty()) {
                throw_config("give exactly one of --sequence and --resume", "--sequence");
            }
            BlockSequence start;
            std::optional<OptimizerState> resume;
            if (!resume_file.empty()) {
                auto [seq, opt] = checkpoint_from_json(read_json_file(resume_file));
                start = seq;
                resume = opt;
            } else {
                start = sequence_from_json(read_json_file(sequence_file));
            }
            if (!cfg.contains("dim")) {
                cfg["dim"] = start.dim;
            }
            if (!cfg.contains("T")) {
                cfg["T"] = start.size();
            }
            JobSpec spec = parse_job(cfg);
            if (spec.T != start.size() || spec.dim != start.dim) {
                throw_config("sequence does not match the job's T and dim", "T");
            }
            JobResult r = run_finetune(spec, start, resume ? &*resume : nullptr, reporter(o.quiet));
            print_summary(spec, r.report);
        } else if (*run) {
            JobSpec spec = parse_job(cfg);
            JobResult r = run_job(spec, reporter(o.quiet));
            print_summary(spec, r.report);
        } else if (*eval || *wig) {
            Json doc = read_json_file(sequence_file);
            BlockSequence seq = sequence_from_json(doc);
            cfg["dim"] = seq.dim;
            cfg["T"] = std::max(1, seq.size());
            JobSpec spec = parse_job(cfg);
            if (*eval) {
                std::string report = evaluate(doc, spec.target, spec.train.lambda);
                if (o.output) {
                    std::filesystem::path dir = *o.output;
                    std::filesystem::create_directories(dir);
                    write_json_file(dir / "report.json", Json::parse(report));
                }
                std::cout << report << '\n';
            } else {
                WignerExport opts;
                opts.enabled = true;
                opts.x = {-range, range};
                opts.p = {-range, range};
                opts.resolution = resolution;
                opts.state = state;
                TargetOperation target = build_target(spec.target, seq.dim);
                std::vector<Eigen::MatrixXd> grids = wigner_snapshots(target, seq, opts);
                std::filesystem::create_directories(spec.output);
                for (std::size_t k = 0; k < grids.size(); ++k) {
                    write_wigner_csv(spec.output / ("wigner_" + std::to_string(k) + ".csv"),
                                     grids[k], opts);
                }
                std::cout << Json{{"snapshots", grids.size()}, {"output", spec.output.string()}}
                                 .dump(2)
                          << '\n';
            }
        } else if (*sweep) {
            SweepSpec spec = parse_sweep(cfg);
            std::vector<SweepRow> rows = run_sweep(spec, reporter(o.quiet));
            int failed = 0;
            for (const SweepRow &r : rows) {
                failed += r.error.empty() ? 0 : 1;
            }
            std::cout << Json{{"jobs", rows.size()},
                              {"failed", failed},
                              {"csv", (spec.output / "sweep.csv").string()}}
                             .dump(2)
                      << '\n';
            return failed == 0 ? 0 : 3;
        }
    } catch (const SnapError &e) {
        return fail(e);
    } catch (const std::filesystem::filesystem_error &e) {
        return fail(SnapError(ErrorKind::Config, e.what()));
    } catch (const std::exception &e) {
        return fail(SnapError(ErrorKind::Numeric, e.what()));
    }
    return 0;
}
