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

#include "snapseq/finetuner.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "snapseq/errors.h"

namespace snapseq {

namespace {

const cdouble kI(0.0, 1.0);

/// Sum over columns l of <p_l| dB |q_l> for one block, given D p, D K p, D q,
/// D K q in Fock coordinates and the SNAP diagonal s.
struct BlockDerivative {
    cdouble alpha;
    Eigen::VectorXcd theta;
};

BlockDerivative block_derivative(const StateSet &dp, const StateSet &dkp, const StateSet &dq,
                                 const StateSet &dkq, const Eigen::VectorXcd &s) {
    BlockDerivative out;
    Eigen::VectorXcd diag = dp.conjugate().cwiseProduct(dq).rowwise().sum();
    out.theta = kI * s.cwiseProduct(diag);
    Eigen::VectorXcd mixed =
        (dp.conjugate().cwiseProduct(dkq) + dkp.conjugate().cwiseProduct(dq)).rowwise().sum();
    out.alpha = s.cwiseProduct(mixed).sum();
    return out;
}

}  // namespace

TrainConfig TrainConfig::standard() {
    return TrainConfig{};
}

TrainConfig TrainConfig::no_clip_high_lr() {
    TrainConfig cfg;
    cfg.eta = 2.5e-4;
    cfg.beta2 = 0.99;
    cfg.clipping = false;
    return cfg;
}

void TrainConfig::validate() const {
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw_config("lambda must be finite and nonnegative", "train.lambda");
    }
    if (iterations < 0) {
        throw_config("iterations must be nonnegative", "train.iterations");
    }
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw_config("eta must be positive", "train.eta");
    }
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        throw_config("epsilon must be positive", "train.epsilon");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0)) {
        throw_config("beta1 must lie in [0, 1)", "train.beta1");
    }
    if (!(beta2 >= 0.0 && beta2 < 1.0)) {
        throw_config("beta2 must lie in [0, 1)", "train.beta2");
    }
    if (!(clip_alpha > 0.0) || !(clip_theta > 0.0)) {
        throw_config("clip bounds must be positive", "train.clip_alpha");
    }
    if (log_every < 1) {
        throw_config("log_every must be at least 1", "train.log_every");
    }
}

Gradient Gradient::zero(int T, int dim) {
    Gradient g;
    g.alpha.assign(T, 0.0);
    g.theta = Eigen::MatrixXd::Zero(T, dim);
    return g;
}

Gradient &Gradient::operator+=(const Gradient &other) {
    for (std::size_t t = 0; t < alpha.size(); ++t) {
        alpha[t] += other.alpha[t];
    }
    theta += other.theta;
    return *this;
}

Gradient Gradient::scaled(double factor) const {
    Gradient g = *this;
    for (double &a : g.alpha) {
        a *= factor;
    }
    g.theta *= factor;
    return g;
}

CostGradient cost_gradient(const TargetOperation &target, const BlockSequence &seq,
                           double lambda) {
    check_compatible(target, seq);
    const int T = seq.size();
    const int dim = seq.dim;
    const int L = target.logical_dim();
    const double inv_l = 1.0 / L;

    CostGradient out;
    out.overlap = Gradient::zero(T, dim);
    out.photon = Gradient::zero(T, dim);

    const DisplacementBasis &basis = displacement_basis(dim);
    const ComplexMatrix &w = basis.eigenvectors();
    const ComplexMatrix wh = w.adjoint();
    const Eigen::VectorXcd ilam = kI * basis.eigenvalues().cast<cdouble>();
    const Eigen::VectorXcd number = number_diagonal(dim).cast<cdouble>();

    std::vector<Eigen::VectorXcd> e(T);
    std::vector<Eigen::VectorXcd> s(T);
    for (int t = 0; t < T; ++t) {
        e[t] = basis.phases(seq.blocks[t].alpha);
        s[t] = seq.blocks[t].theta.unaryExpr([](double x) { return std::polar(1.0, x); });
    }

    // Forward sweep: u[t] = D_t f_{t-1}, uk[t] = D_t K f_{t-1}.
    std::vector<StateSet> u(T);
    std::vector<StateSet> uk(T);
    StateSet eig = wh * target.inputs();
    for (int t = 0; t < T; ++t) {
        StateSet a = e[t].asDiagonal() * eig;
        u[t] = w * a;
        uk[t] = w * (ilam.asDiagonal() * a);
        eig.noalias() = e[t].conjugate().asDiagonal() * (wh * (s[t].asDiagonal() * u[t]));
    }
    StateSet final_states = w * eig;
    cdouble z = target.outputs().conjugate().cwiseProduct(final_states).sum();
    double absz = std::abs(z);
    out.fidelity = absz * inv_l;
    double log_term = log_infidelity(out.fidelity, &out.saturated);
    // d ln(1 - F) = Re(coef * dz) with coef = -conj(z) / (|z| (L - |z|)).
    cdouble phase = absz > 0.0 ? std::conj(z) / absz : cdouble(1.0, 0.0);
    cdouble coef = out.saturated ? cdouble(0.0, 0.0) : -phase / (L - absz);

    // Backward sweep of the outputs, with the forward photon adjoint
    // lambda_t = X_t f_t carried along in eigen coordinates.
    std::vector<StateSet> wv(T);
    std::vector<StateSet> wk(T);
    StateSet back = wh * target.outputs();
    StateSet adj = StateSet::Zero(dim, L);
    std::vector<double> nbar(T);
    std::vector<double> nbar_rev(T);
    for (int t = T - 1; t >= 0; --t) {
        StateSet c = e[t].asDiagonal() * back;
        wv[t] = w * c;
        wk[t] = w * (ilam.asDiagonal() * c);

        BlockDerivative dz = block_derivative(wv[t], wk[t], u[t], uk[t], s[t]);
        out.overlap.alpha[t] = std::real(coef * dz.alpha);
        out.overlap.theta.row(t) = (coef * dz.theta).real().transpose();

        nbar[t] = inv_l * number.real().dot(u[t].cwiseAbs2().rowwise().sum());
        double direct = 2.0 * inv_l *
                        std::real(u[t].conjugate().cwiseProduct(number.asDiagonal() * uk[t]).sum());
        StateSet p = w * (e[t].asDiagonal() * adj);
        if (t < T - 1) {
            StateSet pk = w * (ilam.asDiagonal() * (e[t].asDiagonal() * adj));
            BlockDerivative dn = block_derivative(p, pk, u[t], uk[t], s[t]);
            out.photon.alpha[t] += inv_l * std::real(dn.alpha);
            out.photon.theta.row(t) += inv_l * dn.theta.real().transpose();
        }
        out.photon.alpha[t] += 0.5 * direct;

        back.noalias() = e[t].conjugate().asDiagonal() * (wh * (s[t].conjugate().asDiagonal() * wv[t]));
        StateSet src = s[t].conjugate().asDiagonal() * p + number.asDiagonal() * u[t];
        adj.noalias() = e[t].conjugate().asDiagonal() * (wh * src);
    }

    // Forward sweep of the reverse photon adjoint mu_t = Y_t b_{t-1}.
    StateSet mu = StateSet::Zero(dim, L);
    for (int t = 0; t < T; ++t) {
        nbar_rev[t] = inv_l * number.real().dot(wv[t].cwiseAbs2().rowwise().sum());
        double direct = 2.0 * inv_l *
                        std::real(wv[t].conjugate().cwiseProduct(number.asDiagonal() * wk[t]).sum());
        StateSet q = w * (e[t].asDiagonal() * mu);
        if (t > 0) {
            StateSet qk = w * (ilam.asDiagonal() * (e[t].asDiagonal() * mu));
            BlockDerivative dn = block_derivative(wv[t], wk[t], q, qk, s[t]);
            out.photon.alpha[t] += inv_l * std::real(dn.alpha);
            out.photon.theta.row(t) += inv_l * dn.theta.real().transpose();
        }
        out.photon.alpha[t] += 0.5 * direct;
        StateSet src = s[t].asDiagonal() * q + number.asDiagonal() * wv[t];
        mu.noalias() = e[t].conjugate().asDiagonal() * (wh * src);
    }

    for (int t = 0; t < T; ++t) {
        out.photon_cost += 0.5 * (nbar[t] + nbar_rev[t]);
    }
    out.total_cost = log_term + lambda * out.photon_cost;
    out.total = out.overlap;
    out.total += out.photon.scaled(lambda);
    return out;
}

Gradient overlap_gradient(const TargetOperation &target, const BlockSequence &seq,
                          bool *saturated) {
    CostGradient cg = cost_gradient(target, seq, 0.0);
    if (saturated != nullptr) {
        *saturated = cg.saturated;
    }
    return cg.overlap;
}

Gradient photon_gradient(const TargetOperation &target, const BlockSequence &seq) {
    return cost_gradient(target, seq, 0.0).photon;
}

double clip(double grad, double bound) {
    return std::clamp(grad, -bound, bound);
}

Eigen::VectorXd pack_parameters(const BlockSequence &seq) {
    Eigen::Index stride = seq.dim + 1;
    Eigen::VectorXd p(stride * seq.size());
    for (int t = 0; t < seq.size(); ++t) {
        p[t * stride] = seq.blocks[t].alpha;
        p.segment(t * stride + 1, seq.dim) = seq.blocks[t].theta;
    }
    return p;
}

void unpack_parameters(const Eigen::VectorXd &params, BlockSequence &seq) {
    Eigen::Index stride = seq.dim + 1;
    if (params.size() != stride * seq.size()) {
        throw_config("parameter vector length does not match the sequence");
    }
    for (int t = 0; t < seq.size(); ++t) {
        seq.blocks[t].alpha = params[t * stride];
        seq.blocks[t].theta = params.segment(t * stride + 1, seq.dim);
    }
}

Eigen::VectorXd pack_gradient(const Gradient &grad) {
    auto T = static_cast<Eigen::Index>(grad.alpha.size());
    Eigen::Index dim = grad.theta.cols();
    Eigen::Index stride = dim + 1;
    Eigen::VectorXd g(stride * T);
    for (Eigen::Index t = 0; t < T; ++t) {
        g[t * stride] = grad.alpha[t];
        g.segment(t * stride + 1, dim) = grad.theta.row(t).transpose();
    }
    return g;
}

OptimizerState OptimizerState::zeros(Eigen::Index n) {
    OptimizerState s;
    s.m = Eigen::VectorXd::Zero(n);
    s.v = Eigen::VectorXd::Zero(n);
    return s;
}

void adam_step(OptimizerState &state, Eigen::VectorXd &params, const Eigen::VectorXd &grads,
               const TrainConfig &cfg) {
    if (state.m.size() != params.size() || state.v.size() != params.size() ||
        grads.size() != params.size()) {
        throw_config("optimizer state does not match the parameter count");
    }
    ++state.step;
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads;
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grads.cwiseAbs2();
    double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        double mhat = state.m[i] / c1;
        double vhat = state.v[i] / c2;
        params[i] -= cfg.eta * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
}

namespace {

TrainRecord make_record(long iteration, const CostGradient &cg) {
    TrainRecord r;
    r.iteration = iteration;
    r.fidelity = cg.fidelity;
    r.photon_cost = cg.photon_cost;
    r.total_cost = cg.total_cost;
    r.saturated = cg.saturated;
    for (double a : cg.total.alpha) {
        r.max_grad_alpha = std::max(r.max_grad_alpha, std::abs(a));
    }
    if (cg.total.theta.size() > 0) {
        r.max_grad_theta = cg.total.theta.cwiseAbs().maxCoeff();
    }
    return r;
}

}  // namespace

FinetuneResult finetune(const TargetOperation &target, const BlockSequence &seq,
                        const TrainConfig &cfg, const ProgressCallback &progress,
                        const OptimizerState *resume) {
    cfg.validate();
    check_compatible(target, seq);
    FinetuneResult result;
    result.sequence = seq;
    Eigen::VectorXd params = pack_parameters(seq);
    result.optimizer = resume != nullptr ? *resume : OptimizerState::zeros(params.size());
    if (result.optimizer.m.size() != params.size()) {
        throw_config("resumed optimizer state does not match the sequence", "optimizer");
    }
    long start = result.optimizer.step;

    auto emit = [&](const TrainRecord &r) {
        result.trace.records.push_back(r);
        if (progress) {
            progress(r);
        }
    };

    if (seq.empty()) {
        emit(make_record(start, cost_gradient(target, seq, cfg.lambda)));
        return result;
    }

    Eigen::Index stride = seq.dim + 1;
    for (long k = 0; k < cfg.iterations; ++k) {
        CostGradient cg = cost_gradient(target, result.sequence, cfg.lambda);
        if (!std::isfinite(cg.total_cost)) {
            result.status = FinetuneStatus::NumericAbort;
            result.message = "nonfinite cost at iteration " + std::to_string(start + k);
            return result;
        }
        if (k % cfg.log_every == 0) {
            emit(make_record(start + k, cg));
        }
        Eigen::VectorXd g = pack_gradient(cg.total);
        if (!g.allFinite()) {
            result.status = FinetuneStatus::NumericAbort;
            result.message = "nonfinite gradient at iteration " + std::to_string(start + k);
            return result;
        }
        if (cfg.clipping) {
            for (Eigen::Index i = 0; i < g.size(); ++i) {
                g[i] = clip(g[i], i % stride == 0 ? cfg.clip_alpha : cfg.clip_theta);
            }
        }
        adam_step(result.optimizer, params, g, cfg);
        unpack_parameters(params, result.sequence);
    }
    CostGradient last = cost_gradient(target, result.sequence, cfg.lambda);
    if (!std::isfinite(last.total_cost)) {
        result.status = FinetuneStatus::NumericAbort;
        result.message = "nonfinite cost after the final iteration";
        return result;
    }
    emit(make_record(start + cfg.iterations, last));
    return result;
}

}  // namespace snapseq
