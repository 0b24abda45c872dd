#pragma once

// Complex matrix factorization Z ~ W V (W: N x K, V: K x M) by two-block
// coordinate descent. Objectives:
//
//   CMF     f = 1/2 ||Z - W V||_F^2
//   SpaCMF  f = CMF + alpha  * sum_ij |V_ij|
//   GraCMF  f = CMF + lambda * Re Trace(V L V^H)
//
// The V block takes gradient steps with Armijo backtracking; the W block is
// the exact least-squares solution W = Z pinv(V). The gradient G is the one
// satisfying d/dt f(V + tP)|_0 = Re Trace(G^H P) for every complex P.
//
// The real Lee-Seung multiplicative-update NMF is provided as a baseline.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cmf/graph.hpp"
#include "cmf/linalg.hpp"
#include "cmf/rng.hpp"

namespace cmf {

enum class Method { CMF, SpaCMF, GraCMF, NMF };

inline constexpr Method kAllMethods[] = {Method::CMF, Method::SpaCMF, Method::GraCMF,
                                         Method::NMF};

inline std::string_view method_name(Method m) {
    switch (m) {
    case Method::CMF: return "CMF";
    case Method::SpaCMF: return "SpaCMF";
    case Method::GraCMF: return "GraCMF";
    case Method::NMF: return "NMF";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    for (Method m : kAllMethods)
        if (method_name(m) == s) return m;
    throw std::invalid_argument("unknown method '" + std::string(s) +
                                "' (expected CMF, SpaCMF, GraCMF or NMF)");
}

inline bool is_complex_method(Method m) { return m != Method::NMF; }

struct SolverParams {
    Method method = Method::CMF;
    int K = 20;
    double alpha_sparse = 0.1;
    double lambda_graph = 0.1;
    int max_outer = 300;
    int inner_v_steps = 5;
    double tol_rel = 1e-5;
    double eps_sign = 1e-9;
    std::uint64_t seed = 0;

    void validate() const {
        if (K < 1) throw std::invalid_argument("solver: K must be positive");
        if (max_outer < 1) throw std::invalid_argument("solver: max_outer must be positive");
        if (inner_v_steps < 1)
            throw std::invalid_argument("solver: inner_v_steps must be positive");
        if (!(tol_rel > 0.0)) throw std::invalid_argument("solver: tol_rel must be positive");
        if (!(eps_sign > 0.0)) throw std::invalid_argument("solver: eps_sign must be positive");
        if (!(alpha_sparse >= 0.0))
            throw std::invalid_argument("solver: alpha_sparse must be nonnegative");
        if (!(lambda_graph >= 0.0))
            throw std::invalid_argument("solver: lambda_graph must be nonnegative");
    }
};

struct FactorModel {
    ComplexMatrix W;
    ComplexMatrix V;
    SolverParams params;
    std::vector<double> objective_trace; // initial value first, then one per outer iteration
    bool converged = false;

    int iterations() const { return static_cast<int>(objective_trace.size()) - 1; }
    double final_objective() const {
        return objective_trace.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : objective_trace.back();
    }
};

struct ArmijoStep {
    ComplexMatrix V;
    double objective = 0.0;
    double beta = 0.0; // 0 signals that no decrease was found
};

inline constexpr double kArmijoSigma = 1e-4;
inline constexpr int kArmijoMaxHalvings = 30;

// Elementwise v / max(|v|, eps).
inline ComplexMatrix csign(const ComplexMatrix &v, double eps) {
    ComplexMatrix s(v.rows(), v.cols());
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = 0; j < v.cols(); ++j)
            s(i, j) = v(i, j) / std::max(std::abs(v(i, j)), eps);
    return s;
}

namespace detail {

inline void check_shapes(const ComplexMatrix &z, const ComplexMatrix &w,
                         const ComplexMatrix &v, const SolverParams &p,
                         const RealMatrix *l) {
    if (w.rows() != z.rows() || v.cols() != z.cols() || w.cols() != v.rows())
        throw DimensionError("factor: inconsistent shapes Z " + shape_str(z) + ", W " +
                             shape_str(w) + ", V " + shape_str(v));
    if (p.method == Method::GraCMF) {
        if (l == nullptr)
            throw std::invalid_argument("factor: GraCMF requires a graph Laplacian");
        if (l->rows() != z.cols() || l->cols() != z.cols())
            throw DimensionError("factor: Laplacian " + shape_str(*l) +
                                 " does not match M = " + std::to_string(z.cols()));
    }
}

inline double penalty(const ComplexMatrix &v, const SolverParams &p, const RealMatrix *l) {
    switch (p.method) {
    case Method::SpaCMF: return p.alpha_sparse * v.cwiseAbs().sum();
    case Method::GraCMF: return p.lambda_graph * graph_penalty(v, *l);
    default: return 0.0;
    }
}

inline ComplexMatrix penalty_gradient(const ComplexMatrix &v, const SolverParams &p,
                                      const RealMatrix *l) {
    switch (p.method) {
    case Method::SpaCMF: return p.alpha_sparse * csign(v, p.eps_sign);
    case Method::GraCMF: {
        ComplexMatrix g(v.rows(), v.cols());
        const RealMatrix gr = v.real() * (*l);
        const RealMatrix gi = v.imag() * (*l);
        g.real() = (2.0 * p.lambda_graph) * gr;
        g.imag() = (2.0 * p.lambda_graph) * gi;
        return g;
    }
    default: return ComplexMatrix::Zero(v.rows(), v.cols());
    }
}

// Residual R = W V - Z together with the objective it induces.
struct State {
    ComplexMatrix residual;
    double objective = 0.0;
};

inline State evaluate(const ComplexMatrix &z, const ComplexMatrix &w, const ComplexMatrix &v,
                      const SolverParams &p, const RealMatrix *l) {
    State s;
    s.residual = w * v - z;
    s.objective = 0.5 * frob_norm_sq(s.residual) + penalty(v, p, l);
    return s;
}

struct InnerStep {
    ComplexMatrix V;
    State state;
    double beta = 0.0;
};

// One backtracking step from (V, state). Trial objectives use the identity
// W (V - bG) - Z = R - b W G; the accepted point is re-evaluated from scratch
// and rejected if roundoff made it worse than the start.
inline InnerStep armijo_step(const ComplexMatrix &w, const ComplexMatrix &v,
                             const State &state, const ComplexMatrix &z,
                             const SolverParams &p, const RealMatrix *l, double beta0) {
    ComplexMatrix g = w.adjoint() * state.residual + penalty_gradient(v, p, l);
    const double g2 = frob_norm_sq(g);
    InnerStep out{v, state, 0.0};
    if (g2 == 0.0) return out;

    const ComplexMatrix wg = w * g;
    double beta = beta0;
    for (int h = 0; h <= kArmijoMaxHalvings; ++h, beta *= 0.5) {
        ComplexMatrix trial = v - beta * g;
        double f = 0.5 * frob_norm_sq(state.residual - beta * wg) + penalty(trial, p, l);
        if (std::isfinite(f) && f <= state.objective - kArmijoSigma * beta * g2) {
            State exact = evaluate(z, w, trial, p, l);
            if (exact.objective <= state.objective) {
                out.V = std::move(trial);
                out.state = std::move(exact);
                out.beta = beta;
            }
            return out;
        }
    }
    return out;
}

} // namespace detail

inline double objective(const ComplexMatrix &z, const ComplexMatrix &w, const ComplexMatrix &v,
                        const SolverParams &p, const RealMatrix *l = nullptr) {
    detail::check_shapes(z, w, v, p, l);
    return detail::evaluate(z, w, v, p, l).objective;
}

inline ComplexMatrix grad_V(const ComplexMatrix &z, const ComplexMatrix &w,
                            const ComplexMatrix &v, const SolverParams &p,
                            const RealMatrix *l = nullptr) {
    detail::check_shapes(z, w, v, p, l);
    return w.adjoint() * (w * v - z) + detail::penalty_gradient(v, p, l);
}

// V' = V - beta G, beta from beta0 halved until
// f(V') <= f(V) - sigma * beta * ||G||_F^2 (at most 30 halvings).
inline ArmijoStep step_V_armijo(const ComplexMatrix &z, const ComplexMatrix &w,
                                const ComplexMatrix &v, const SolverParams &p,
                                const RealMatrix *l = nullptr, double beta0 = 1.0) {
    detail::check_shapes(z, w, v, p, l);
    auto state = detail::evaluate(z, w, v, p, l);
    auto step = detail::armijo_step(w, v, state, z, p, l, beta0);
    return {std::move(step.V), step.state.objective, step.beta};
}

// Lee-Seung multiplicative updates for min ||X - W H||_F^2, W, H >= 0.
struct NmfResult {
    RealMatrix W;
    RealMatrix H;
    std::vector<double> objective_trace; // 1/2 ||X - WH||_F^2, initial value first
    bool converged = false;
};

inline constexpr double kNmfEpsilon = 1e-9;

inline NmfResult nmf_baseline(const RealMatrix &x, int k, int iters, std::uint64_t seed,
                              double tol_rel = 0.0) {
    if (k < 1) throw std::invalid_argument("nmf: K must be positive");
    if (iters < 0) throw std::invalid_argument("nmf: iteration count must be nonnegative");
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (!(x(i, j) >= 0.0))
                throw std::invalid_argument("nmf: negative or non-finite entry at (" +
                                            std::to_string(i) + ", " + std::to_string(j) +
                                            ")");
    Rng rng(seed);
    NmfResult r;
    r.W = random_real(x.rows(), k, rng, 0.01, 1.0);
    r.H = random_real(k, x.cols(), rng, 0.01, 1.0);
    auto loss = [&] { return 0.5 * (x - r.W * r.H).squaredNorm(); };
    r.objective_trace.push_back(loss());
    const double scale = std::max(r.objective_trace.front(), 1e-12);
    for (int it = 0; it < iters; ++it) {
        RealMatrix wt = r.W.transpose();
        r.H = r.H.cwiseProduct((wt * x).cwiseQuotient(
                  (wt * r.W) * r.H + RealMatrix::Constant(k, x.cols(), kNmfEpsilon)));
        RealMatrix ht = r.H.transpose();
        r.W = r.W.cwiseProduct((x * ht).cwiseQuotient(
                  r.W * (r.H * ht) + RealMatrix::Constant(x.rows(), k, kNmfEpsilon)));
        double f = loss();
        if (!std::isfinite(f)) throw std::runtime_error("nmf: objective became non-finite");
        double prev = r.objective_trace.back();
        r.objective_trace.push_back(f);
        if (tol_rel > 0.0 && std::abs(prev - f) / scale < tol_rel) {
            r.converged = true;
            break;
        }
    }
    return r;
}

namespace detail {

inline FactorModel factorize_nmf(const ComplexMatrix &z, const SolverParams &p) {
    if (z.imag().cwiseAbs().maxCoeff() != 0.0)
        throw std::invalid_argument("factorize: NMF baseline requires real input");
    auto r = nmf_baseline(z.real(), p.K, p.max_outer, p.seed, p.tol_rel);
    FactorModel m;
    m.W = to_complex(r.W);
    m.V = to_complex(r.H);
    m.params = p;
    m.objective_trace = std::move(r.objective_trace);
    m.converged = r.converged;
    return m;
}

} // namespace detail

// Block coordinate descent. Each outer iteration takes inner_v_steps Armijo
// steps on V, then sets W = Z pinv(V). A W update that does not lower the
// computed objective is discarded, so the recorded trace is non-increasing.
// Stops when |f_t - f_{t-1}| / max(f_0, 1e-12) < tol_rel.
inline FactorModel factorize(const ComplexMatrix &z, const SolverParams &p,
                             const RealMatrix *l = nullptr) {
    p.validate();
    const Eigen::Index n = z.rows(), m = z.cols();
    if (p.K > std::min(n, m))
        throw std::invalid_argument("factorize: K = " + std::to_string(p.K) +
                                    " exceeds min(N, M) = " +
                                    std::to_string(std::min(n, m)));
    if (!all_finite(z)) throw std::invalid_argument("factorize: Z has non-finite entries");
    if (p.method == Method::NMF) return detail::factorize_nmf(z, p);

    Rng rng(p.seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.K));
    FactorModel model;
    model.params = p;
    model.W = random_complex(n, p.K, rng, -0.5, 0.5) * scale;
    model.V = random_complex(p.K, m, rng, -0.5, 0.5) * scale;
    detail::check_shapes(z, model.W, model.V, p, l);

    auto state = detail::evaluate(z, model.W, model.V, p, l);
    if (!std::isfinite(state.objective))
        throw std::runtime_error("factorize: initial objective is not finite");
    model.objective_trace.push_back(state.objective);
    const double f0 = std::max(state.objective, 1e-12);

    double last_beta = 0.5;
    for (int outer = 0; outer < p.max_outer; ++outer) {
        const double prev = state.objective;
        for (int s = 0; s < p.inner_v_steps; ++s) {
            auto step = detail::armijo_step(model.W, model.V, state, z, p, l, 2.0 * last_beta);
            if (step.beta == 0.0) break;
            last_beta = step.beta;
            model.V = std::move(step.V);
            state = std::move(step.state);
        }

        ComplexMatrix w_new = lstsq_W(z, model.V);
        auto w_state = detail::evaluate(z, w_new, model.V, p, l);
        if (!std::isfinite(w_state.objective))
            throw std::runtime_error("factorize: objective became non-finite at outer "
                                     "iteration " +
                                     std::to_string(outer + 1) + " (" +
                                     std::string(method_name(p.method)) + ", K=" +
                                     std::to_string(p.K) + ")");
        if (w_state.objective <= state.objective) {
            model.W = std::move(w_new);
            state = std::move(w_state);
        }
        model.objective_trace.push_back(state.objective);
        if (std::abs(prev - state.objective) / f0 < p.tol_rel) {
            model.converged = true;
            break;
        }
    }
    return model;
}

} // namespace cmf
