// Gain optimisation against a quadratic tracking-plus-effort cost on the
// controlled plant 1/(eta s^2), using Nelder-Mead in log10 gain space.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "spero/controllers.hpp"
#include "spero/errors.hpp"
#include "spero/stability.hpp"

namespace spero {

struct OptProblem {
    Architecture architecture = Architecture::Cascaded;
    double eta = 0.0345;     ///< plant coefficient (yaw: body inertia)
    double lambda = 1e-3;    ///< effort weight
    double horizon = 1.0;    ///< [s]
    double dt = 1e-3;        ///< [s]
    double reference = 1.0;  ///< step amplitude applied at t = 0
    std::vector<double> initial;  ///< {kp, ki, kd} or {kp1, ki1, kp2, ki2, kd2}
    double lower = 1e-6;
    double upper = 100.0;
    int restarts = 4;        ///< extra randomised starts after the first
    int max_evaluations = 4000;  ///< per start
    std::uint64_t seed = 0;
    double penalty = 1e9;
    double divergence_bound = 1e6;

    [[nodiscard]] std::size_t dimension() const {
        return architecture == Architecture::SingleLoop ? 3 : 5;
    }

    void validate() const {
        if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
        if (!(dt > 0.0) || !(horizon >= dt)) throw ConfigError("need 0 < dt <= horizon");
        if (!(lower > 0.0) || !(upper > lower)) throw ConfigError("need 0 < lower < upper");
        if (initial.size() != dimension()) {
            throw ConfigError("initial gain vector has the wrong length for the architecture");
        }
        for (double g : initial) {
            if (!std::isfinite(g) || g < 0.0) throw ConfigError("initial gains must be >= 0");
        }
        if (restarts < 0 || max_evaluations < 1) throw ConfigError("bad optimiser budget");
    }
};

inline std::vector<double> gain_vector(const PidGains& g) { return {g.kp, g.ki, g.kd}; }
inline std::vector<double> gain_vector(const CascadedGains& g) {
    return {g.outer.kp, g.outer.ki, g.inner.kp, g.inner.ki, g.inner.kd};
}
inline PidGains single_gains_from(const std::vector<double>& v) {
    PidGains g;
    g.kp = v.at(0);
    g.ki = v.at(1);
    g.kd = v.at(2);
    return g;
}
inline CascadedGains cascaded_gains_from(const std::vector<double>& v) {
    return CascadedGains::from_values(v.at(0), v.at(1), v.at(2), v.at(3), v.at(4));
}

struct CostResult {
    double value = 0.0;
    bool stable = false;
    bool diverged = false;
};

/// J = sum_{k=0}^{N-1} (e_k^2 + lambda u_k^2) dt, N = round(horizon / dt),
/// for a step of `reference` from rest. The plant update is the exact
/// zero-order-hold solution of eta x'' = u over one step.
inline CostResult cost(const OptProblem& p, const std::vector<double>& gains) {
    CostResult r;
    const PlantEta eta(p.eta);
    const bool single = p.architecture == Architecture::SingleLoop;
    PidGains sg;
    CascadedGains cg;
    if (single) {
        sg = single_gains_from(gains);
        r.stable = single_loop_stable(eta, sg).stable;
    } else {
        cg = cascaded_gains_from(gains);
        r.stable = cascaded_stable(eta, cg).stable;
    }
    if (!r.stable) {
        r.value = p.penalty;
        return r;
    }
    const auto n = static_cast<std::size_t>(std::llround(p.horizon / p.dt));
    ControllerState st;
    double x = 0.0, v = 0.0, j = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double e = p.reference - x;
        const double u = single ? single_loop_step(st, sg, p.reference, x, p.dt)
                                : cascaded_step(st, cg, p.reference, x, v, p.dt);
        j += (e * e + p.lambda * u * u) * p.dt;
        const double a = u / p.eta;
        x += v * p.dt + 0.5 * a * p.dt * p.dt;
        v += a * p.dt;
        if (!std::isfinite(x) || std::abs(x) > p.divergence_bound ||
            std::abs(v) > p.divergence_bound) {
            r.diverged = true;
            r.value = p.penalty;
            return r;
        }
    }
    r.value = j;
    return r;
}

struct OptResult {
    std::vector<double> gains;
    double cost = 0.0;
    double initial_cost = 0.0;
    bool stable = false;
    bool converged = false;   ///< simplex collapsed before the evaluation budget
    int evaluations = 0;
    int diverged_evaluations = 0;
    int best_start = 0;
};

namespace detail {

/// Uniform in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct NmOutcome {
    std::vector<double> x;  // log10 gains
    double f = 0.0;
    int evals = 0;
    bool converged = false;
};

template <class F>
NmOutcome nelder_mead(F&& f, std::vector<double> x0, double lo, double hi, int max_evals) {
    const std::size_t n = x0.size();
    auto project = [&](std::vector<double>& x) {
        for (double& xi : x) xi = std::clamp(xi, lo, hi);
    };
    project(x0);
    std::vector<std::vector<double>> s(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        s[i + 1][i] += (x0[i] + 0.5 <= hi) ? 0.5 : -0.5;
    }
    std::vector<double> fv(n + 1);
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return f(x);
    };
    for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(s[i]);

    std::vector<std::size_t> idx(n + 1);
    bool converged = false;
    while (evals < max_evals) {
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        const std::size_t best = idx.front(), worst = idx.back(), second = idx[n - 1];

        double size = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t d = 0; d < n; ++d) size = std::max(size, std::abs(s[i][d] - s[best][d]));
        if (size < 1e-8 && std::abs(fv[worst] - fv[best]) <= 1e-12 * (1.0 + std::abs(fv[best]))) {
            converged = true;
            break;
        }

        std::vector<double> c(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t d = 0; d < n; ++d) c[d] += s[i][d] / static_cast<double>(n);
        }
        auto along = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t d = 0; d < n; ++d) x[d] = c[d] + t * (s[worst][d] - c[d]);
            project(x);
            return x;
        };
        auto xr = along(-1.0);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            auto xe = along(-2.0);
            const double fe = eval(xe);
            if (fe < fr) { s[worst] = xe; fv[worst] = fe; }
            else { s[worst] = xr; fv[worst] = fr; }
        } else if (fr < fv[second]) {
            s[worst] = xr; fv[worst] = fr;
        } else {
            auto xc = fr < fv[worst] ? along(-0.5) : along(0.5);
            const double fc = eval(xc);
            if (fc < std::min(fr, fv[worst])) {
                s[worst] = xc; fv[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < n; ++d) s[i][d] = s[best][d] + 0.5 * (s[i][d] - s[best][d]);
                    fv[i] = eval(s[i]);
                }
            }
        }
    }
    const auto b = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    return {s[b], fv[b], evals, converged};
}

}  // namespace detail

/// Minimises cost() over gains in [lower, upper]. Start 0 is the initial
/// gains; further starts perturb them by up to one decade per gain, drawn
/// from mt19937_64(seed). The result never costs more than the initial gains.
inline OptResult optimize(const OptProblem& p) {
    p.validate();
    const double lo = std::log10(p.lower), hi = std::log10(p.upper);
    int diverged = 0;
    auto f = [&](const std::vector<double>& lx) {
        std::vector<double> g(lx.size());
        for (std::size_t i = 0; i < lx.size(); ++i) g[i] = std::pow(10.0, lx[i]);
        const CostResult c = cost(p, g);
        if (c.diverged) ++diverged;
        return c.value;
    };

    OptResult out;
    const CostResult c0 = cost(p, p.initial);
    out.initial_cost = c0.value;
    out.gains = p.initial;
    out.cost = c0.value;
    out.stable = c0.stable;
    out.evaluations = 1;

    std::vector<double> base(p.initial.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        base[i] = std::log10(std::max(p.initial[i], p.lower));
    }
    std::mt19937_64 rng(p.seed);
    for (int start = 0; start <= p.restarts; ++start) {
        std::vector<double> x0 = base;
        if (start > 0) {
            for (double& xi : x0) xi += 2.0 * detail::unit_uniform(rng) - 1.0;
        }
        const auto r = detail::nelder_mead(f, x0, lo, hi, p.max_evaluations);
        out.evaluations += r.evals;
        if (r.f < out.cost) {
            out.cost = r.f;
            out.gains.resize(r.x.size());
            for (std::size_t i = 0; i < r.x.size(); ++i) out.gains[i] = std::pow(10.0, r.x[i]);
            out.best_start = start;
            out.converged = r.converged;
            out.stable = true;
        } else if (start == 0) {
            out.converged = r.converged;
        }
    }
    out.diverged_evaluations = diverged;
    if (out.cost >= p.penalty) out.stable = false;
    return out;
}

}  // namespace spero
