// Routh-Hurwitz predicates for loops closed around the feedforward-linearized
// plant 1/(eta s^2). Root finding serves as the cross-check; sweeps map the
// predicate over two gains.
//
// Closed-loop characteristic polynomials (unity feedback, derived from the
// block diagram):
//
//   Single loop, C = kp + ki/s + kd s, P = 1/(eta s^2):
//     1 + C P = 0  ->  eta s^3 + kd s^2 + kp s + ki
//     Hurwitz (all coefficients > 0):  kp kd > eta ki
//
//   Cascade, C1 = kp1 + ki1/s on position, C2 = kp2 + ki2/s + kd2 s on rate,
//   Gv = 1/(eta s), Gp = Gv/s:
//     eta s^2 y = C2 (C1 (r - y) - s y)
//     -> s^2 (eta s^2 + C2 s + C1 C2) =
//        a4 s^4 + a3 s^3 + a2 s^2 + a1 s + a0 with
//        a4 = eta + kd2
//        a3 = kp2 + kp1 kd2
//        a2 = ki2 + kp1 kp2 + ki1 kd2
//        a1 = kp1 ki2 + ki1 kp2
//        a0 = ki1 ki2
//     Quartic Hurwitz: all a_i > 0 and a3 a2 a1 > a4 a1^2 + a3^2 a0, which is
//     the printed cascade inequality term for term.
//
// When ki1 or ki2 is zero the matching integrator is absent and one factor
// of s drops out of the quartic (both zero drops s^2). The predicate then
// applies the Hurwitz condition of the reduced polynomial: cubic a3 a2 > a4 a1
// (the quartic condition divided by a1), quadratic a3 a2 > 0.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spero/controllers.hpp"
#include "spero/errors.hpp"
#include "spero/polynomial.hpp"

namespace spero {

struct PlantEta {
    double eta = 1.0;

    explicit PlantEta(double value) : eta(value) {
        if (!std::isfinite(value) || value <= 0.0) {
            throw ConfigError("plant eta must be finite and positive");
        }
    }
};

struct StabilityVerdict {
    bool stable = false;
    double margin = 0.0;  ///< Hurwitz slack; > 0 exactly when stable
};

/// Margins within this fraction of the magnitude of their terms count as 0.
inline constexpr double kBoundaryRelTol = 1e-12;

namespace detail {

inline StabilityVerdict classify(double margin, double scale, const std::vector<double>& coeffs) {
    if (std::abs(margin) <= kBoundaryRelTol * scale) {
        margin = 0.0;
    }
    const bool positive = std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c > 0.0; });
    if (!positive) {
        margin = std::min(margin, 0.0);
    }
    return {positive && margin > 0.0, margin};
}

inline void require_nonnegative(const PidGains& g) {
    for (double v : {g.kp, g.ki, g.kd}) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ConfigError("stability predicates require non-negative gains");
        }
    }
}

}  // namespace detail

inline StabilityVerdict single_loop_stable(PlantEta eta, const PidGains& g) {
    detail::require_nonnegative(g);
    const double lhs = g.kp * g.kd;
    const double rhs = eta.eta * g.ki;
    std::vector<double> coeffs = {eta.eta, g.kd, g.kp};
    if (g.ki > 0.0) coeffs.push_back(g.ki);
    return detail::classify(lhs - rhs, std::abs(lhs) + std::abs(rhs), coeffs);
}

inline StabilityVerdict cascaded_stable(PlantEta eta, const CascadedGains& g) {
    detail::require_nonnegative(g.outer);
    detail::require_nonnegative(g.inner);
    const double kp1 = g.outer.kp, ki1 = g.outer.ki;
    const double kp2 = g.inner.kp, ki2 = g.inner.ki, kd2 = g.inner.kd;

    const double a4 = eta.eta + kd2;
    const double a3 = kp2 + kp1 * kd2;
    const double a2 = ki2 + kp1 * kp2 + ki1 * kd2;
    const double a1 = kp1 * ki2 + ki1 * kp2;
    const double a0 = ki1 * ki2;

    const int integrators = (ki1 > 0.0 ? 1 : 0) + (ki2 > 0.0 ? 1 : 0);
    if (integrators == 2) {
        const double lhs = a4 * a1 * a1 + a0 * a3 * a3;
        const double rhs = a3 * a1 * a2;
        return detail::classify(rhs - lhs, std::abs(lhs) + std::abs(rhs), {a4, a3, a2, a1, a0});
    }
    if (integrators == 1) {
        const double lhs = a4 * a1;
        const double rhs = a3 * a2;
        return detail::classify(rhs - lhs, std::abs(lhs) + std::abs(rhs), {a4, a3, a2, a1});
    }
    const double m = a3 * a2;
    return detail::classify(m, std::abs(m), {a4, a3, a2});
}

/// Closed-loop denominator assembled from controller and plant polynomials,
/// each controller in lowest terms (no 1/s when its ki is zero).
inline Polynomial characteristic_polynomial(PlantEta eta, const PidGains& g) {
    detail::require_nonnegative(g);
    const Polynomial plant_den = Polynomial::monomial(eta.eta, 2);  // eta s^2
    Polynomial num, den;
    if (g.ki > 0.0) {
        num = Polynomial{g.ki, g.kp, g.kd};
        den = Polynomial{0.0, 1.0};
    } else {
        num = Polynomial{g.kp, g.kd};
        den = Polynomial{1.0};
    }
    return den * plant_den + num;
}

inline Polynomial characteristic_polynomial(PlantEta eta, const CascadedGains& g) {
    detail::require_nonnegative(g.outer);
    detail::require_nonnegative(g.inner);
    const Polynomial s{0.0, 1.0};
    const Polynomial rate_plant_den = Polynomial::monomial(eta.eta, 1);  // eta s

    Polynomial n1, d1, n2, d2;
    if (g.outer.ki > 0.0) {
        n1 = Polynomial{g.outer.ki, g.outer.kp};
        d1 = s;
    } else {
        n1 = Polynomial{g.outer.kp};
        d1 = Polynomial{1.0};
    }
    if (g.inner.ki > 0.0) {
        n2 = Polynomial{g.inner.ki, g.inner.kp, g.inner.kd};
        d2 = s;
    } else {
        n2 = Polynomial{g.inner.kp, g.inner.kd};
        d2 = Polynomial{1.0};
    }
    // Inner loop: n2 / (d2 eta s + n2). Outer open loop adds C1 and the 1/s
    // integrator from rate to position.
    const Polynomial inner_den = d2 * rate_plant_den + n2;
    return d1 * s * inner_den + n1 * n2;
}

inline std::vector<std::complex<double>> characteristic_roots(PlantEta eta, const PidGains& g) {
    return polynomial_roots(characteristic_polynomial(eta, g));
}

inline std::vector<std::complex<double>> characteristic_roots(PlantEta eta,
                                                              const CascadedGains& g) {
    return polynomial_roots(characteristic_polynomial(eta, g));
}

inline double max_real_part(const std::vector<std::complex<double>>& roots) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& r : roots) m = std::max(m, r.real());
    return m;
}

// ---------------------------------------------------------------------------
// Sweeps

/// Names accepted for sweep axes.
inline double& cascaded_gain_ref(CascadedGains& g, const std::string& name) {
    if (name == "kp1") return g.outer.kp;
    if (name == "ki1") return g.outer.ki;
    if (name == "kp2") return g.inner.kp;
    if (name == "ki2") return g.inner.ki;
    if (name == "kd2") return g.inner.kd;
    throw ConfigError("unknown cascaded gain '" + name + "' (expected kp1, ki1, kp2, ki2, kd2)");
}

struct SweepAxis {
    std::string gain;
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 200;
    bool log_scale = false;

    void validate() const {
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
            throw ConfigError("sweep axis '" + gain + "' requires lo < hi");
        }
        if (n < 1) {
            throw ConfigError("sweep axis '" + gain + "' needs at least one sample");
        }
        if (log_scale && lo <= 0.0) {
            throw ConfigError("log-scale sweep axis '" + gain + "' requires lo > 0");
        }
        if (lo < 0.0) {
            throw ConfigError("sweep axis '" + gain + "' must stay non-negative");
        }
    }

    [[nodiscard]] double value(std::size_t i) const {
        if (n == 1) return lo;
        const double f = static_cast<double>(i) / static_cast<double>(n - 1);
        if (i == n - 1) return hi;
        return log_scale ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)))
                         : lo + f * (hi - lo);
    }
};

struct SweepSpec {
    SweepAxis x;  ///< columns
    SweepAxis y;  ///< rows
    CascadedGains fixed = tuned_cascaded_gains();

    /// Outer gains kp1 vs ki1 around the tuned cascade, 200 x 200 log grid.
    static SweepSpec defaults() {
        SweepSpec s;
        s.x = {"kp1", 1e-3, 1e2, 200, true};
        s.y = {"ki1", 1e-3, 1e2, 200, true};
        return s;
    }
};

struct SweepGrid {
    SweepSpec spec;
    double eta = 1.0;
    std::vector<StabilityVerdict> cells;  ///< row-major, rows = y samples

    [[nodiscard]] const StabilityVerdict& at(std::size_t row, std::size_t col) const {
        return cells.at(row * spec.x.n + col);
    }

    [[nodiscard]] CascadedGains gains_at(std::size_t row, std::size_t col) const {
        CascadedGains g = spec.fixed;
        cascaded_gain_ref(g, spec.x.gain) = spec.x.value(col);
        cascaded_gain_ref(g, spec.y.gain) = spec.y.value(row);
        return g;
    }

    [[nodiscard]] std::size_t unstable_count() const {
        return static_cast<std::size_t>(
            std::count_if(cells.begin(), cells.end(), [](const auto& v) { return !v.stable; }));
    }
};

inline SweepGrid sweep(PlantEta eta, const SweepSpec& spec) {
    spec.x.validate();
    spec.y.validate();
    if (spec.x.gain == spec.y.gain) {
        throw ConfigError("sweep axes must name two different gains");
    }
    CascadedGains probe = spec.fixed;
    cascaded_gain_ref(probe, spec.x.gain);
    cascaded_gain_ref(probe, spec.y.gain);
    probe.validate();

    SweepGrid grid;
    grid.spec = spec;
    grid.eta = eta.eta;
    grid.cells.resize(spec.x.n * spec.y.n);
    for (std::size_t r = 0; r < spec.y.n; ++r) {
        for (std::size_t c = 0; c < spec.x.n; ++c) {
            grid.cells[r * spec.x.n + c] = cascaded_stable(eta, grid.gains_at(r, c));
        }
    }
    return grid;
}

/// Along each grid line parallel to `gain`, counts cells that are unstable
/// while some cell with a larger value of `gain` on the same line is stable,
/// i.e. departures from "lowering this gain never loses stability".
/// Returns nullopt when `gain` is not a sweep axis.
inline std::optional<std::size_t> monotonicity_violations(const SweepGrid& grid,
                                                          const std::string& gain) {
    const bool along_x = grid.spec.x.gain == gain;
    const bool along_y = grid.spec.y.gain == gain;
    if (!along_x && !along_y) return std::nullopt;
    const std::size_t lines = along_x ? grid.spec.y.n : grid.spec.x.n;
    const std::size_t len = along_x ? grid.spec.x.n : grid.spec.y.n;
    std::size_t violations = 0;
    for (std::size_t l = 0; l < lines; ++l) {
        bool stable_above = false;
        for (std::size_t k = len; k-- > 0;) {
            const auto& v = along_x ? grid.at(l, k) : grid.at(k, l);
            if (v.stable) {
                stable_above = true;
            } else if (stable_above) {
                ++violations;
            }
        }
    }
    return violations;
}

}  // namespace spero
