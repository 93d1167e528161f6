#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "spero/errors.hpp"

namespace spero {

/// Real polynomial, coefficients in ascending powers: c[0] + c[1] s + ...
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(std::initializer_list<double> ascending) : c_(ascending) {}
    explicit Polynomial(std::vector<double> ascending) : c_(std::move(ascending)) {}

    static Polynomial monomial(double coeff, std::size_t power) {
        std::vector<double> c(power + 1, 0.0);
        c[power] = coeff;
        return Polynomial(std::move(c));
    }

    [[nodiscard]] const std::vector<double>& coefficients() const { return c_; }

    [[nodiscard]] double coeff(std::size_t power) const {
        return power < c_.size() ? c_[power] : 0.0;
    }

    /// Degree after dropping zero leading coefficients; -1 for the zero polynomial.
    [[nodiscard]] int degree() const {
        for (int i = static_cast<int>(c_.size()) - 1; i >= 0; --i) {
            if (c_[static_cast<std::size_t>(i)] != 0.0) return i;
        }
        return -1;
    }

    /// Multiplicity of the root at s = 0 (count of zero trailing coefficients).
    [[nodiscard]] std::size_t zero_root_multiplicity() const {
        std::size_t k = 0;
        while (k < c_.size() && c_[k] == 0.0) ++k;
        return k;
    }

    /// Divide by s^k. Requires the low k coefficients to be zero.
    [[nodiscard]] Polynomial deflate_origin(std::size_t k) const {
        if (k > zero_root_multiplicity()) {
            throw ConfigError("cannot deflate a nonzero root at the origin");
        }
        return Polynomial(std::vector<double>(c_.begin() + static_cast<std::ptrdiff_t>(k), c_.end()));
    }

    [[nodiscard]] std::complex<double> operator()(std::complex<double> s) const {
        std::complex<double> acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
        return acc;
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = a.coeff(i) + b.coeff(i);
        return Polynomial(std::move(c));
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.c_.empty() || b.c_.empty()) return {};
        std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(c));
    }

    friend Polynomial operator*(double k, const Polynomial& a) {
        std::vector<double> c = a.c_;
        for (double& v : c) v *= k;
        return Polynomial(std::move(c));
    }

private:
    std::vector<double> c_;
};

namespace detail {

// Parlett-Reinsch diagonal similarity scaling; improves eigenvalue accuracy
// for companion matrices whose coefficients span many decades.
inline void balance(Eigen::MatrixXd& a) {
    constexpr double radix = 2.0;
    const Eigen::Index n = a.rows();
    bool done = false;
    while (!done) {
        done = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix, f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= radix * radix;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                a.row(i) *= 1.0 / f;
                a.col(i) *= f;
            }
        }
    }
}

}  // namespace detail

/// All complex roots via eigenvalues of the balanced companion matrix of
/// the monic polynomial. Throws ConfigError for the zero polynomial.
inline std::vector<std::complex<double>> polynomial_roots(const Polynomial& p) {
    const int n = p.degree();
    if (n < 0) {
        throw ConfigError("degenerate polynomial: all coefficients are zero");
    }
    if (n == 0) return {};
    const double lead = p.coeff(static_cast<std::size_t>(n));
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -p.coeff(static_cast<std::size_t>(i)) / lead;
    detail::balance(comp);
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    if (es.info() != Eigen::Success) {
        throw ConfigError("companion eigenvalue solver did not converge");
    }
    std::vector<std::complex<double>> roots(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    std::sort(roots.begin(), roots.end(), [](auto a, auto b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return roots;
}

}  // namespace spero
