#pragma once

// Product-integration building blocks shared by the fractional operators, the
// Goursat evaluator and the Volterra assembly.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <vector>

#include "prabhakar/errors.hpp"

namespace prabhakar {

struct QuadPolicy {
    int n_points = 256;
    double grading = 2.0;
    double tol = 1e-8;

    void validate() const {
        if (n_points < 4 || !(grading >= 1.0) || !(tol > 0.0)) {
            throw InvalidParams("QuadPolicy requires n_points >= 4, grading >= 1, tol > 0");
        }
    }
};

struct GradedMesh {
    std::vector<double> nodes;
    double grading = 1.0;

    std::size_t cells() const noexcept { return nodes.empty() ? 0 : nodes.size() - 1; }
    double length() const noexcept { return nodes.empty() ? 0.0 : nodes.back(); }
};

/// Nodes L (i/n)^r, i = 0..n. The last node is set to L exactly.
inline GradedMesh graded_mesh(double length, int n, double grading = 1.0) {
    if (!(length > 0.0) || n < 1 || !(grading >= 1.0)) {
        throw InvalidParams("graded_mesh requires length > 0, n >= 1, grading >= 1");
    }
    GradedMesh m;
    m.grading = grading;
    m.nodes.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        const double u = static_cast<double>(i) / n;
        m.nodes[i] = grading == 1.0 ? length * u : length * std::pow(u, grading);
    }
    m.nodes.back() = length;
    return m;
}

inline GradedMesh uniform_mesh(double length, int n) { return graded_mesh(length, n, 1.0); }

struct WeightedRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    double apply(const std::function<double(double)>& y) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * y(nodes[i]);
        return s;
    }
};

namespace detail {

// 10-point Gauss-Legendre on [-1, 1].
inline constexpr std::array<double, 5> kGl10x = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                                 0.8650633666889845, 0.9739065285171717};
inline constexpr std::array<double, 5> kGl10w = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                                 0.1494513491505806, 0.0666713443086881};

/// int_a^b s^mu ds without cancellation when a is close to b.
inline double power_integral(double mu, double a, double b) {
    const double e = mu + 1.0;
    if (a == 0.0) return std::pow(b, e) / e;
    return std::pow(b, e) * -std::expm1(e * std::log1p(-(b - a) / b)) / e;
}

}  // namespace detail

/// Closed-form int_a^b s^mu s^k ds for k in {0, 1}.
inline double power_moment(double mu, double a, double b, int k) {
    if (!(mu > -1.0)) {
        std::ostringstream os;
        os << "power_moment requires mu > -1, got " << mu;
        throw DomainError(os.str());
    }
    if (!(a >= 0.0 && a < b)) throw DomainError("power_moment requires 0 <= a < b");
    if (k != 0 && k != 1) throw DomainError("power_moment supports k = 0 or 1");
    return detail::power_integral(mu + k, a, b);
}

/// Weights (left, right) of int_a^b s^w y(s) ds for y linear on [a, b].
inline std::array<double, 2> linear_cell_weights(double w, double a, double b) {
    const double h = b - a;
    if (w == 0.0) return {0.5 * h, 0.5 * h};
    if (a > 0.0 && h < 0.5 * a) {
        // s^w is smooth on the cell: Gauss-Legendre is accurate to rounding and avoids cancellation.
        double left = 0.0, right = 0.0;
        for (std::size_t i = 0; i < detail::kGl10x.size(); ++i) {
            for (int sgn : {-1, 1}) {
                const double u = 0.5 * (1.0 + sgn * detail::kGl10x[i]);
                const double v = detail::kGl10w[i] * 0.5 * h * std::pow(a + h * u, w);
                left += v * (1.0 - u);
                right += v * u;
            }
        }
        return {left, right};
    }
    const double m0 = detail::power_integral(w, a, b);
    const double m1 = detail::power_integral(w + 1.0, a, b);
    const double right = (m1 - a * m0) / h;
    return {m0 - right, right};
}

/// Moments int_a^b s^w l_p(s) l_q(s) ds of the hat functions l_0 = (b-s)/h,
/// l_1 = (s-a)/h, returned as {m00, m01, m11}.
inline std::array<double, 3> hat_product_moments(double w, double a, double b) {
    const double h = b - a;
    if (a == 0.0) {
        const double he = std::pow(h, w + 1.0);
        return {he * (1.0 / (w + 1.0) - 2.0 / (w + 2.0) + 1.0 / (w + 3.0)), he * (1.0 / (w + 2.0) - 1.0 / (w + 3.0)),
                he / (w + 3.0)};
    }
    std::array<double, 3> m{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < detail::kGl10x.size(); ++i) {
        for (int sgn : {-1, 1}) {
            const double u = 0.5 * (1.0 + sgn * detail::kGl10x[i]);
            const double v = detail::kGl10w[i] * 0.5 * h * std::pow(a + h * u, w);
            m[0] += v * (1.0 - u) * (1.0 - u);
            m[1] += v * (1.0 - u) * u;
            m[2] += v * u * u;
        }
    }
    return m;
}

/// Rule reproducing int_0^L s^w y(s) ds exactly for continuous piecewise-linear y.
inline WeightedRule build_rule(double weight_exponent, const GradedMesh& mesh) {
    if (!(weight_exponent > -1.0)) throw DomainError("build_rule requires weight exponent > -1");
    if (mesh.nodes.size() < 2 || mesh.nodes.front() != 0.0) throw InvalidParams("build_rule: invalid mesh");
    WeightedRule r;
    r.nodes = mesh.nodes;
    r.weights.assign(mesh.nodes.size(), 0.0);
    for (std::size_t i = 0; i + 1 < mesh.nodes.size(); ++i) {
        if (!(mesh.nodes[i + 1] > mesh.nodes[i])) throw InvalidParams("build_rule: mesh must be increasing");
        const auto w = linear_cell_weights(weight_exponent, mesh.nodes[i], mesh.nodes[i + 1]);
        r.weights[i] += w[0];
        r.weights[i + 1] += w[1];
    }
    return r;
}

/// Trapezoid weights on arbitrary nodes.
inline std::vector<double> trapezoid_weights(const std::vector<double>& nodes) {
    std::vector<double> w(nodes.size(), 0.0);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double h = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    return w;
}

/// Linear-interpolation weights on a cell [sa, sb] of a kernel K with
/// antiderivative P (P' = K) and second antiderivative Q (Q' = P).
/// Returns the weights attached to the values at sa and sb.
inline std::array<double, 2> kernel_cell_weights(double sa, double sb, double Pa, double Pb, double Qa, double Qb) {
    const double h = sb - sa;
    const double at_b = (h * Pb - (Qb - Qa)) / h;
    const double at_a = (Qb - Qa - h * Pa) / h;
    return {at_a, at_b};
}

}  // namespace prabhakar
