#pragma once

// Finite differences for the classical Goursat problem
//   u_tx - a u_x - b u_t = f,   u(0, x) = tau(x),   u(t, 0) = phi(t),
// on the characteristic grid. Each cell is closed by a box scheme centred at
// the cell midpoint, which is second order for smooth data.

#include <functional>
#include <vector>

#include "prabhakar/errors.hpp"

namespace prabhakar::oracle {

struct FdGrid {
    std::vector<double> t, x;
    std::vector<double> u;  // row-major in t

    double at(std::size_t i, std::size_t l) const { return u[i * x.size() + l]; }
};

/// `n` nodes per direction on [0, q] x [0, p].
inline FdGrid classical_telegraph_fd(double a, double b, double q, double p, const std::function<double(double)>& phi,
                                     const std::function<double(double)>& tau,
                                     const std::function<double(double, double)>& f, int n) {
    if (n < 2 || !(q > 0) || !(p > 0)) throw InvalidParams("classical_telegraph_fd needs n >= 2, q > 0, p > 0");
    FdGrid g;
    const double ht = q / (n - 1), hx = p / (n - 1);
    for (int i = 0; i < n; ++i) {
        g.t.push_back(i * ht);
        g.x.push_back(i * hx);
    }
    const std::size_t N = static_cast<std::size_t>(n);
    g.u.assign(N * N, 0.0);
    auto U = [&](std::size_t i, std::size_t l) -> double& { return g.u[i * N + l]; };
    for (std::size_t l = 0; l < N; ++l) U(0, l) = tau(g.x[l]);
    for (std::size_t i = 1; i < N; ++i) U(i, 0) = phi(g.t[i]);

    // With D = u11 - u10 - u01 + u00, the midpoint relations are
    //   u_tx ~ D / (ht hx),  u_x ~ (u11 - u10 + u01 - u00) / (2 hx),  u_t ~ (u11 - u01 + u10 - u00) / (2 ht).
    const double c11 = 1.0 / (ht * hx) - a / (2 * hx) - b / (2 * ht);
    for (std::size_t i = 0; i + 1 < N; ++i) {
        for (std::size_t l = 0; l + 1 < N; ++l) {
            const double u00 = U(i, l), u10 = U(i + 1, l), u01 = U(i, l + 1);
            const double rest = (-u10 - u01 + u00) / (ht * hx) - a * (-u10 + u01 - u00) / (2 * hx) -
                                b * (-u01 + u10 - u00) / (2 * ht);
            const double fm = f(g.t[i] + ht / 2, g.x[l] + hx / 2);
            U(i + 1, l + 1) = (fm - rest) / c11;
        }
    }
    return g;
}

}  // namespace prabhakar::oracle
