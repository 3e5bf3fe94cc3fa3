#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

// Thin wrappers around the fixed-order Gauss-Legendre rule used for cell
// integrals and the adaptive Gauss-Kronrod rule used for the channel-output
// convolution integrals.

namespace zdjscc {

/// 16-node Gauss-Legendre rule on [-1, 1], exposed as plain arrays so the
/// node grid of a cell can be precomputed once and reused.
struct GaussLegendre16 {
    static constexpr unsigned kNodes = 16;

    /// Writes the 16 abscissae/weights mapped to [a, b].
    static void nodes(double a, double b, double* x, double* w) {
        using rule = boost::math::quadrature::gauss<double, kNodes>;
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        // boost stores the non-negative half of the symmetric rule
        const auto& xs = rule::abscissa();
        const auto& ws = rule::weights();
        unsigned k = 0;
        for (unsigned i = xs.size(); i-- > 0;) {
            x[k] = c - h * xs[i];
            w[k] = h * ws[i];
            ++k;
        }
        for (unsigned i = xs[0] == 0.0 ? 1 : 0; i < xs.size(); ++i) {
            x[k] = c + h * xs[i];
            w[k] = h * ws[i];
            ++k;
        }
    }

    template <class F>
    static double integrate(const F& f, double a, double b) {
        return boost::math::quadrature::gauss<double, kNodes>::integrate(f, a, b);
    }
};

/// Adaptive Gauss-Kronrod integration to a target absolute tolerance.
template <class F>
double integrate_adaptive(const F& f, double a, double b, double abs_tol = 1e-10) {
    if (!(b > a)) return 0.0;
    // L1 scaling keeps the termination test close to an absolute tolerance.
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 14, abs_tol);
}

}  // namespace zdjscc
