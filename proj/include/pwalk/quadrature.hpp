#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pwalk {

/// Adaptive Gauss-Kronrod (15-point) on [a,b] to absolute tolerance ~1e-9.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-9) {
    double error = 0;
    double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        std::forward<F>(f), a, b, 12, abs_tol, &error);
    return value;
}

} // namespace pwalk
