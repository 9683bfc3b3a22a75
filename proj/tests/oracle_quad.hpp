#pragma once

// Independent quadrature oracles (Boost) used by the test suites.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>

namespace oracle {

/// int_0^inf f, split at `knee`: tanh-sinh below (endpoint singularities),
/// exp-sinh above.
inline double integrate_0_inf(const std::function<double(double)>& f, double knee = 1.0, double tol = 1e-12) {
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    const double lo = ts.integrate(f, 0.0, knee, tol);
    const double hi = es.integrate([&](double x) { return f(x + knee); }, tol);
    return lo + hi;
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, a, b, tol);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace oracle
