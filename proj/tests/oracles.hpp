// Independent numerical oracles used to check the library. Nothing here may
// call into spga supplies-under-test: special functions come from libm, the
// t density integral from adaptive Simpson, densities from direct counting.
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace oracles {

// Adaptive Simpson quadrature with Richardson correction.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-10);

// Student's t density via std::lgamma.
double t_pdf(double x, double df);

// CDF by integrating the density from 0 (plus the symmetric half).
double t_cdf(double x, double df);

// P(T > t) for t >= 0, integrated over the substituted tail
// s = t + u / (1 - u), u in [0, 1].
double t_upper_tail(double t, double df);

// Two-sided critical value by bisection on the integrated CDF.
double t_two_sided_critical(double alpha, double df);

// Two-sided normal critical value via Newton on std::erfc.
double normal_two_sided_critical(double alpha);

// O(N^2) direct gradient-window count, half-open [g_i - e/2, g_i + e/2).
std::vector<std::size_t> direct_window_counts(std::span<const double> grads,
                                              double epsilon);

// Central finite difference of a scalar function.
double central_diff(const std::function<double(double)>& f, double x,
                    double h = 1e-6);

}  // namespace oracles
