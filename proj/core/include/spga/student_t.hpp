#pragma once

namespace spga {

// Two-sided Student's-t query: find t* >= 0 with P(|T_df| > t*) == alpha.
struct TQuery {
  double alpha = 0.05;  // two-sided significance level in (0, 1]
  int df = 1;           // degrees of freedom, integer >= 1
};

// ln Gamma(z) for z > 0. Lanczos evaluation, close to one ulp of relative
// accuracy; absolute accuracy is therefore bounded by the ulp of the result
// for very large arguments.
double log_gamma(double z);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation,
// absolute error below 1e-10 over the full domain.
double reg_inc_beta(double x, double a, double b);

double student_t_pdf(double x, int df);
double student_t_cdf(double x, int df);

// Two-sided critical value, root of cdf(t) = 1 - alpha/2; bracketed
// bisection refined by Newton steps, converged to |cdf residual| < 1e-12.
double t_two_sided_critical(const TQuery& q);

}  // namespace spga
