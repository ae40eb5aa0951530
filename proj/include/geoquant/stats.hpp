#pragma once

namespace geoquant {

// Regularized lower incomplete gamma P(a, x) (series for x < a+1,
// continued fraction otherwise).
double gamma_p(double a, double x);

// Chi-square distribution with dof degrees of freedom.
double chi2_cdf(int dof, double x);
double chi2_quantile(int dof, double p);

}  // namespace geoquant
