#pragma once

namespace ellipstat {

// Standard normal CDF and upper tail.
double normal_cdf(double x);
double normal_upper_pvalue(double z);

// Survival function of the Type-I extreme value law exp{-pi^{-1/2} e^{-y/2}}
// used by every coordinatewise two-sided max statistic here.
double gumbel_survival(double y);

// p-value for a max-of-squares statistic against the Gumbel limit after the
// standard centering y = max_sq - 2 log(count) + log log(count). count >= 2.
double gumbel_pvalue(double max_sq, long count);

// u_p(y) = (2 log count - log log count + y)^{1/2}; the radicand must be
// positive.
double u_p(double y, long count);

// Combine two p-values by the Cauchy rule. Untruncated (default):
// t = tan(pi(1/2-p1))/2 + tan(pi(1/2-p2))/2. Truncated: each term enters only
// when its p-value is below 1/2. Returns 1 - F_cauchy(t).
double cauchy_combine(double p1, double p2, bool truncated = false);

// Fisher combination: upper chi^2_4 tail of -2 log p1 - 2 log p2.
double fisher_combine(double p1, double p2);

// Closed-form chi^2_4 survival function e^{-x/2}(1 + x/2).
double chi2_4_survival(double x);

}  // namespace ellipstat
