#pragma once

#include <span>

namespace ncdkit {

double mean(std::span<const double> values);

// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_stdev(std::span<const double> values);

// Quantile of Student's t distribution with `df` degrees of freedom.
double student_t_quantile(double probability, double df);

// Half-width of the two-sided 95% Student-t interval of the mean:
// t(0.975, n - 1) * stdev / sqrt(n); 0 for fewer than 2 values.
double ci95_halfwidth(std::span<const double> values);

}  // namespace ncdkit
