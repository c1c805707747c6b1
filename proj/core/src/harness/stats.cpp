#include "ncdkit/harness/stats.hpp"

#include <cmath>

#include <boost/math/distributions/students_t.hpp>

#include "ncdkit/error.hpp"

namespace ncdkit {

double mean(std::span<const double> values) {
  if (values.empty()) raise(ErrorKind::empty_input, "mean of no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_stdev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double student_t_quantile(double probability, double df) {
  if (!(df > 0.0)) raise(ErrorKind::invalid_argument, "t quantile needs positive degrees of freedom");
  return boost::math::quantile(boost::math::students_t_distribution<double>(df), probability);
}

double ci95_halfwidth(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double n = static_cast<double>(values.size());
  return student_t_quantile(0.975, n - 1.0) * sample_stdev(values) / std::sqrt(n);
}

}  // namespace ncdkit
