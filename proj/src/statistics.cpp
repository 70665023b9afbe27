// Copyright 2026 The bohmlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bohm/statistics.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>

#include "bohm/error.hpp"

namespace bohm {

double ks_critical_value(std::size_t n, double alpha) {
  if (n == 0 || !(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "KS critical value needs n >= 1 and alpha in (0,1)");
  }
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(n));
}

double ks_p_value(double statistic, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * statistic;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "KS statistic of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n));
  }
  return d;
}

double chi_square_quantile(double probability, double dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(dist, probability);
}

double chi_square_survival(double statistic, double dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

GridMarginalCdf::GridMarginalCdf(const Grid& grid, std::span<const double> rho, std::size_t axis) {
  if (rho.size() != grid.size() || axis >= grid.dims()) {
    throw Error(ErrorCode::kGridMismatch, "density does not match the grid");
  }
  const std::size_t n = grid.extent(axis);
  const std::size_t stride = grid.stride(axis);
  std::vector<double> mass(n, 0.0);
  for (std::size_t i = 0; i < rho.size(); ++i) mass[(i / stride) % n] += rho[i];
  const double total = [&] {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
  }();
  if (!(total > 0.0)) throw Error(ErrorCode::kZeroNorm, "marginal of a zero density");

  const double a = grid.lower(axis);
  const double dx = grid.spacing(axis);
  knots_.reserve(n + 2);
  cumulative_.reserve(n + 2);
  knots_.push_back(a);
  cumulative_.push_back(0.0);
  double acc = 0.5 * mass[0];
  knots_.push_back(a + 0.5 * dx);
  cumulative_.push_back(acc / total);
  for (std::size_t i = 1; i < n; ++i) {
    acc += mass[i];
    knots_.push_back(a + (static_cast<double>(i) + 0.5) * dx);
    cumulative_.push_back(acc / total);
  }
  knots_.push_back(grid.upper(axis));
  cumulative_.push_back(1.0);
}

double GridMarginalCdf::operator()(double x) const {
  if (x <= knots_.front()) return 0.0;
  if (x >= knots_.back()) return 1.0;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
  const std::size_t lo = hi - 1;
  const double s = (x - knots_[lo]) / (knots_[hi] - knots_[lo]);
  return cumulative_[lo] + s * (cumulative_[hi] - cumulative_[lo]);
}

double GridMarginalCdf::quantile(double p) const {
  if (p <= 0.0) return knots_.front();
  if (p >= 1.0) return knots_.back();
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), p);
  const std::size_t hi = static_cast<std::size_t>(it - cumulative_.begin());
  const std::size_t lo = hi == 0 ? 0 : hi - 1;
  const double span = cumulative_[hi] - cumulative_[lo];
  if (span <= 0.0) return knots_[hi];
  return knots_[lo] + (p - cumulative_[lo]) / span * (knots_[hi] - knots_[lo]);
}

double binomial_z(double frequency, double probability, std::size_t n) {
  const double var = probability * (1.0 - probability) / static_cast<double>(n);
  if (var <= 0.0) {
    return frequency == probability ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return (frequency - probability) / std::sqrt(var);
}

}  // namespace bohm
