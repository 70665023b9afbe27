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

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bohm/grid.hpp"

namespace bohm {

/// Asymptotic one-sample Kolmogorov-Smirnov critical value at level alpha:
/// sqrt(-ln(alpha/2)/2) / sqrt(n). About 1.628/sqrt(n) at alpha = 0.01.
double ks_critical_value(std::size_t n, double alpha);

/// Asymptotic p-value of a KS statistic (Kolmogorov series with the
/// Stephens small-sample correction).
double ks_p_value(double statistic, std::size_t n);

/// sup |F_n(x) - F(x)| for the sample (sorted internally).
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

double chi_square_quantile(double probability, double dof);
double chi_square_survival(double statistic, double dof);

/// Cumulative distribution of the marginal of a grid density along one axis.
/// Each grid point carries a cell centred on it; the half cell that wraps past
/// the upper edge is folded back, so the CDF runs over [lower, upper).
class GridMarginalCdf {
 public:
  GridMarginalCdf(const Grid& grid, std::span<const double> rho, std::size_t axis);

  double operator()(double x) const;
  double quantile(double p) const;
  double lower() const { return knots_.front(); }
  double upper() const { return knots_.back(); }

 private:
  std::vector<double> knots_;
  std::vector<double> cumulative_;
};

/// Binomial z-score (f - p) / sqrt(p (1 - p) / n); 0 when p is 0 or 1 and f matches.
double binomial_z(double frequency, double probability, std::size_t n);

}  // namespace bohm
