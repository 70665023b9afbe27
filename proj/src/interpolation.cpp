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

#include "bohm/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "bohm/error.hpp"

namespace bohm {

std::array<double, 4> cubic_weights(double s) {
  const double sm1 = s - 1.0;
  const double sm2 = s - 2.0;
  const double sp1 = s + 1.0;
  return {-s * sm1 * sm2 / 6.0, sp1 * sm1 * sm2 / 2.0, -sp1 * s * sm2 / 2.0, sp1 * s * sm1 / 6.0};
}

void build_stencil(const Grid& grid, std::span<const double> q, GridStencil& out) {
  const std::size_t d = grid.dims();
  std::array<std::array<std::size_t, 4>, 8> idx{};
  std::array<std::array<double, 4>, 8> w{};
  std::array<std::size_t, 8> len{};
  if (d > idx.size()) throw Error(ErrorCode::kInvalidArgument, "too many dimensions for stencil");

  for (std::size_t j = 0; j < d; ++j) {
    const double x = grid.wrap(j, q[j]);
    const double u = (x - grid.lower(j)) / grid.spacing(j);
    double base = std::floor(u);
    double s = u - base;
    const auto n = static_cast<std::ptrdiff_t>(grid.extent(j));
    auto i0 = static_cast<std::ptrdiff_t>(base);
    if (s == 0.0) {
      idx[j][0] = static_cast<std::size_t>(((i0 % n) + n) % n);
      w[j][0] = 1.0;
      len[j] = 1;
      continue;
    }
    const auto cw = cubic_weights(s);
    for (std::ptrdiff_t o = 0; o < 4; ++o) {
      const std::ptrdiff_t i = i0 - 1 + o;
      idx[j][static_cast<std::size_t>(o)] = static_cast<std::size_t>(((i % n) + n) % n);
      w[j][static_cast<std::size_t>(o)] = cw[static_cast<std::size_t>(o)];
    }
    len[j] = 4;
  }

  out.index.clear();
  out.weight.clear();
  // Odometer over the per-axis stencils.
  std::array<std::size_t, 8> pos{};
  while (true) {
    std::size_t flat = 0;
    double weight = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      flat += idx[j][pos[j]] * grid.stride(j);
      weight *= w[j][pos[j]];
    }
    out.index.push_back(flat);
    out.weight.push_back(weight);
    std::size_t j = d;
    while (j > 0) {
      --j;
      if (++pos[j] < len[j]) break;
      pos[j] = 0;
      if (j == 0) return;
    }
    if (d == 0) return;
  }
}

TimeStencil time_stencil(double start, double interval, std::size_t count, double t) {
  TimeStencil ts;
  if (count == 0) throw Error(ErrorCode::kInvalidArgument, "empty time series");
  if (count == 1 || interval == 0.0) {
    ts.index[0] = 0;
    ts.weight[0] = 1.0;
    ts.size = 1;
    return ts;
  }
  const double u = (t - start) / interval;
  const double last = static_cast<double>(count - 1);
  if (u < -1e-9 || u > last + 1e-9) {
    throw Error(ErrorCode::kTimeGridMismatch, "time outside the snapshot range");
  }
  const double r = std::round(u);
  if (std::abs(u - r) <= 1e-12 * std::max(1.0, std::abs(r))) {
    ts.index[0] = static_cast<std::size_t>(std::clamp(r, 0.0, last));
    ts.weight[0] = 1.0;
    ts.size = 1;
    return ts;
  }
  const std::size_t m = std::min<std::size_t>(4, count);
  // Centered window {i-1, i, i+1, i+2} around floor(u), clamped into range.
  auto base = static_cast<std::ptrdiff_t>(std::floor(u)) - (m == 4 ? 1 : 0);
  base = std::clamp<std::ptrdiff_t>(base, 0, static_cast<std::ptrdiff_t>(count - m));
  for (std::size_t a = 0; a < m; ++a) {
    const double ta = static_cast<double>(base) + static_cast<double>(a);
    double w = 1.0;
    for (std::size_t b = 0; b < m; ++b) {
      if (b == a) continue;
      const double tb = static_cast<double>(base) + static_cast<double>(b);
      w *= (u - tb) / (ta - tb);
    }
    ts.index[a] = static_cast<std::size_t>(base) + a;
    ts.weight[a] = w;
  }
  ts.size = m;
  return ts;
}

}  // namespace bohm
