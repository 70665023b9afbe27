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

#include "bohm/potential.hpp"

#include <cmath>
#include <string>

#include "bohm/error.hpp"

namespace bohm {
namespace {

double hermiticity_defect(const Eigen::MatrixXcd& v) {
  return (v - v.adjoint()).cwiseAbs().maxCoeff();
}

void require_finite(std::span<const double> values) {
  for (double x : values) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kNonFinite, "potential has a non-finite value");
  }
}

}  // namespace

Potential Potential::zero(const Grid& grid) {
  return scalar(grid, std::vector<double>(grid.size(), 0.0));
}

Potential Potential::scalar(const Grid& grid, std::vector<double> values) {
  if (values.size() != grid.size()) {
    throw Error(ErrorCode::kGridMismatch, "scalar potential size does not match grid");
  }
  require_finite(values);
  Potential p;
  p.kind_ = Kind::kScalar;
  p.k_ = 1;
  p.grid_ = std::make_shared<const Grid>(grid);
  p.scalar_ = std::move(values);
  return p;
}

Potential Potential::scalar(const Grid& grid,
                            const std::function<double(std::span<const double>)>& f) {
  std::vector<double> values(grid.size());
  std::vector<double> q(grid.dims());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, q);
    values[i] = f(q);
  }
  return scalar(grid, std::move(values));
}

Potential Potential::matrix(const Grid& grid, std::size_t k, std::vector<Complex> entries) {
  if (k == 0 || entries.size() != grid.size() * k * k) {
    throw Error(ErrorCode::kGridMismatch, "matrix potential size does not match grid and k");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < k; ++c) {
        const Complex a = entries[i * k * k + r * k + c];
        const Complex b = entries[i * k * k + c * k + r];
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
          throw Error(ErrorCode::kNonFinite, "potential has a non-finite entry");
        }
        if (std::abs(a - std::conj(b)) > kHermiticityTolerance) {
          throw Error(ErrorCode::kNonHermitianPotential,
                      "potential matrix at point " + std::to_string(i) + " is not Hermitian");
        }
      }
    }
  }
  Potential p;
  p.kind_ = Kind::kMatrix;
  p.k_ = k;
  p.grid_ = std::make_shared<const Grid>(grid);
  p.matrix_ = std::move(entries);
  return p;
}

Potential Potential::matrix(const Grid& grid, std::size_t k,
                            const std::function<Eigen::MatrixXcd(std::span<const double>)>& f) {
  std::vector<Complex> entries(grid.size() * k * k);
  std::vector<double> q(grid.dims());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.point(i, q);
    const Eigen::MatrixXcd m = f(q);
    if (static_cast<std::size_t>(m.rows()) != k || static_cast<std::size_t>(m.cols()) != k) {
      throw Error(ErrorCode::kGridMismatch, "matrix potential callback returned the wrong shape");
    }
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < k; ++c) {
        entries[i * k * k + r * k + c] = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
  }
  return matrix(grid, k, std::move(entries));
}

Potential Potential::with_schedule(Schedule schedule) const {
  if (!(schedule.t_off >= schedule.t_on) || !std::isfinite(schedule.strength)) {
    throw Error(ErrorCode::kInvalidArgument, "schedule needs t_off >= t_on and finite strength");
  }
  Potential p = *this;
  p.schedule_ = schedule;
  return p;
}

double Potential::strength(double t) const {
  if (!schedule_) return 1.0;
  return (t >= schedule_->t_on && t < schedule_->t_off) ? schedule_->strength : 0.0;
}

Eigen::MatrixXcd Potential::matrix_at(std::size_t point) const {
  const auto n = static_cast<Eigen::Index>(k_);
  Eigen::MatrixXcd m(n, n);
  if (kind_ == Kind::kScalar) {
    m.setIdentity();
    m *= scalar_[point];
    return m;
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      m(r, c) = matrix_[point * k_ * k_ + static_cast<std::size_t>(r * n + c)];
    }
  }
  return m;
}

Eigen::MatrixXcd matrix_phase(const Eigen::MatrixXcd& v, double dt, double hbar) {
  if (v.rows() != v.cols() || v.rows() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "matrix_phase expects a square matrix");
  }
  if (hermiticity_defect(v) > kHermiticityTolerance) {
    throw Error(ErrorCode::kNonHermitianPotential, "matrix_phase input is not Hermitian");
  }
  const double theta = dt / hbar;
  const Eigen::Index k = v.rows();
  if (k == 1) {
    Eigen::MatrixXcd u(1, 1);
    u(0, 0) = std::exp(Complex(0.0, -v(0, 0).real() * theta));
    return u;
  }
  if (k == 2) {
    // V = a0 I + a.sigma  =>  exp(-i V theta) = e^{-i a0 theta} (cos|a|theta I - i sin|a|theta (a.sigma)/|a|)
    const double a0 = 0.5 * (v(0, 0).real() + v(1, 1).real());
    const double az = 0.5 * (v(0, 0).real() - v(1, 1).real());
    const double ax = v(0, 1).real();
    const double ay = -v(0, 1).imag();
    const double mag = std::sqrt(ax * ax + ay * ay + az * az);
    const double c = std::cos(mag * theta);
    // sin(mag theta)/mag, continuous at mag -> 0
    const double s = mag > 1e-300 ? std::sin(mag * theta) / mag : theta;
    const Complex global = std::exp(Complex(0.0, -a0 * theta));
    const Complex minus_i{0.0, -1.0};
    Eigen::MatrixXcd u(2, 2);
    u(0, 0) = global * (c + minus_i * s * az);
    u(1, 1) = global * (c - minus_i * s * az);
    u(0, 1) = global * minus_i * s * Complex(ax, -ay);
    u(1, 0) = global * minus_i * s * Complex(ax, ay);
    return u;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(v);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  Eigen::VectorXcd phases(k);
  for (Eigen::Index i = 0; i < k; ++i) phases(i) = std::exp(Complex(0.0, -lambda(i) * theta));
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace bohm
