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

#include "bohm/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "bohm/error.hpp"

namespace bohm {
namespace {

// FFTW's planner is not thread-safe, execution with the new-array interface is.
// Plans are created once per grid shape and live for the process lifetime.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

PlanPair plans_for(const Grid& grid) {
  static std::map<std::vector<int>, PlanPair> cache;
  std::vector<int> shape;
  for (std::size_t j = 0; j < grid.dims(); ++j) shape.push_back(static_cast<int>(grid.extent(j)));

  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(shape);
  if (it != cache.end()) return it->second;

  fftw_complex* scratch = fftw_alloc_complex(grid.size());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.forward = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), scratch, scratch,
                            FFTW_FORWARD, flags);
  p.backward = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), scratch, scratch,
                             FFTW_BACKWARD, flags);
  fftw_free(scratch);
  if (!p.forward || !p.backward) {
    throw Error(ErrorCode::kInvalidArgument, "FFTW could not plan this grid");
  }
  cache.emplace(std::move(shape), p);
  return p;
}

fftw_complex* as_fftw(std::span<Complex> data) {
  return reinterpret_cast<fftw_complex*>(data.data());
}

}  // namespace

FourierTransform::FourierTransform(const Grid& grid) : size_(grid.size()) {
  const PlanPair p = plans_for(grid);
  forward_plan_ = p.forward;
  backward_plan_ = p.backward;
}

void FourierTransform::forward(std::span<Complex> data) const {
  if (data.size() != size_) throw Error(ErrorCode::kGridMismatch, "FFT plane size mismatch");
  auto plan = static_cast<fftw_plan>(const_cast<void*>(forward_plan_));
  fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
}

void FourierTransform::backward(std::span<Complex> data) const {
  if (data.size() != size_) throw Error(ErrorCode::kGridMismatch, "FFT plane size mismatch");
  auto plan = static_cast<fftw_plan>(const_cast<void*>(backward_plan_));
  fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
  const double inv = 1.0 / static_cast<double>(size_);
  for (Complex& z : data) z *= inv;
}

namespace {

// Multiplies a spectrum by i*k_axis, zeroing the Nyquist mode of that axis.
void apply_derivative(const Grid& grid, std::span<Complex> spec, std::size_t axis) {
  const auto& k = grid.wavenumbers(axis);
  const std::size_t n_axis = grid.extent(axis);
  const std::size_t stride = grid.stride(axis);
  const std::size_t nyquist = n_axis / 2;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const std::size_t m = (i / stride) % n_axis;
    if (m == nyquist) {
      spec[i] = 0.0;
    } else {
      spec[i] *= Complex(0.0, k[m]);
    }
  }
}

}  // namespace

namespace {

// Real and imaginary parts are differentiated separately so that a real
// field has an exactly real derivative. This keeps Im(conj(psi) d psi)
// identically zero for real wave functions, even where psi is tiny.
struct SplitSpectrum {
  std::vector<Complex> re;
  std::vector<Complex> im;
  bool has_re = false;
  bool has_im = false;
};

SplitSpectrum split_forward(const FourierTransform& fft, std::span<const Complex> field) {
  SplitSpectrum s;
  s.re.resize(field.size());
  s.im.resize(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    s.re[i] = field[i].real();
    s.im[i] = field[i].imag();
    s.has_re = s.has_re || field[i].real() != 0.0;
    s.has_im = s.has_im || field[i].imag() != 0.0;
  }
  if (s.has_re) fft.forward(s.re);
  if (s.has_im) fft.forward(s.im);
  return s;
}

std::vector<Complex> split_derivative(const Grid& grid, const FourierTransform& fft,
                                      const SplitSpectrum& s, std::size_t axis) {
  std::vector<Complex> out(grid.size(), Complex{});
  std::vector<Complex> work;
  if (s.has_re) {
    work = s.re;
    apply_derivative(grid, work, axis);
    fft.backward(work);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].real(work[i].real());
  }
  if (s.has_im) {
    work = s.im;
    apply_derivative(grid, work, axis);
    fft.backward(work);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].imag(work[i].real());
  }
  return out;
}

}  // namespace

std::vector<Complex> spectral_derivative(const Grid& grid, std::span<const Complex> field,
                                         std::size_t axis) {
  if (field.size() != grid.size()) throw Error(ErrorCode::kGridMismatch, "FFT plane size mismatch");
  FourierTransform fft(grid);
  return split_derivative(grid, fft, split_forward(fft, field), axis);
}

std::vector<std::vector<Complex>> spectral_gradient(const Grid& grid,
                                                    std::span<const Complex> field) {
  if (field.size() != grid.size()) throw Error(ErrorCode::kGridMismatch, "FFT plane size mismatch");
  FourierTransform fft(grid);
  const SplitSpectrum s = split_forward(fft, field);
  std::vector<std::vector<Complex>> out;
  out.reserve(grid.dims());
  for (std::size_t j = 0; j < grid.dims(); ++j) out.push_back(split_derivative(grid, fft, s, j));
  return out;
}

std::vector<double> spectral_divergence(const Grid& grid,
                                        const std::vector<std::vector<double>>& field) {
  if (field.size() != grid.dims()) {
    throw Error(ErrorCode::kGridMismatch, "vector field has the wrong number of axes");
  }
  FourierTransform fft(grid);
  std::vector<Complex> total(grid.size(), Complex{});
  std::vector<Complex> work(grid.size());
  for (std::size_t j = 0; j < grid.dims(); ++j) {
    for (std::size_t i = 0; i < work.size(); ++i) work[i] = field[j][i];
    fft.forward(work);
    apply_derivative(grid, work, j);
    for (std::size_t i = 0; i < work.size(); ++i) total[i] += work[i];
  }
  fft.backward(total);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = total[i].real();
  return out;
}

}  // namespace bohm
