/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <mutex>

namespace pdm2::detail {

namespace {

std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(PlannerMutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

struct BufferDeleter {
  void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using Buffer = std::unique_ptr<T[], BufferDeleter>;

template <typename T>
Buffer<T> Allocate(std::size_t n) {
  return Buffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1))));
}

}  // namespace

std::vector<std::complex<double>> ForwardReal(std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t bins = n / 2 + 1;
  auto in = Allocate<double>(n);
  auto out = Allocate<fftw_complex>(bins);
  Plan plan;
  {
    std::lock_guard lock(PlannerMutex());
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  }
  std::copy(x.begin(), x.end(), in.get());
  fftw_execute(plan.get());
  std::vector<std::complex<double>> result(bins);
  for (std::size_t k = 0; k < bins; ++k) result[k] = {out[k][0], out[k][1]};
  return result;
}

std::vector<std::complex<double>> InverseComplex(std::span<const std::complex<double>> spectrum) {
  const std::size_t n = spectrum.size();
  auto in = Allocate<fftw_complex>(n);
  auto out = Allocate<fftw_complex>(n);
  Plan plan;
  {
    std::lock_guard lock(PlannerMutex());
    plan.reset(fftw_plan_dft_1d(static_cast<int>(n), in.get(), out.get(), FFTW_BACKWARD,
                                FFTW_ESTIMATE));
  }
  for (std::size_t k = 0; k < n; ++k) {
    in[k][0] = spectrum[k].real();
    in[k][1] = spectrum[k].imag();
  }
  fftw_execute(plan.get());
  std::vector<std::complex<double>> result(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) result[k] = {out[k][0] * scale, out[k][1] * scale};
  return result;
}

}  // namespace pdm2::detail
