/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/kernels.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace pdm2::kernels {

namespace {

inline double Dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

struct DftTable {
  std::vector<double> cos_t;
  std::vector<double> sin_t;
};

DftTable MakeTable(std::size_t window, std::size_t first_coeff, std::size_t n_coeffs) {
  DftTable t;
  t.cos_t.resize(n_coeffs * window);
  t.sin_t.resize(n_coeffs * window);
  for (std::size_t c = 0; c < n_coeffs; ++c) {
    const double k = static_cast<double>(first_coeff + c);
    for (std::size_t i = 0; i < window; ++i) {
      const double phase = 2.0 * std::numbers::pi * k * static_cast<double>(i) /
                           static_cast<double>(window);
      t.cos_t[c * window + i] = std::cos(phase);
      t.sin_t[c * window + i] = -std::sin(phase);
    }
  }
  return t;
}

void WindowDft(const double* x, std::size_t window, std::size_t n_coeffs, bool z_normalize,
               const DftTable& table, double* scratch, double* out) {
  double mean = 0.0;
  double scale = 1.0;
  if (z_normalize) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < window; ++i) {
      sum += x[i];
      sum_sq += x[i] * x[i];
    }
    mean = sum / static_cast<double>(window);
    const double var = sum_sq / static_cast<double>(window) - mean * mean;
    const double sd = var > 0.0 ? std::sqrt(var) : 0.0;
    scale = sd > 1e-12 ? 1.0 / sd : 1.0;
  }
  for (std::size_t i = 0; i < window; ++i) scratch[i] = (x[i] - mean) * scale;
  for (std::size_t c = 0; c < n_coeffs; ++c) {
    out[2 * c] = Dot(scratch, &table.cos_t[c * window], window);
    out[2 * c + 1] = Dot(scratch, &table.sin_t[c * window], window);
  }
}

}  // namespace

void CrossCorrelateSerial(std::span<const double> signal, std::span<const double> pattern,
                          std::size_t j_min, std::size_t j_max, std::span<double> out) {
  const std::size_t n = pattern.size();
  for (std::size_t j = j_min; j <= j_max; ++j) {
    out[j - j_min] = Dot(pattern.data(), signal.data() + j, n);
  }
}

void CrossCorrelateParallel(std::span<const double> signal, std::span<const double> pattern,
                            std::size_t j_min, std::size_t j_max, std::span<double> out) {
  const std::size_t n = pattern.size();
  const auto first = static_cast<std::ptrdiff_t>(j_min);
  const auto last = static_cast<std::ptrdiff_t>(j_max);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = first; j <= last; ++j) {
    out[static_cast<std::size_t>(j - first)] =
        Dot(pattern.data(), signal.data() + j, n);
  }
}

void SlidingDftSerial(std::span<const double> series, std::size_t window, std::size_t first_coeff,
                      std::size_t n_values, bool z_normalize, std::span<double> out) {
  const std::size_t n_coeffs = n_values / 2;
  const std::size_t n_windows = series.size() - window + 1;
  const DftTable table = MakeTable(window, first_coeff, n_coeffs);
  std::vector<double> scratch(window);
  for (std::size_t w = 0; w < n_windows; ++w) {
    WindowDft(series.data() + w, window, n_coeffs, z_normalize, table, scratch.data(),
              out.data() + w * n_values);
  }
}

void SlidingDftParallel(std::span<const double> series, std::size_t window,
                        std::size_t first_coeff, std::size_t n_values, bool z_normalize,
                        std::span<double> out) {
  const std::size_t n_coeffs = n_values / 2;
  const auto n_windows = static_cast<std::ptrdiff_t>(series.size() - window + 1);
  const DftTable table = MakeTable(window, first_coeff, n_coeffs);
#pragma omp parallel
  {
    std::vector<double> scratch(window);
#pragma omp for schedule(static)
    for (std::ptrdiff_t w = 0; w < n_windows; ++w) {
      WindowDft(series.data() + w, window, n_coeffs, z_normalize, table, scratch.data(),
                out.data() + static_cast<std::size_t>(w) * n_values);
    }
  }
}

}  // namespace pdm2::kernels
