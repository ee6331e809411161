/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <span>

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP variant; each output element is computed by the same instruction
// sequence in both, so results are bit-identical.
namespace pdm2::kernels {

// out[j - j_min] = sum_k pattern[k] * signal[j + k] for j in [j_min, j_max].
void CrossCorrelateSerial(std::span<const double> signal, std::span<const double> pattern,
                          std::size_t j_min, std::size_t j_max, std::span<double> out);
void CrossCorrelateParallel(std::span<const double> signal, std::span<const double> pattern,
                            std::size_t j_min, std::size_t j_max, std::span<double> out);

// Real/imaginary parts of DFT coefficients first_coeff .. first_coeff +
// n_values / 2 - 1 for every stride-1 window of length `window`. Output is
// row-major, one row of n_values per window. With z_normalize each window is
// mean-centred and scaled to unit standard deviation first.
void SlidingDftSerial(std::span<const double> series, std::size_t window, std::size_t first_coeff,
                      std::size_t n_values, bool z_normalize, std::span<double> out);
void SlidingDftParallel(std::span<const double> series, std::size_t window,
                        std::size_t first_coeff, std::size_t n_values, bool z_normalize,
                        std::span<double> out);

// Element count above which the public operations switch to the parallel path.
inline constexpr std::size_t kParallelThreshold = 4096;

}  // namespace pdm2::kernels
