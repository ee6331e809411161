/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <complex>
#include <span>
#include <vector>

namespace pdm2::detail {

// Thin wrappers over FFTW. Planning is serialized internally; execution is
// reentrant.
std::vector<std::complex<double>> ForwardReal(std::span<const double> x);
std::vector<std::complex<double>> InverseComplex(std::span<const std::complex<double>> spectrum);

}  // namespace pdm2::detail
