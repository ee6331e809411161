/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "pdm2/error.hpp"

namespace pdm2 {

Waveform::Waveform(std::vector<double> samples, double sample_rate, double t0)
    : samples_(std::move(samples)), sample_rate_(sample_rate), t0_(t0) {
  if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_)) {
    throw Error(ErrorCode::kInvalidArgument, "waveform sample rate must be positive");
  }
  if (!std::isfinite(t0_)) throw Error(ErrorCode::kInvalidArgument, "waveform t0 must be finite");
  if (samples_.empty()) throw Error(ErrorCode::kEmptyInput, "waveform has no samples");
  for (double s : samples_) {
    if (!std::isfinite(s)) throw Error(ErrorCode::kInvalidArgument, "waveform sample not finite");
  }
}

bool Waveform::SameGrid(const Waveform& other) const {
  return size() == other.size() && sample_rate_ == other.sample_rate_ && t0_ == other.t0_;
}

Waveform AverageWaveforms(std::span<const Waveform> waveforms) {
  if (waveforms.empty()) throw Error(ErrorCode::kEmptyInput, "no waveforms to average");
  const Waveform& first = waveforms.front();
  std::vector<double> sum(first.size(), 0.0);
  for (const Waveform& w : waveforms) {
    if (!w.SameGrid(first)) {
      throw Error(ErrorCode::kMismatchedGrid, "waveforms differ in length, rate or t0");
    }
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += w[k];
  }
  const double inv = 1.0 / static_cast<double>(waveforms.size());
  for (double& s : sum) s *= inv;
  return Waveform(std::move(sum), first.sample_rate(), first.t0());
}

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;  // normalized so that a0 == 1
};

// Bilinear-transform Butterworth sections with prewarping at the cutoff.
std::vector<Biquad> DesignButterworth(double cutoff_hz, double sample_rate, int sections,
                                      bool highpass) {
  const int poles = 2 * sections;
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / sample_rate;
  const double cw = std::cos(w0);
  const double sw = std::sin(w0);
  std::vector<Biquad> out;
  out.reserve(sections);
  for (int k = 0; k < sections; ++k) {
    const double q = 1.0 / (2.0 * std::sin((2.0 * k + 1.0) * std::numbers::pi / (2.0 * poles)));
    const double alpha = sw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad s{};
    if (highpass) {
      s.b0 = (1.0 + cw) / 2.0 / a0;
      s.b1 = -(1.0 + cw) / a0;
      s.b2 = s.b0;
    } else {
      s.b0 = (1.0 - cw) / 2.0 / a0;
      s.b1 = (1.0 - cw) / a0;
      s.b2 = s.b0;
    }
    s.a1 = -2.0 * cw / a0;
    s.a2 = (1.0 - alpha) / a0;
    out.push_back(s);
  }
  return out;
}

void RunCascade(std::span<const Biquad> cascade, std::vector<double>& x) {
  for (const Biquad& s : cascade) {
    // Transposed direct form II.
    double z1 = 0.0;
    double z2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

std::vector<double> FiltFilt(std::span<const Biquad> cascade, std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t pad = std::min<std::size_t>(n - 1, 3 * (2 * cascade.size() + 1));
  // Odd extension about both end points limits start-up transients.
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * x[0] - x[k]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * x[n - 1] - x[n - 1 - k]);

  RunCascade(cascade, ext);
  std::reverse(ext.begin(), ext.end());
  RunCascade(cascade, ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace

Waveform Bandpass(const Waveform& w, const BandSpec& band) {
  const double nyquist = w.sample_rate() / 2.0;
  if (!(band.low_hz > 0.0) || !(band.low_hz < band.high_hz) || !(band.high_hz < nyquist)) {
    throw Error(ErrorCode::kInvalidBand,
                "band edges must satisfy 0 < low < high < " + std::to_string(nyquist) + " Hz");
  }
  if (band.order < 1) throw Error(ErrorCode::kInvalidBand, "filter order must be >= 1");

  std::vector<Biquad> cascade = DesignButterworth(band.high_hz, w.sample_rate(), band.order, false);
  const auto hp = DesignButterworth(band.low_hz, w.sample_rate(), band.order, true);
  cascade.insert(cascade.end(), hp.begin(), hp.end());
  return Waveform(FiltFilt(cascade, w.samples()), w.sample_rate(), w.t0());
}

Waveform Envelope(const Waveform& w) {
  const std::size_t n = w.size();
  const auto half = detail::ForwardReal(w.samples());
  std::vector<std::complex<double>> analytic(n, {0.0, 0.0});
  analytic[0] = half[0];
  for (std::size_t k = 1; k < half.size(); ++k) {
    const bool nyquist_bin = (n % 2 == 0) && (k == n / 2);
    analytic[k] = nyquist_bin ? half[k] : 2.0 * half[k];
  }
  const auto z = detail::InverseComplex(analytic);
  std::vector<double> env(n);
  for (std::size_t k = 0; k < n; ++k) env[k] = std::abs(z[k]);
  return Waveform(std::move(env), w.sample_rate(), w.t0());
}

Spectrum ComputeSpectrum(const Waveform& w) {
  const auto half = detail::ForwardReal(w.samples());
  Spectrum s;
  s.freqs.resize(half.size());
  s.magnitudes.resize(half.size());
  const double df = w.sample_rate() / static_cast<double>(w.size());
  for (std::size_t k = 0; k < half.size(); ++k) {
    s.freqs[k] = df * static_cast<double>(k);
    s.magnitudes[k] = std::abs(half[k]);
  }
  return s;
}

Waveform PreprocessForTof(const Waveform& w) { return Bandpass(w, kHighBand); }

Waveform PreprocessForClassification(const Waveform& w) {
  const Waveform low = Bandpass(w, kLowBand);
  const Waveform high = Bandpass(w, kHighBand);
  std::vector<double> sum(w.size());
  for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = low[k] + high[k];
  return Waveform(std::move(sum), w.sample_rate(), w.t0());
}

}  // namespace pdm2
