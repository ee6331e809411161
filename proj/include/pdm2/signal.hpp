/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pdm2 {

// Uniformly sampled trace. Sample k is taken at t0 + k / sample_rate seconds
// after the laser trigger.
class Waveform {
 public:
  Waveform(std::vector<double> samples, double sample_rate, double t0 = 0.0);

  std::span<const double> samples() const { return samples_; }
  double sample_rate() const { return sample_rate_; }
  double t0() const { return t0_; }
  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t k) const { return samples_[k]; }

  double TimeAt(std::size_t k) const {
    return t0_ + static_cast<double>(k) / sample_rate_;
  }

  bool SameGrid(const Waveform& other) const;

 private:
  std::vector<double> samples_;
  double sample_rate_;
  double t0_;
};

struct BandSpec {
  double low_hz = 0.0;
  double high_hz = 0.0;
  // Number of second-order sections per band edge; each edge is a Butterworth
  // prototype of order 2 * order, applied forward and backward.
  int order = 2;
};

// Defaults bracketing the transducer's emission bands.
inline constexpr BandSpec kLowBand{20e3, 200e3, 2};
inline constexpr BandSpec kHighBand{300e3, 1.5e6, 2};
inline constexpr double kDefaultSampleRate = 10e6;

struct Spectrum {
  std::vector<double> freqs;
  std::vector<double> magnitudes;
};

Waveform AverageWaveforms(std::span<const Waveform> waveforms);

// Zero-phase Butterworth band-pass. Throws InvalidBand when the edges are not
// inside (0, sample_rate / 2).
Waveform Bandpass(const Waveform& w, const BandSpec& band);

// Magnitude of the analytic signal.
Waveform Envelope(const Waveform& w);

// One-sided DFT magnitude on bins 0 .. N/2.
Spectrum ComputeSpectrum(const Waveform& w);

// Front-end used ahead of time-of-flight estimation: the high band only.
Waveform PreprocessForTof(const Waveform& w);

// Front-end used ahead of classification: sum of the low- and high-band
// outputs, keeping both families of spectral signatures.
Waveform PreprocessForClassification(const Waveform& w);

}  // namespace pdm2
