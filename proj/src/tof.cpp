/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/tof.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdm2/error.hpp"
#include "pdm2/kernels.hpp"

namespace pdm2 {

std::string_view ModalityName(Modality m) {
  return m == Modality::kUltrasound ? "US" : "OA";
}

Modality ParseModality(std::string_view name) {
  if (name == "US" || name == "us") return Modality::kUltrasound;
  if (name == "OA" || name == "oa") return Modality::kOptoacoustic;
  throw Error(ErrorCode::kInvalidArgument, "unknown modality '" + std::string(name) + "'");
}

ReferencePattern::ReferencePattern(std::vector<double> samples, Modality modality,
                                   std::string source_id)
    : samples_(std::move(samples)), modality_(modality), source_id_(std::move(source_id)) {
  if (samples_.size() < 8) {
    throw Error(ErrorCode::kInvalidArgument, "reference pattern needs at least 8 samples");
  }
  double energy = 0.0;
  for (double s : samples_) {
    if (!std::isfinite(s)) throw Error(ErrorCode::kInvalidArgument, "reference sample not finite");
    energy += s * s;
  }
  if (!(energy > 0.0)) throw Error(ErrorCode::kInvalidArgument, "reference pattern has no energy");
}

double ReferencePattern::Norm() const {
  double energy = 0.0;
  for (double s : samples_) energy += s * s;
  return std::sqrt(energy);
}

SearchWindow SearchWindow::FromTimes(const Waveform& w, double t_begin, double t_end) {
  const double j0 = std::ceil((t_begin - w.t0()) * w.sample_rate() - 1e-9);
  const double j1 = std::floor((t_end - w.t0()) * w.sample_rate() + 1e-9);
  if (j0 < 0.0 || j1 < j0) {
    throw Error(ErrorCode::kWindowOutOfRange, "search window outside the waveform time base");
  }
  return {static_cast<std::size_t>(j0), static_cast<std::size_t>(j1)};
}

namespace {

void CheckWindow(const Waveform& w, const ReferencePattern& r, const SearchWindow& win) {
  if (win.j_min >= win.j_max || win.j_max + r.size() > w.size()) {
    throw Error(ErrorCode::kWindowOutOfRange,
                "search window [" + std::to_string(win.j_min) + ", " + std::to_string(win.j_max) +
                    "] with pattern length " + std::to_string(r.size()) +
                    " does not fit a waveform of " + std::to_string(w.size()) + " samples");
  }
}

double MaxWindowNorm(const Waveform& w, std::size_t n, const SearchWindow& win) {
  const auto s = w.samples();
  double energy = 0.0;
  for (std::size_t k = 0; k < n; ++k) energy += s[win.j_min + k] * s[win.j_min + k];
  double best = energy;
  for (std::size_t j = win.j_min + 1; j <= win.j_max; ++j) {
    energy += s[j + n - 1] * s[j + n - 1] - s[j - 1] * s[j - 1];
    best = std::max(best, energy);
  }
  return std::sqrt(std::max(best, 0.0));
}

TofEstimate Estimate(const Waveform& w, const ReferencePattern& r, const SearchWindow& win,
                     const TofOptions& options, Modality expected, double trips) {
  if (r.modality() != expected) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("reference pattern modality is ") +
                    std::string(ModalityName(r.modality())) + ", expected " +
                    std::string(ModalityName(expected)));
  }
  const std::vector<double> c = CrossCorrelate(w, r, win);

  // Strict comparison keeps the smallest index on ties.
  std::size_t best = 0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    if (c[k] > c[best]) best = k;
  }
  TofEstimate e;
  e.peak_index = win.j_min + best;
  e.peak_corr = c[best];
  e.tof_s = w.TimeAt(e.peak_index) / trips;

  const double denom = r.Norm() * MaxWindowNorm(w, r.size(), win);
  e.confidence = denom > 0.0 ? e.peak_corr / denom : 0.0;
  if (!(e.confidence >= options.min_confidence)) {
    throw Error(ErrorCode::kLowConfidence,
                std::string(ModalityName(expected)) + " echo not found (confidence " +
                    std::to_string(e.confidence) + ")");
  }
  if (!(e.tof_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "time of flight must be positive");
  }
  return e;
}

}  // namespace

std::vector<double> CrossCorrelate(const Waveform& w, const ReferencePattern& r,
                                   const SearchWindow& win) {
  CheckWindow(w, r, win);
  std::vector<double> out(win.j_max - win.j_min + 1);
  const std::size_t work = out.size() * r.size();
  if (work >= kernels::kParallelThreshold * 64) {
    kernels::CrossCorrelateParallel(w.samples(), r.samples(), win.j_min, win.j_max, out);
  } else {
    kernels::CrossCorrelateSerial(w.samples(), r.samples(), win.j_min, win.j_max, out);
  }
  return out;
}

TofEstimate EstimateTofUs(const Waveform& w, const ReferencePattern& r, const SearchWindow& win,
                          const TofOptions& options) {
  return Estimate(w, r, win, options, Modality::kUltrasound, 2.0);
}

TofEstimate EstimateTofOa(const Waveform& w, const ReferencePattern& r, const SearchWindow& win,
                          const TofOptions& options) {
  return Estimate(w, r, win, options, Modality::kOptoacoustic, 1.0);
}

std::size_t DetectOnset(const Waveform& w, const SearchWindow& win, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "onset fraction must lie in (0, 1]");
  if (win.j_min > win.j_max || win.j_max >= w.size()) {
    throw Error(ErrorCode::kWindowOutOfRange, "onset window outside the waveform");
  }
  double peak = 0.0;
  for (std::size_t j = win.j_min; j <= win.j_max; ++j) peak = std::max(peak, std::abs(w[j]));
  if (!(peak > 0.0)) throw Error(ErrorCode::kNoSignal, "no signal in the onset window");
  std::size_t j = win.j_min;
  while (std::abs(w[j]) < fraction * peak) ++j;
  return j;
}

ReferencePattern ExtractReference(const Waveform& w, std::size_t start_index, std::size_t length,
                                  Modality modality, std::string source_id) {
  if (start_index + length > w.size()) {
    throw Error(ErrorCode::kWindowOutOfRange, "reference cut extends past the waveform end");
  }
  const auto s = w.samples().subspan(start_index, length);
  return ReferencePattern({s.begin(), s.end()}, modality, std::move(source_id));
}

}  // namespace pdm2
