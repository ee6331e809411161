/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pdm2/signal.hpp"

namespace pdm2 {

enum class Modality { kUltrasound, kOptoacoustic };

std::string_view ModalityName(Modality m);  // "US" / "OA"
Modality ParseModality(std::string_view name);

// Template cut from a preprocessed waveform; its first sample marks the
// arrival of the echo it stands for.
class ReferencePattern {
 public:
  ReferencePattern(std::vector<double> samples, Modality modality, std::string source_id = {});

  std::span<const double> samples() const { return samples_; }
  Modality modality() const { return modality_; }
  const std::string& source_id() const { return source_id_; }
  std::size_t size() const { return samples_.size(); }
  double Norm() const;

 private:
  std::vector<double> samples_;
  Modality modality_;
  std::string source_id_;
};

struct SearchWindow {
  std::size_t j_min = 0;
  std::size_t j_max = 0;

  // Window covering start times [t_begin, t_end] seconds, on w's grid.
  static SearchWindow FromTimes(const Waveform& w, double t_begin, double t_end);
};

struct TofEstimate {
  double tof_s = 0.0;
  double peak_corr = 0.0;
  std::size_t peak_index = 0;
  // Peak correlation over (pattern norm x largest window norm in the search).
  double confidence = 0.0;
};

struct TofOptions {
  double min_confidence = 0.8;
};

// Default search windows for the bench geometry, in seconds.
inline constexpr double kOaWindowBegin = 40e-6;
inline constexpr double kOaWindowEnd = 120e-6;
inline constexpr double kUsWindowBegin = 120e-6;
inline constexpr double kUsWindowEnd = 200e-6;

std::vector<double> CrossCorrelate(const Waveform& w, const ReferencePattern& r,
                                   const SearchWindow& win);

// Round trip: the arrival time is halved.
TofEstimate EstimateTofUs(const Waveform& w, const ReferencePattern& r, const SearchWindow& win,
                          const TofOptions& options = {});

// Single trip from the target to the receiver.
TofEstimate EstimateTofOa(const Waveform& w, const ReferencePattern& r, const SearchWindow& win,
                          const TofOptions& options = {});

// First index in [win.j_min, win.j_max] whose magnitude reaches `fraction` of
// the largest magnitude there. Throws NoSignal on an all-zero window.
std::size_t DetectOnset(const Waveform& w, const SearchWindow& win, double fraction = 0.05);

// Cuts `length` samples starting at `start_index` out of w.
ReferencePattern ExtractReference(const Waveform& w, std::size_t start_index, std::size_t length,
                                  Modality modality, std::string source_id);

}  // namespace pdm2
