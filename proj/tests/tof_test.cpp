/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/tof.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pdm2/bench.hpp"
#include "pdm2/error.hpp"

namespace pdm2 {
namespace {

constexpr double kFs = kDefaultSampleRate;

std::vector<double> Burst(std::size_t len, double freq) {
  std::vector<double> s(len);
  for (std::size_t k = 0; k < len; ++k) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len - 1));
    s[k] = hann * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(k) / kFs);
  }
  return s;
}

Waveform Embed(const std::vector<double>& pattern, std::size_t n, std::size_t at, double gain) {
  std::vector<double> s(n, 0.0);
  for (std::size_t k = 0; k < pattern.size(); ++k) s[at + k] += gain * pattern[k];
  return Waveform(std::move(s), kFs);
}

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kIo;
}

TEST(CrossCorrelate, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::vector<double> sig(3000), pat(150);
  for (double& v : sig) v = g(rng);
  for (double& v : pat) v = g(rng);
  const Waveform w(sig, kFs);
  const ReferencePattern r(pat, Modality::kUltrasound);
  const SearchWindow win{100, 2800};
  const std::vector<double> c = CrossCorrelate(w, r, win);
  ASSERT_EQ(c.size(), win.j_max - win.j_min + 1);
  for (std::size_t j = win.j_min; j <= win.j_max; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < pat.size(); ++k) acc += pat[k] * sig[j + k];
    EXPECT_NEAR(c[j - win.j_min], acc, 1e-10 * (1.0 + std::abs(acc)));
  }
}

TEST(CrossCorrelate, WindowChecks) {
  const Waveform w(std::vector<double>(100, 1.0), kFs);
  const ReferencePattern r(std::vector<double>(20, 1.0), Modality::kUltrasound);
  EXPECT_EQ(CodeOf([&] { CrossCorrelate(w, r, {10, 10}); }), ErrorCode::kWindowOutOfRange);
  EXPECT_EQ(CodeOf([&] { CrossCorrelate(w, r, {20, 10}); }), ErrorCode::kWindowOutOfRange);
  EXPECT_EQ(CodeOf([&] { CrossCorrelate(w, r, {0, 81}); }), ErrorCode::kWindowOutOfRange);
  EXPECT_NO_THROW(CrossCorrelate(w, r, {0, 80}));
}

TEST(EstimateTof, ShiftOracle) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> shift(50, 2500);
  std::uniform_real_distribution<double> gain(0.1, 10.0);
  const std::vector<double> pat = Burst(120, 600e3);
  const ReferencePattern us(pat, Modality::kUltrasound);
  const ReferencePattern oa(pat, Modality::kOptoacoustic);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t at = shift(rng);
    const Waveform w = Embed(pat, 3000, at, gain(rng));
    const SearchWindow win{1, 2800};
    const TofEstimate e_us = EstimateTofUs(w, us, win);
    const TofEstimate e_oa = EstimateTofOa(w, oa, win);
    EXPECT_EQ(e_us.peak_index, at);
    EXPECT_DOUBLE_EQ(e_us.tof_s, static_cast<double>(at) / kFs / 2.0);
    EXPECT_DOUBLE_EQ(e_oa.tof_s, static_cast<double>(at) / kFs);
    EXPECT_NEAR(e_us.confidence, 1.0, 1e-12);
  }
}

TEST(EstimateTof, FilteredPatternAlignsWithOnset) {
  // Pattern and echo pass through the same zero-phase preprocessing.
  const std::vector<double> burst = Burst(140, 728e3);
  const std::size_t onset = 400;
  const Waveform clean = PreprocessForTof(Embed(burst, 1200, onset, 1.0));
  const ReferencePattern r = ExtractReference(clean, onset, 180, Modality::kOptoacoustic, "clean");
  for (std::size_t at : {500u, 777u, 1501u, 2400u}) {
    const Waveform w = PreprocessForTof(Embed(burst, 3200, at, 0.5));
    const TofEstimate e = EstimateTofOa(w, r, {200, 2900});
    EXPECT_NEAR(static_cast<double>(e.peak_index), static_cast<double>(at), 0.5);
  }
}

TEST(EstimateTof, TieKeepsEarliest) {
  std::vector<double> pat(16, 0.0);
  pat[0] = 1.0;
  pat[8] = -1.0;
  std::vector<double> sig(200, 0.0);
  for (std::size_t at : {40u, 120u}) {
    sig[at] = 1.0;
    sig[at + 8] = -1.0;
  }
  const TofEstimate e =
      EstimateTofOa(Waveform(sig, kFs), ReferencePattern(pat, Modality::kOptoacoustic), {1, 180});
  EXPECT_EQ(e.peak_index, 40u);
}

TEST(EstimateTof, LowConfidenceOnNoise) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  std::vector<double> sig(3000);
  for (double& v : sig) v = g(rng);
  const Waveform w = PreprocessForTof(Waveform(sig, kFs));
  const ReferencePattern r(Burst(140, 728e3), Modality::kUltrasound);
  TofOptions strict;
  strict.min_confidence = 0.9;
  EXPECT_EQ(CodeOf([&] { EstimateTofUs(w, r, {100, 2800}, strict); }), ErrorCode::kLowConfidence);
  // Silence has no correlation at all.
  const Waveform silent(std::vector<double>(3000, 0.0), kFs);
  EXPECT_EQ(CodeOf([&] { EstimateTofUs(silent, r, {100, 2800}); }), ErrorCode::kLowConfidence);
}

TEST(EstimateTof, ModalityAndSign) {
  const std::vector<double> pat = Burst(64, 600e3);
  const Waveform w = Embed(pat, 500, 100, 1.0);
  const ReferencePattern oa(pat, Modality::kOptoacoustic);
  EXPECT_EQ(CodeOf([&] { EstimateTofUs(w, oa, {0, 400}); }), ErrorCode::kInvalidArgument);
  // An echo at index 0 gives a zero ToF.
  const Waveform at_zero = Embed(pat, 500, 0, 1.0);
  EXPECT_EQ(CodeOf([&] { EstimateTofOa(at_zero, oa, {0, 400}); }), ErrorCode::kInvalidArgument);
}

TEST(SearchWindow, FromTimes) {
  const Waveform w(std::vector<double>(3200, 0.0), kFs);
  const SearchWindow oa = SearchWindow::FromTimes(w, kOaWindowBegin, kOaWindowEnd);
  EXPECT_EQ(oa.j_min, 400u);
  EXPECT_EQ(oa.j_max, 1200u);
  EXPECT_EQ(CodeOf([&] { SearchWindow::FromTimes(w, -1e-6, 1e-6); }), ErrorCode::kWindowOutOfRange);
}

TEST(ReferencePattern, Validation) {
  EXPECT_THROW(ReferencePattern(std::vector<double>(4, 1.0), Modality::kUltrasound), Error);
  EXPECT_THROW(ReferencePattern(std::vector<double>(16, 0.0), Modality::kUltrasound), Error);
  EXPECT_EQ(ParseModality("OA"), Modality::kOptoacoustic);
  EXPECT_EQ(ModalityName(Modality::kUltrasound), "US");
  EXPECT_THROW(ParseModality("xray"), Error);
}

Waveform Delay(const Waveform& w, std::size_t k) {
  std::vector<double> s(w.size(), 0.0);
  for (std::size_t j = 0; j + k < w.size(); ++j) s[j + k] = w[j];
  return Waveform(std::move(s), w.sample_rate(), w.t0());
}

TEST(EstimateTof, DelayShiftsIndexExactly) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::uniform_int_distribution<std::size_t> pos(200, 1500), delay(0, 600);
  const std::vector<double> pat = Burst(140, 728e3);
  const ReferencePattern r(pat, Modality::kOptoacoustic);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(3200);
    for (double& x : s) x = noise(rng);
    const std::size_t at = pos(rng);
    for (std::size_t k = 0; k < pat.size(); ++k) s[at + k] += pat[k];
    const Waveform w(std::move(s), kFs);
    const std::size_t k = delay(rng);
    const SearchWindow win{100, 2900};
    const TofEstimate a = EstimateTofOa(w, r, win);
    const TofEstimate b = EstimateTofOa(Delay(w, k), r, win);
    EXPECT_EQ(b.peak_index, a.peak_index + k) << "trial " << trial;
  }
}

TEST(EstimateTof, ArgmaxInvariantToPositiveScale) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> noise(0.0, 0.2);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  const std::vector<double> pat = Burst(140, 728e3);
  const ReferencePattern r(pat, Modality::kUltrasound);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(3200);
    for (double& x : s) x = noise(rng);
    for (std::size_t k = 0; k < pat.size(); ++k) s[1700 + k] += pat[k];
    const double c = scale(rng);
    std::vector<double> t = s;
    for (double& x : t) x *= c;
    const SearchWindow win{1200, 2000};
    const TofEstimate a = EstimateTofUs(Waveform(s, kFs), r, win);
    const TofEstimate b = EstimateTofUs(Waveform(t, kFs), r, win);
    EXPECT_EQ(a.peak_index, b.peak_index);
    EXPECT_NEAR(a.confidence, b.confidence, 1e-12);
  }
}

TEST(EstimateTof, BenchRoundTripIsTwiceOneWay) {
  const bench::Scene s = bench::BlockScene(3);
  const bench::MaterialSpec& mat = s.objects[0].material;
  const ReferencePattern us = bench::MakeReference(s, Modality::kUltrasound, mat);
  const ReferencePattern oa = bench::MakeReference(s, Modality::kOptoacoustic, mat);
  for (int trial = 0; trial < 100; ++trial) {
    const double d = 6.5 + 0.1 * trial;
    const Waveform o = PreprocessForTof(bench::SynthEcho(s, mat, d, 1000 + trial));
    // Both estimates here are one-way times, so the raw round trip is 2 t_US.
    const double t_us = 2.0 * EstimateTofUs(o, us, SearchWindow::FromTimes(o, kUsWindowBegin, kUsWindowEnd)).tof_s;
    const double t_oa = EstimateTofOa(o, oa, SearchWindow::FromTimes(o, kOaWindowBegin, kOaWindowEnd)).tof_s;
    EXPECT_NEAR(t_us / t_oa, 2.0, 0.02) << "d " << d;
  }
}

TEST(DetectOnset, FindsBurstStart) {
  const std::vector<double> pat = Burst(140, 728e3);
  for (std::size_t at : {300u, 901u, 2000u}) {
    const Waveform w = Embed(pat, 3200, at, 0.7);
    const std::size_t j = DetectOnset(w, {100, 3000}, 0.05);
    EXPECT_GE(j, at);
    EXPECT_LT(j, at + 20);
    EXPECT_EQ(DetectOnset(w, {100, 3000}, 1e-12), at + 1);  // Hann starts at zero
  }
  const Waveform zero(std::vector<double>(100, 0.0), kFs);
  EXPECT_EQ(CodeOf([&] { DetectOnset(zero, {0, 99}); }), ErrorCode::kNoSignal);
  EXPECT_EQ(CodeOf([&] { DetectOnset(zero, {0, 100}); }), ErrorCode::kWindowOutOfRange);
}


}  // namespace
}  // namespace pdm2
