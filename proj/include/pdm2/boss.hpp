/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pdm2/signal.hpp"

// Bag-of-SFA-symbols classification of preprocessed waveforms.
namespace pdm2 {

struct SfaParams {
  std::size_t window_len = 0;  // 0 picks 1/8 of the series length, at least 16
  std::size_t word_len = 8;
  int alphabet = 4;
  bool normalize_windows = true;
  // Splits the series into consecutive segments of this many samples; windows
  // stay inside one segment and words carry the segment index. 0 keeps the
  // series whole.
  std::size_t segment_len = 0;
};

// Throws InvalidArgument unless word_len is even, 2 <= word_len <= window_len,
// word_len <= 16 and alphabet is in [2, 8].
void ValidateParams(const SfaParams& p);

// Concrete window length for a series (or segment) of the given length.
std::size_t ResolveWindow(const SfaParams& p, std::size_t series_len);

// Symbols packed three bits each, first coefficient in the low bits; the
// segment index sits in the top byte.
using SfaWord = std::uint64_t;
using BossHistogram = std::map<SfaWord, int>;

struct SfaBinning {
  // boundaries[c] holds alphabet - 1 strictly increasing cut points.
  std::vector<std::vector<double>> boundaries;
  // Set when equi-depth cuts collapsed and equi-width cuts were used.
  bool degenerate = false;
};

struct BossModel {
  SfaParams params;  // window_len resolved
  SfaBinning binning;
  std::vector<std::string> labels;
  std::vector<BossHistogram> bags;
};

// Multiple coefficient binning over every window of the training series.
// Throws SeriesTooShort or EmptyInput.
SfaBinning SfaFit(std::span<const std::vector<double>> series, const SfaParams& p);

SfaWord Quantize(std::span<const double> coefficients, const SfaBinning& binning);

// Stride-1 windows, one word each, consecutive duplicates dropped.
// Throws SeriesTooShort when a segment is shorter than the window.
BossHistogram BossTransform(std::span<const double> series, const SfaParams& p,
                            const SfaBinning& binning);
BossHistogram BossTransform(std::span<const double> series, const BossModel& model);

// Sum over the words of a of (a[w] - b[w])^2. Not symmetric.
double BossDistance(const BossHistogram& a, const BossHistogram& b);

BossModel TrainBoss(std::span<const std::vector<double>> series,
                    std::span<const std::string> labels, const SfaParams& p);

// 1-nearest training bag; the first bag wins a tie. Throws EmptyModel.
const std::string& Classify(const BossModel& model, std::span<const double> series);

// Classifier input cut from a waveform.
enum class Segment { kOa, kUs, kBoth, kFull };
Segment ParseSegment(std::string_view name);  // "oa", "us", "both", "full"

// Preprocesses for classification and cuts the OA window, the US window, both
// concatenated, or keeps the whole trace.
std::vector<double> ClassifierInput(const Waveform& raw, Segment segment);

struct ConfusionMatrix {
  std::vector<std::string> labels;
  // counts[truth][predicted], summed over trials.
  std::vector<std::vector<long>> counts;
  int trial_count = 0;
  std::vector<double> trial_accuracy;

  double MeanAccuracy() const;
  long Total() const;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per class, a shuffled train_fraction share (rounded, at least one item on
// each side) goes to training.
Split StratifiedSplit(std::span<const std::string> labels, double train_fraction, std::uint64_t seed);

// Fits on split.train and classifies split.test.
ConfusionMatrix EvaluateSplit(std::span<const std::vector<double>> series,
                              std::span<const std::string> labels, const SfaParams& p,
                              const Split& split);

// Repeated stratified splits, accumulated. Trial t uses DeriveSeed(seed, t),
// so the result does not depend on the thread count. Throws InsufficientData
// for fewer than two classes or a class with fewer than four series.
ConfusionMatrix Evaluate(std::span<const std::vector<double>> series,
                         std::span<const std::string> labels, const SfaParams& p, int trials,
                         double train_fraction, std::uint64_t seed);

}  // namespace pdm2
