/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/boss.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <set>

#include "pdm2/error.hpp"
#include "pdm2/seed.hpp"

namespace pdm2 {
namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode CodeOf(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kIo;
}

std::vector<double> Noise(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> s(n);
  for (double& v : s) v = g(rng);
  return s;
}

std::vector<double> Tone(std::size_t n, double cycles_per_sample, double phase, double noise,
                         std::uint64_t seed) {
  std::vector<double> s = Noise(n, seed, noise);
  for (std::size_t k = 0; k < n; ++k) s[k] += std::sin(2.0 * kPi * cycles_per_sample * k + phase);
  return s;
}

// Direct-sum SFA word of one window, as an oracle for the sliding transform.
SfaWord OracleWord(std::span<const double> w, const SfaParams& p, const SfaBinning& b) {
  std::vector<double> x(w.begin(), w.end());
  const double n = static_cast<double>(x.size());
  if (p.normalize_windows) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    for (double& v : x) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  }
  std::vector<double> coef;
  const std::size_t first = p.normalize_windows ? 1 : 0;
  for (std::size_t f = first; coef.size() < p.word_len; ++f) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * std::polar(1.0, -2.0 * kPi * f * k / n);
    coef.push_back(acc.real());
    coef.push_back(acc.imag());
  }
  return Quantize(coef, b);
}

TEST(SfaParams, Validation) {
  SfaParams p;
  p.window_len = 16;
  ValidateParams(p);
  p.word_len = 7;
  EXPECT_EQ(CodeOf([&] { ValidateParams(p); }), ErrorCode::kInvalidArgument);
  p.word_len = 18;
  EXPECT_EQ(CodeOf([&] { ValidateParams(p); }), ErrorCode::kInvalidArgument);
  p.word_len = 8;
  p.alphabet = 9;
  EXPECT_EQ(CodeOf([&] { ValidateParams(p); }), ErrorCode::kInvalidArgument);
  p.alphabet = 1;
  EXPECT_EQ(CodeOf([&] { ValidateParams(p); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(ResolveWindow(SfaParams{}, 1600), 200u);
  EXPECT_EQ(ResolveWindow(SfaParams{}, 40), 16u);
}

TEST(SfaFit, ThreeBoundariesForFourSymbols) {
  std::vector<std::vector<double>> train{Noise(300, 1), Noise(300, 2), Noise(300, 3)};
  SfaParams p;
  p.window_len = 32;
  const SfaBinning b = SfaFit(train, p);
  EXPECT_FALSE(b.degenerate);
  ASSERT_EQ(b.boundaries.size(), 8u);
  for (const auto& cuts : b.boundaries) {
    ASSERT_EQ(cuts.size(), 3u);
    EXPECT_LT(cuts[0], cuts[1]);
    EXPECT_LT(cuts[1], cuts[2]);
  }
}

TEST(SfaFit, EquiDepthSplitsWindowsEvenly) {
  std::vector<std::vector<double>> train{Noise(2000, 9)};
  SfaParams p;
  p.window_len = 40;
  p.word_len = 2;
  p.normalize_windows = false;
  const SfaBinning b = SfaFit(train, p);
  // Each symbol of the first coefficient (the window sum) holds a quarter.
  std::array<int, 4> hist{};
  const std::size_t rows = train[0].size() - p.window_len + 1;
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < p.window_len; ++k) sum += train[0][r + k];
    ++hist[std::upper_bound(b.boundaries[0].begin(), b.boundaries[0].end(), sum) - b.boundaries[0].begin()];
  }
  for (int h : hist) EXPECT_NEAR(h, rows / 4.0, 2.0);
}

TEST(SfaFit, ConstantSeriesFallsBackToEquiWidth) {
  std::vector<std::vector<double>> train{std::vector<double>(100, 3.0), std::vector<double>(100, 3.0)};
  SfaParams p;
  p.window_len = 16;
  const SfaBinning b = SfaFit(train, p);
  EXPECT_TRUE(b.degenerate);
  for (const auto& cuts : b.boundaries) {
    ASSERT_EQ(cuts.size(), 3u);
    EXPECT_LT(cuts[0], cuts[1]);
    EXPECT_LT(cuts[1], cuts[2]);
  }
  // Every window maps to one word.
  EXPECT_EQ(BossTransform(train[0], p, b).size(), 1u);
}

TEST(SfaFit, SeparatedClassesLandInDifferentSymbols) {
  SfaParams p;
  p.window_len = 32;
  p.word_len = 2;
  p.normalize_windows = false;
  std::vector<std::vector<double>> train;
  for (int i = 0; i < 4; ++i) {
    std::vector<double> up = Noise(200, 10 + i, 0.1), down = Noise(200, 20 + i, 0.1);
    for (double& v : up) v += 1.0;
    for (double& v : down) v -= 1.0;
    train.push_back(up);
    train.push_back(down);
  }
  const SfaBinning b = SfaFit(train, p);
  const double up_mean = 32.0, down_mean = -32.0;
  const auto symbol = [&](double x) {
    return std::upper_bound(b.boundaries[0].begin(), b.boundaries[0].end(), x) - b.boundaries[0].begin();
  };
  EXPECT_EQ(symbol(up_mean), 3);
  EXPECT_EQ(symbol(down_mean), 0);
}

TEST(SfaFit, TooShort) {
  std::vector<std::vector<double>> train{Noise(10, 1)};
  SfaParams p;
  p.window_len = 16;
  EXPECT_EQ(CodeOf([&] { SfaFit(train, p); }), ErrorCode::kSeriesTooShort);
  EXPECT_EQ(CodeOf([&] { SfaFit({}, p); }), ErrorCode::kEmptyInput);
}

TEST(BossTransform, MatchesDirectOracle) {
  for (bool normalize : {true, false}) {
    SfaParams p;
    p.window_len = 24;
    p.word_len = 6;
    p.alphabet = 3;
    p.normalize_windows = normalize;
    const std::vector<double> s = Tone(300, 0.07, 0.3, 0.5, 4);
    const std::vector<std::vector<double>> train{s, Noise(300, 5)};
    const SfaBinning b = SfaFit(train, p);
    BossHistogram expected;
    SfaWord prev = ~SfaWord{0};
    for (std::size_t r = 0; r + p.window_len <= s.size(); ++r) {
      const SfaWord w = OracleWord(std::span<const double>(s).subspan(r, p.window_len), p, b);
      if (w != prev) ++expected[w];
      prev = w;
    }
    // Coefficients within rounding of a cut may flip; require near equality.
    const BossHistogram got = BossTransform(s, p, b);
    int mismatch = 0;
    for (const auto& [w, c] : expected) {
      const auto it = got.find(w);
      mismatch += std::abs(c - (it == got.end() ? 0 : it->second));
    }
    EXPECT_LE(mismatch, 2) << normalize;
  }
}

TEST(BossTransform, PeriodicSeriesHasFewWords) {
  SfaParams p;
  p.window_len = 32;
  const std::size_t period = 16;
  std::vector<double> periodic(1000);
  for (std::size_t k = 0; k < periodic.size(); ++k) periodic[k] = std::sin(2.0 * kPi * k / period) + 0.3 * std::cos(4.0 * kPi * k / period);
  const std::vector<double> noise = Noise(1000, 8);
  // Cuts fitted on unrelated noise, so no cut sits exactly on a periodic coefficient.
  const std::vector<std::vector<double>> train{Noise(1000, 9)};
  const SfaBinning b = SfaFit(train, p);
  const BossHistogram hp = BossTransform(periodic, p, b);
  const BossHistogram hn = BossTransform(noise, p, b);
  // Windows repeat with the period, so at most `period` words occur.
  EXPECT_LE(hp.size(), period);
  int max_count = 0;
  for (const auto& [w, c] : hp) max_count = std::max(max_count, c);
  EXPECT_GE(max_count, 10);
  EXPECT_GT(hn.size(), 5 * hp.size());
}

TEST(BossTransform, DeterministicAndDuplicateTailInvariant) {
  SfaParams p;
  p.window_len = 32;
  std::vector<double> s = Noise(200, 3);
  s.insert(s.end(), 100, 0.5);
  const std::vector<std::vector<double>> train{s, Noise(300, 4)};
  const SfaBinning b = SfaFit(train, p);
  const BossHistogram h1 = BossTransform(s, p, b);
  EXPECT_EQ(h1, BossTransform(s, p, b));
  // Once the window is inside the flat tail, every new window repeats a word.
  std::vector<double> longer = s;
  longer.insert(longer.end(), 57, 0.5);
  EXPECT_EQ(h1, BossTransform(longer, p, b));
}

TEST(BossTransform, SegmentsTagWords) {
  SfaParams p;
  p.window_len = 32;
  p.segment_len = 200;
  const std::vector<double> a = Tone(200, 0.1, 0.0, 0.05, 1), z(200, 0.0);
  std::vector<double> first = a, second = z;
  first.insert(first.end(), z.begin(), z.end());
  second.insert(second.end(), a.begin(), a.end());
  const std::vector<std::vector<double>> train{first, second};
  const SfaBinning b = SfaFit(train, p);
  const BossHistogram h1 = BossTransform(first, p, b), h2 = BossTransform(second, p, b);
  EXPECT_NE(h1, h2);
  EXPECT_GT(BossDistance(h1, h2), 0.0);
  // Stripping the segment tag leaves the same bag for both orders.
  const auto untag = [](const BossHistogram& h) {
    BossHistogram out;
    for (const auto& [w, c] : h) out[w & ((SfaWord{1} << 56) - 1)] += c;
    return out;
  };
  EXPECT_EQ(untag(h1), untag(h2));
  // A segment shorter than the window is rejected.
  std::vector<double> ragged = first;
  ragged.resize(410);
  EXPECT_EQ(CodeOf([&] { BossTransform(ragged, p, b); }), ErrorCode::kSeriesTooShort);
}

TEST(BossDistance, Examples) {
  const BossHistogram a{{7, 2}};
  EXPECT_EQ(BossDistance(a, {}), 4.0);
  EXPECT_EQ(BossDistance({}, a), 0.0);
  EXPECT_EQ(BossDistance(a, a), 0.0);
}

TEST(BossDistance, MatchesUnionOracle) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> word(0, 12), count(1, 5), size(0, 8);
  for (int trial = 0; trial < 500; ++trial) {
    BossHistogram a, b;
    for (int i = size(rng); i > 0; --i) a[static_cast<SfaWord>(word(rng))] = count(rng);
    for (int i = size(rng); i > 0; --i) b[static_cast<SfaWord>(word(rng))] = count(rng);
    double oracle = 0.0;
    for (SfaWord w = 0; w <= 12; ++w) {
      if (!a.count(w)) continue;
      const int diff = a.at(w) - (b.count(w) ? b.at(w) : 0);
      oracle += diff * diff;
    }
    EXPECT_EQ(BossDistance(a, b), oracle);
    EXPECT_GE(BossDistance(a, b), 0.0);
    EXPECT_EQ(BossDistance(a, a), 0.0);
  }
}

struct ToyData {
  std::vector<std::vector<double>> series;
  std::vector<std::string> labels;
};

// Classes differ by tone frequency.
ToyData Toy(int classes, int per_class, std::uint64_t seed) {
  ToyData d;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      d.series.push_back(Tone(256, 0.04 + 0.05 * c, phase(rng), 0.2, rng()));
      d.labels.push_back("class" + std::to_string(c));
    }
  }
  return d;
}

TEST(Classify, TrainingSeriesMapsToItsLabel) {
  const ToyData d = Toy(3, 5, 1);
  SfaParams p;
  p.window_len = 32;
  const BossModel m = TrainBoss(d.series, d.labels, p);
  for (std::size_t i = 0; i < d.series.size(); ++i) EXPECT_EQ(Classify(m, d.series[i]), d.labels[i]);
  EXPECT_EQ(CodeOf([&] { Classify(BossModel{}, d.series[0]); }), ErrorCode::kEmptyModel);
}

TEST(Classify, TieKeepsFirstTrainingBag) {
  const std::vector<double> s = Noise(100, 2);
  const std::vector<std::vector<double>> series{s, s};
  const std::vector<std::string> labels{"first", "second"};
  SfaParams p;
  p.window_len = 16;
  EXPECT_EQ(Classify(TrainBoss(series, labels, p), s), "first");
}

TEST(Classify, NormalizedAmplitudeInvariance) {
  const ToyData d = Toy(3, 6, 2);
  SfaParams p;
  p.window_len = 32;
  const BossModel m = TrainBoss(d.series, d.labels, p);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  const ToyData q = Toy(3, 40, 99);
  for (std::size_t i = 0; i < q.series.size(); ++i) {
    std::vector<double> scaled = q.series[i];
    const double s = scale(rng);
    for (double& v : scaled) v *= s;
    EXPECT_EQ(Classify(m, scaled), Classify(m, q.series[i])) << i;
  }
}

TEST(Evaluate, SeparableIsDiagonal) {
  const ToyData d = Toy(3, 8, 5);
  SfaParams p;
  p.window_len = 32;
  const ConfusionMatrix cm = Evaluate(d.series, d.labels, p, 10, 0.75, 1);
  ASSERT_EQ(cm.labels.size(), 3u);
  EXPECT_EQ(cm.trial_count, 10);
  EXPECT_EQ(cm.MeanAccuracy(), 1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    long row = 0;
    for (long c : cm.counts[i]) row += c;
    // 8 per class at 3:1 leaves 2 test items per trial.
    EXPECT_EQ(row, 2 * 10);
  }
}

TEST(Evaluate, ShuffledLabelsAreAtChance) {
  ToyData d = Toy(4, 12, 6);
  std::mt19937_64 rng(7);
  std::shuffle(d.labels.begin(), d.labels.end(), rng);
  SfaParams p;
  p.window_len = 32;
  const ConfusionMatrix cm = Evaluate(d.series, d.labels, p, 50, 0.75, 3);
  EXPECT_NEAR(cm.MeanAccuracy(), 0.25, 0.10);
}

TEST(Evaluate, DeterministicAndSingleTrialMatchesDirectRun) {
  const ToyData d = Toy(3, 8, 8);
  SfaParams p;
  p.window_len = 48;
  const ConfusionMatrix a = Evaluate(d.series, d.labels, p, 5, 0.75, 42);
  const ConfusionMatrix b = Evaluate(d.series, d.labels, p, 5, 0.75, 42);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.trial_accuracy, b.trial_accuracy);

  // One trial uses the split drawn from DeriveSeed(seed, 0).
  const ConfusionMatrix one = Evaluate(d.series, d.labels, p, 1, 0.75, 42);
  const Split split = StratifiedSplit(d.labels, 0.75, DeriveSeed(42, 0));
  std::vector<std::vector<double>> train_x;
  std::vector<std::string> train_y;
  for (std::size_t i : split.train) {
    train_x.push_back(d.series[i]);
    train_y.push_back(d.labels[i]);
  }
  const BossModel m = TrainBoss(train_x, train_y, p);
  std::vector<std::vector<long>> direct(3, std::vector<long>(3, 0));
  for (std::size_t i : split.test) {
    const auto idx = [&](const std::string& l) { return l.back() - '0'; };
    ++direct[idx(d.labels[i])][idx(Classify(m, d.series[i]))];
  }
  EXPECT_EQ(one.counts, direct);
  EXPECT_EQ(EvaluateSplit(d.series, d.labels, p, split).counts, direct);
}

TEST(Evaluate, StratifiedSplitShape) {
  const ToyData d = Toy(2, 8, 9);
  const Split s = StratifiedSplit(d.labels, 0.75, 1);
  EXPECT_EQ(s.train.size(), 12u);
  EXPECT_EQ(s.test.size(), 4u);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  for (std::size_t i : s.test) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), 16u);
}

TEST(Evaluate, InsufficientData) {
  const ToyData one_class = Toy(1, 8, 1);
  SfaParams p;
  p.window_len = 32;
  EXPECT_EQ(CodeOf([&] { Evaluate(one_class.series, one_class.labels, p, 2, 0.75, 1); }),
            ErrorCode::kInsufficientData);
  const ToyData small = Toy(2, 3, 1);
  EXPECT_EQ(CodeOf([&] { Evaluate(small.series, small.labels, p, 2, 0.75, 1); }), ErrorCode::kInsufficientData);
}

}  // namespace
}  // namespace pdm2
