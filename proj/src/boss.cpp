/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/boss.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>

#include "pdm2/error.hpp"
#include "pdm2/kernels.hpp"
#include "pdm2/seed.hpp"
#include "pdm2/tof.hpp"

namespace pdm2 {

namespace {

constexpr int kSymbolBits = 3;
constexpr int kSegmentShift = 56;
constexpr std::size_t kMaxWordLen = 16;

// Row-major DFT features, one row of word_len values per window.
struct Features {
  std::size_t rows = 0;
  std::vector<double> values;
  std::vector<std::size_t> segment_end;  // exclusive row bound per segment
};

Features ComputeFeatures(std::span<const double> series, const SfaParams& p) {
  const std::size_t seg = p.segment_len == 0 ? series.size() : p.segment_len;
  const std::size_t n_seg = series.empty() ? 1 : (series.size() + seg - 1) / seg;
  if (n_seg > 255) throw Error(ErrorCode::kInvalidArgument, "too many segments");
  Features f;
  // The mean carries no shape once windows are normalized.
  const std::size_t first = p.normalize_windows ? 1 : 0;
  for (std::size_t k = 0; k < n_seg; ++k) {
    const std::span<const double> part = series.subspan(k * seg, std::min(seg, series.size() - k * seg));
    if (part.size() < p.window_len) {
      throw Error(ErrorCode::kSeriesTooShort, "segment of " + std::to_string(part.size()) +
                                                  " samples is shorter than the window");
    }
    const std::size_t rows = part.size() - p.window_len + 1;
    const std::size_t offset = f.values.size();
    f.values.resize(offset + rows * p.word_len);
    const std::span<double> out = std::span<double>(f.values).subspan(offset);
    if (out.size() >= kernels::kParallelThreshold) {
      kernels::SlidingDftParallel(part, p.window_len, first, p.word_len, p.normalize_windows, out);
    } else {
      kernels::SlidingDftSerial(part, p.window_len, first, p.word_len, p.normalize_windows, out);
    }
    f.rows += rows;
    f.segment_end.push_back(f.rows);
  }
  return f;
}

SfaBinning FitBinning(std::span<const Features* const> features, const SfaParams& p) {
  std::size_t total = 0;
  for (const Features* f : features) total += f->rows;
  if (total == 0) throw Error(ErrorCode::kEmptyInput, "no training windows");

  SfaBinning b;
  b.boundaries.resize(p.word_len);
  std::vector<double> column(total);
  const auto alphabet = static_cast<std::size_t>(p.alphabet);
  for (std::size_t c = 0; c < p.word_len; ++c) {
    std::size_t k = 0;
    for (const Features* f : features) {
      for (std::size_t r = 0; r < f->rows; ++r) column[k++] = f->values[r * p.word_len + c];
    }
    std::vector<double>& cuts = b.boundaries[c];
    cuts.resize(alphabet - 1);
    // Equi-depth cut points; each selection narrows the range of the next.
    auto lo_it = column.begin();
    for (std::size_t i = 1; i < alphabet; ++i) {
      const auto nth = column.begin() + static_cast<long>(i * total / alphabet);
      std::nth_element(lo_it, nth, column.end());
      cuts[i - 1] = *nth;
      lo_it = nth;
    }
    bool increasing = true;
    for (std::size_t i = 1; i < cuts.size(); ++i) increasing = increasing && cuts[i] > cuts[i - 1];
    if (!increasing) {
      b.degenerate = true;
      const auto [min_it, max_it] = std::minmax_element(column.begin(), column.end());
      double lo = *min_it, hi = *max_it;
      if (!(hi - lo > 1e-12 * std::max(1.0, std::abs(lo)))) {
        lo -= 0.5;
        hi += 0.5;
      }
      for (std::size_t i = 1; i < alphabet; ++i) {
        cuts[i - 1] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(alphabet);
      }
    }
  }
  return b;
}

BossHistogram Histogram(const Features& f, const SfaParams& p, const SfaBinning& binning) {
  BossHistogram h;
  std::size_t r = 0;
  for (std::size_t k = 0; k < f.segment_end.size(); ++k) {
    bool have_prev = false;
    SfaWord prev = 0;
    for (; r < f.segment_end[k]; ++r) {
      const SfaWord w = Quantize(std::span<const double>(f.values).subspan(r * p.word_len, p.word_len), binning) |
                        (static_cast<SfaWord>(k) << kSegmentShift);
      if (have_prev && w == prev) continue;
      ++h[w];
      prev = w;
      have_prev = true;
    }
  }
  return h;
}

SfaParams Resolved(const SfaParams& p, std::size_t series_len) {
  SfaParams r = p;
  r.window_len = ResolveWindow(p, series_len);
  ValidateParams(r);
  return r;
}

std::vector<std::string> LabelOrder(std::span<const std::string> labels) {
  std::vector<std::string> order;
  for (const std::string& l : labels) {
    if (std::find(order.begin(), order.end(), l) == order.end()) order.push_back(l);
  }
  return order;
}

std::size_t IndexOf(const std::vector<std::string>& order, const std::string& l) {
  return static_cast<std::size_t>(std::find(order.begin(), order.end(), l) - order.begin());
}

ConfusionMatrix EmptyMatrix(std::vector<std::string> order) {
  ConfusionMatrix m;
  m.counts.assign(order.size(), std::vector<long>(order.size(), 0));
  m.labels = std::move(order);
  return m;
}

using FlatBag = std::vector<std::pair<SfaWord, int>>;

FlatBag Flatten(const BossHistogram& h) { return {h.begin(), h.end()}; }

// BossDistance by a merge walk over sorted words; same summation order.
double FlatDistance(const FlatBag& a, const FlatBag& b) {
  double sum = 0.0;
  auto it = b.begin();
  for (const auto& [word, count] : a) {
    while (it != b.end() && it->first < word) ++it;
    const double diff = count - ((it != b.end() && it->first == word) ? it->second : 0);
    sum += diff * diff;
  }
  return sum;
}

// One trial on precomputed features.
ConfusionMatrix RunSplit(const std::vector<Features>& features, std::span<const std::string> labels,
                         const std::vector<std::string>& order, const SfaParams& p, const Split& split) {
  std::vector<const Features*> train;
  for (std::size_t i : split.train) train.push_back(&features[i]);
  const SfaBinning binning = FitBinning(train, p);
  std::vector<FlatBag> bags;
  for (std::size_t i : split.train) bags.push_back(Flatten(Histogram(features[i], p, binning)));
  ConfusionMatrix m = EmptyMatrix(order);
  m.trial_count = 1;
  long correct = 0;
  for (std::size_t i : split.test) {
    const FlatBag q = Flatten(Histogram(features[i], p, binning));
    std::size_t best = 0;
    double best_d = FlatDistance(q, bags[0]);
    for (std::size_t j = 1; j < bags.size(); ++j) {
      const double d = FlatDistance(q, bags[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    const std::size_t t = IndexOf(order, labels[i]);
    const std::size_t g = IndexOf(order, labels[split.train[best]]);
    ++m.counts[t][g];
    if (t == g) ++correct;
  }
  m.trial_accuracy.push_back(split.test.empty() ? 0.0
                                                : static_cast<double>(correct) / static_cast<double>(split.test.size()));
  return m;
}

void CheckDataset(std::span<const std::vector<double>> series, std::span<const std::string> labels) {
  if (series.size() != labels.size()) throw Error(ErrorCode::kInvalidArgument, "one label per series is required");
  if (series.empty()) throw Error(ErrorCode::kEmptyInput, "empty dataset");
}

}  // namespace

void ValidateParams(const SfaParams& p) {
  if (p.word_len < 2 || p.word_len % 2 != 0 || p.word_len > p.window_len) {
    throw Error(ErrorCode::kInvalidArgument, "word_len must be even and in [2, window_len]");
  }
  if (p.word_len > kMaxWordLen) throw Error(ErrorCode::kInvalidArgument, "word_len must be at most 16");
  if (p.alphabet < 2 || p.alphabet > 8) throw Error(ErrorCode::kInvalidArgument, "alphabet must be in [2, 8]");
}

std::size_t ResolveWindow(const SfaParams& p, std::size_t series_len) {
  if (p.window_len != 0) return p.window_len;
  const std::size_t n = p.segment_len != 0 ? std::min(p.segment_len, series_len) : series_len;
  return std::max<std::size_t>(16, n / 8);
}

SfaBinning SfaFit(std::span<const std::vector<double>> series, const SfaParams& p) {
  if (series.empty()) throw Error(ErrorCode::kEmptyInput, "no training series");
  const SfaParams r = Resolved(p, series.front().size());
  std::vector<Features> features;
  for (const auto& s : series) features.push_back(ComputeFeatures(s, r));
  std::vector<const Features*> ptrs;
  for (const Features& f : features) ptrs.push_back(&f);
  return FitBinning(ptrs, r);
}

SfaWord Quantize(std::span<const double> coefficients, const SfaBinning& binning) {
  SfaWord w = 0;
  for (std::size_t c = 0; c < coefficients.size(); ++c) {
    const std::vector<double>& cuts = binning.boundaries[c];
    const auto symbol = static_cast<SfaWord>(std::upper_bound(cuts.begin(), cuts.end(), coefficients[c]) - cuts.begin());
    w |= symbol << (kSymbolBits * c);
  }
  return w;
}

BossHistogram BossTransform(std::span<const double> series, const SfaParams& p, const SfaBinning& binning) {
  const SfaParams r = Resolved(p, series.size());
  if (binning.boundaries.size() != r.word_len) {
    throw Error(ErrorCode::kInvalidArgument, "binning does not match word_len");
  }
  return Histogram(ComputeFeatures(series, r), r, binning);
}

BossHistogram BossTransform(std::span<const double> series, const BossModel& model) {
  return BossTransform(series, model.params, model.binning);
}

double BossDistance(const BossHistogram& a, const BossHistogram& b) {
  double sum = 0.0;
  for (const auto& [word, count] : a) {
    const auto it = b.find(word);
    const double diff = count - (it == b.end() ? 0 : it->second);
    sum += diff * diff;
  }
  return sum;
}

BossModel TrainBoss(std::span<const std::vector<double>> series, std::span<const std::string> labels,
                    const SfaParams& p) {
  CheckDataset(series, labels);
  BossModel m;
  m.params = Resolved(p, series.front().size());
  m.binning = SfaFit(series, m.params);
  for (std::size_t i = 0; i < series.size(); ++i) {
    m.labels.push_back(labels[i]);
    m.bags.push_back(BossTransform(series[i], m));
  }
  return m;
}

const std::string& Classify(const BossModel& model, std::span<const double> series) {
  if (model.bags.empty()) throw Error(ErrorCode::kEmptyModel, "model has no training bags");
  const BossHistogram q = BossTransform(series, model);
  std::size_t best = 0;
  double best_d = BossDistance(q, model.bags[0]);
  for (std::size_t j = 1; j < model.bags.size(); ++j) {
    const double d = BossDistance(q, model.bags[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return model.labels[best];
}

Segment ParseSegment(std::string_view name) {
  if (name == "oa") return Segment::kOa;
  if (name == "us") return Segment::kUs;
  if (name == "both") return Segment::kBoth;
  if (name == "full") return Segment::kFull;
  throw Error(ErrorCode::kInvalidArgument, "unknown segment '" + std::string(name) + "'");
}

std::vector<double> ClassifierInput(const Waveform& raw, Segment segment) {
  const Waveform o = PreprocessForClassification(raw);
  const std::span<const double> s = o.samples();
  if (segment == Segment::kFull) return {s.begin(), s.end()};
  auto cut = [&](double t_begin, double t_end) {
    const double fs = o.sample_rate();
    const double a = std::round((t_begin - o.t0()) * fs), b = std::round((t_end - o.t0()) * fs);
    if (a < 0.0 || b > static_cast<double>(s.size())) {
      throw Error(ErrorCode::kWindowOutOfRange, "classifier segment lies outside the waveform");
    }
    return s.subspan(static_cast<std::size_t>(a), static_cast<std::size_t>(b - a));
  };
  std::vector<double> out;
  if (segment != Segment::kUs) {
    const auto oa = cut(kOaWindowBegin, kOaWindowEnd);
    out.insert(out.end(), oa.begin(), oa.end());
  }
  if (segment != Segment::kOa) {
    const auto us = cut(kUsWindowBegin, kUsWindowEnd);
    out.insert(out.end(), us.begin(), us.end());
  }
  return out;
}

double ConfusionMatrix::MeanAccuracy() const {
  long diag = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) diag += counts[i][i];
  const long total = Total();
  return total > 0 ? static_cast<double>(diag) / static_cast<double>(total) : 0.0;
}

long ConfusionMatrix::Total() const {
  long total = 0;
  for (const auto& row : counts) total = std::accumulate(row.begin(), row.end(), total);
  return total;
}

Split StratifiedSplit(std::span<const std::string> labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train fraction must lie in (0, 1)");
  }
  std::mt19937_64 rng(seed);
  Split split;
  for (const std::string& l : LabelOrder(labels)) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == l) idx.push_back(i);
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(idx.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + static_cast<long>(n_train));
    split.test.insert(split.test.end(), idx.begin() + static_cast<long>(n_train), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

ConfusionMatrix EvaluateSplit(std::span<const std::vector<double>> series, std::span<const std::string> labels,
                              const SfaParams& p, const Split& split) {
  CheckDataset(series, labels);
  if (split.train.empty()) throw Error(ErrorCode::kInsufficientData, "empty training split");
  const SfaParams r = Resolved(p, series.front().size());
  std::vector<Features> features;
  for (const auto& s : series) features.push_back(ComputeFeatures(s, r));
  return RunSplit(features, labels, LabelOrder(labels), r, split);
}

ConfusionMatrix Evaluate(std::span<const std::vector<double>> series, std::span<const std::string> labels,
                         const SfaParams& p, int trials, double train_fraction, std::uint64_t seed) {
  CheckDataset(series, labels);
  const std::vector<std::string> order = LabelOrder(labels);
  if (order.size() < 2) throw Error(ErrorCode::kInsufficientData, "at least two classes are required");
  for (const std::string& l : order) {
    if (std::count(labels.begin(), labels.end(), l) < 4) {
      throw Error(ErrorCode::kInsufficientData, "class '" + l + "' has fewer than four series");
    }
  }
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "at least one trial is required");

  const SfaParams r = Resolved(p, series.front().size());
  std::vector<Features> features(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) features[i] = ComputeFeatures(series[i], r);

  std::vector<ConfusionMatrix> per_trial(static_cast<std::size_t>(trials));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < trials; ++t) {
    try {
      const Split split = StratifiedSplit(labels, train_fraction, DeriveSeed(seed, static_cast<std::uint64_t>(t)));
      per_trial[static_cast<std::size_t>(t)] = RunSplit(features, labels, order, r, split);
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  ConfusionMatrix total = EmptyMatrix(order);
  for (const ConfusionMatrix& m : per_trial) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (std::size_t j = 0; j < order.size(); ++j) total.counts[i][j] += m.counts[i][j];
    }
    total.trial_accuracy.push_back(m.trial_accuracy.front());
  }
  total.trial_count = trials;
  return total;
}

}  // namespace pdm2
