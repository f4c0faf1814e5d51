#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "warpbci/error.hpp"
#include "warpbci/signal.hpp"

namespace warpbci {

struct ThresholdSpec {
  static constexpr double kEpochedDefault = -1.0;
  static constexpr double kContinuousDefault = 0.8;

  double eta{kEpochedDefault};
};

// Samples [onset, offset] (inclusive) of the signal exceeded the threshold.
struct DetectedEvent {
  std::size_t onset{0};
  std::size_t offset{0};
  double peak_energy{0.0};
  std::size_t trial{0};

  std::size_t length() const { return offset - onset + 1; }
  friend bool operator==(const DetectedEvent&, const DetectedEvent&) = default;
};

struct Moments {
  double mean{0.0};
  double stdev{0.0};
};

// Two-pass mean and population standard deviation.
inline Moments moments(std::span<const double> x) {
  if (x.empty()) throw EmptyInput("moments of an empty sequence");
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(x.size()))};
}

inline double threshold(std::span<const double> sig, const ThresholdSpec& spec) {
  const Moments m = moments(sig);
  return m.mean + spec.eta * m.stdev;
}

inline double threshold(const ArtifactSignal& sig, const ThresholdSpec& spec) {
  return threshold(std::span<const double>(sig.samples), spec);
}

// Span from the first to the last sample strictly above the threshold.
inline std::optional<DetectedEvent> detect_in_epoch(const ArtifactSignal& sig,
                                                    const ThresholdSpec& spec) {
  const double thr = threshold(sig, spec);
  std::optional<DetectedEvent> ev;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const double v = sig.samples[i];
    if (!(v > thr)) continue;
    if (!ev) {
      ev = DetectedEvent{i, i, v, 0};
    } else {
      ev->offset = i;
      ev->peak_energy = std::max(ev->peak_energy, v);
    }
  }
  return ev;
}

struct ContinuousParams {
  ThresholdSpec threshold{ThresholdSpec::kContinuousDefault};
  std::optional<std::size_t> smooth_len;  // defaults to 0.4 s of samples
  double merge_gap_s{0.2};
};

// Maximal runs strictly above the threshold; runs separated by fewer than
// merge_gap samples are joined.
inline std::vector<DetectedEvent> runs_above(std::span<const double> sig, double thr,
                                             std::size_t merge_gap, std::size_t trial = 0) {
  std::vector<DetectedEvent> runs;
  bool open = false;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const bool above = sig[i] > thr;
    if (above && !open) {
      if (!runs.empty() && i - runs.back().offset - 1 < merge_gap) {
        runs.back().offset = i;
      } else {
        runs.push_back({i, i, sig[i], trial});
      }
      open = true;
    } else if (above) {
      runs.back().offset = i;
    } else {
      open = false;
    }
    if (above) runs.back().peak_energy = std::max(runs.back().peak_energy, sig[i]);
  }
  return runs;
}

inline std::size_t merge_gap_samples(double merge_gap_s, double rate) {
  return static_cast<std::size_t>(std::lround(std::max(0.0, merge_gap_s) * rate));
}

inline std::vector<DetectedEvent> detect_continuous(const EegTrial& trial,
                                                    const ContinuousParams& params,
                                                    std::size_t trial_index = 0) {
  const std::size_t smooth =
      params.smooth_len.value_or(default_smooth_len(trial.sample_rate));
  const ArtifactSignal sig = artifact_signal(trial, smooth);
  return runs_above(sig.samples, threshold(sig, params.threshold),
                    merge_gap_samples(params.merge_gap_s, trial.sample_rate), trial_index);
}

struct MatchCounts {
  std::size_t tp{0};
  std::size_t fp{0};
  std::size_t fn{0};

  MatchCounts& operator+=(const MatchCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  double f1() const {
    const std::size_t denom = 2 * tp + fp + fn;
    return denom ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom) : 0.0;
  }
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

inline std::size_t overlap(const DetectedEvent& d, const Annotation& t) {
  const std::size_t lo = std::max(d.onset, t.start);
  const std::size_t hi = std::min(d.offset + 1, t.end);
  return hi > lo ? hi - lo : 0;
}

// Detections are taken in onset order; each claims the earliest unmatched
// truth window it covers by at least overlap_min of that window's length.
inline MatchCounts match_events(std::span<const DetectedEvent> detected,
                                std::span<const Annotation> truth, double overlap_min = 0.6) {
  if (!(overlap_min > 0.0 && overlap_min <= 1.0)) {
    throw ArgError("overlap_min must lie in (0, 1]");
  }
  std::vector<const DetectedEvent*> order;
  for (const auto& d : detected) order.push_back(&d);
  std::stable_sort(order.begin(), order.end(),
                   [](auto* a, auto* b) { return a->onset < b->onset; });
  std::vector<std::size_t> truth_order(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) truth_order[i] = i;
  std::stable_sort(truth_order.begin(), truth_order.end(),
                   [&](std::size_t a, std::size_t b) { return truth[a].start < truth[b].start; });

  std::vector<bool> used(truth.size(), false);
  MatchCounts counts;
  for (const DetectedEvent* d : order) {
    bool matched = false;
    for (std::size_t ti : truth_order) {
      if (used[ti]) continue;
      const Annotation& t = truth[ti];
      if (static_cast<double>(overlap(*d, t)) >= overlap_min * static_cast<double>(t.length())) {
        used[ti] = true;
        matched = true;
        break;
      }
    }
    if (matched) {
      ++counts.tp;
    } else {
      ++counts.fp;
    }
  }
  counts.fn = truth.size() - counts.tp;
  return counts;
}

struct SweepRow {
  double eta{0.0};
  MatchCounts counts;
  double f1{0.0};
};

struct SweepParams {
  std::optional<std::size_t> smooth_len;
  double merge_gap_s{0.2};
  double overlap_min{0.6};
};

// lo, lo + step, ... up to hi, rounded to 1e-9 so 0.8 prints as 0.8.
inline std::vector<double> eta_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw ArgError("bad eta grid");
  std::vector<double> etas;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) etas.push_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
  return etas;
}

// True when the curve rises to its maximum and then falls, allowing wobbles
// that stay within one grid step of the peak.
inline bool unimodal_within_one_step(std::span<const SweepRow> rows) {
  if (rows.empty()) return false;
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].f1 > rows[best].f1) best = i;
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const bool rising = rows[i].f1 > rows[i - 1].f1;
    const bool falling = rows[i].f1 < rows[i - 1].f1;
    if (i > best + 1 && rising) return false;
    if (i + 1 < best && falling) return false;
  }
  return true;
}

// Detection F1 per eta, pooled over all trials. Rows sorted by eta.
inline std::vector<SweepRow> f1_sweep(std::span<const EegTrial> trials, std::vector<double> etas,
                                      const SweepParams& params = {}) {
  if (trials.empty() || etas.empty()) throw EmptyInput("f1 sweep needs trials and eta values");
  std::size_t truth_total = 0;
  for (const auto& t : trials) truth_total += t.annotations.size();
  if (truth_total == 0) throw EmptyInput("f1 sweep needs annotated trials");

  std::sort(etas.begin(), etas.end());
  std::vector<ArtifactSignal> signals;
  signals.reserve(trials.size());
  for (const auto& t : trials) {
    signals.push_back(
        artifact_signal(t, params.smooth_len.value_or(default_smooth_len(t.sample_rate))));
  }
  std::vector<SweepRow> rows;
  for (double eta : etas) {
    SweepRow row{eta, {}, 0.0};
    for (std::size_t i = 0; i < trials.size(); ++i) {
      const double thr = threshold(signals[i], ThresholdSpec{eta});
      const auto events = runs_above(
          signals[i].samples, thr, merge_gap_samples(params.merge_gap_s, trials[i].sample_rate), i);
      row.counts += match_events(events, trials[i].annotations, params.overlap_min);
    }
    row.f1 = row.counts.f1();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace warpbci
