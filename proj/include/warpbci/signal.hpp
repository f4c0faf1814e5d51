#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "warpbci/artifact_class.hpp"
#include "warpbci/error.hpp"
#include "warpbci/iir.hpp"

namespace warpbci {

// Ground-truth window [start, end) in samples.
struct Annotation {
  std::size_t start{0};
  std::size_t end{0};
  ArtifactClass label{ArtifactClass::EyeBlink};

  std::size_t length() const { return end - start; }
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// Multi-channel recording. data[ch][sample] in microvolts.
struct EegTrial {
  double sample_rate{0.0};
  std::vector<std::vector<double>> data;
  std::optional<ArtifactClass> label;
  std::string subject_id;
  std::string session_id;
  std::vector<Annotation> annotations;

  std::size_t channels() const { return data.size(); }
  std::size_t length() const { return data.empty() ? 0 : data.front().size(); }

  friend bool operator==(const EegTrial&, const EegTrial&) = default;
};

// Throws FormatError(0, ...) describing the first violated invariant.
inline void validate(const EegTrial& t) {
  if (!(t.sample_rate > 0.0) || !std::isfinite(t.sample_rate)) {
    throw FormatError(0, "sample rate must be positive");
  }
  if (t.data.empty()) throw FormatError(0, "trial has no channels");
  const std::size_t n = t.data.front().size();
  if (n == 0) throw FormatError(0, "trial has no samples");
  for (const auto& ch : t.data) {
    if (ch.size() != n) throw FormatError(0, "channels differ in length");
  }
  for (const auto& a : t.annotations) {
    if (!(a.start < a.end && a.end <= n)) {
      throw FormatError(0, "annotation [" + std::to_string(a.start) + "," +
                               std::to_string(a.end) + ") outside trial");
    }
  }
}

// Smoothed mean-energy signature of a window of a trial.
struct ArtifactSignal {
  std::vector<double> samples;
  double sample_rate{0.0};
  std::size_t source_start{0};
  std::size_t source_end{0};

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

struct FilterSpec {
  double band_low{0.3};
  double band_high{60.0};
  std::optional<double> notch{50.0};
  int order{4};
  double notch_quality{10.0};
};

inline void validate(const FilterSpec& spec, double sample_rate) {
  const double nyquist = sample_rate / 2.0;
  if (!(spec.band_low > 0.0 && spec.band_low < spec.band_high && spec.band_high < nyquist)) {
    throw SpecError("filter band must satisfy 0 < low < high < rate/2");
  }
  if (spec.notch && !(*spec.notch > spec.band_low && *spec.notch < spec.band_high)) {
    throw SpecError("notch frequency must lie inside the pass band");
  }
  if (spec.order < 4 || spec.order % 4 != 0) {
    throw SpecError("band-pass order must be a positive multiple of 4");
  }
  if (!(spec.notch_quality > 0.0)) throw SpecError("notch quality must be positive");
}

inline iir::Cascade design_bandpass_notch(const FilterSpec& spec, double sample_rate) {
  validate(spec, sample_rate);
  iir::Cascade cascade;
  // The band-pass order is split evenly between the high-pass and low-pass edges.
  for (double q : iir::butterworth_q(spec.order / 2)) {
    cascade.push_back(iir::highpass(spec.band_low, sample_rate, q));
  }
  for (double q : iir::butterworth_q(spec.order / 2)) {
    cascade.push_back(iir::lowpass(spec.band_high, sample_rate, q));
  }
  if (spec.notch) cascade.push_back(iir::notch(*spec.notch, sample_rate, spec.notch_quality));
  return cascade;
}

// Zero-phase band-pass plus optional notch, channel by channel.
inline EegTrial bandpass_notch(const EegTrial& trial, const FilterSpec& spec) {
  const iir::Cascade cascade = design_bandpass_notch(spec, trial.sample_rate);
  // About one period of the low edge so start-up transients settle in the padding.
  const auto pad = static_cast<std::size_t>(std::ceil(trial.sample_rate / spec.band_low));
  EegTrial out = trial;
  for (auto& ch : out.data) ch = cascade.filtfilt(ch, pad);
  return out;
}

inline EegTrial mean_center(const EegTrial& trial) {
  EegTrial out = trial;
  for (auto& ch : out.data) {
    if (ch.empty()) continue;
    double sum = 0.0;
    for (double v : ch) sum += v;
    const double mean = sum / static_cast<double>(ch.size());
    for (double& v : ch) v -= mean;
  }
  return out;
}

// Window of round(duration_s * rate) samples starting at start_sample.
// Annotations are clipped to the window and re-based.
inline EegTrial epoch(const EegTrial& trial, std::size_t start_sample, double duration_s) {
  const double want = std::round(duration_s * trial.sample_rate);
  if (!(want >= 1.0)) throw RangeError("epoch duration must cover at least one sample");
  const auto len = static_cast<std::size_t>(want);
  if (start_sample >= trial.length() || len > trial.length() - start_sample) {
    throw RangeError("epoch window [" + std::to_string(start_sample) + ", +" +
                     std::to_string(len) + ") exceeds trial length " +
                     std::to_string(trial.length()));
  }
  EegTrial out;
  out.sample_rate = trial.sample_rate;
  out.label = trial.label;
  out.subject_id = trial.subject_id;
  out.session_id = trial.session_id;
  out.data.reserve(trial.channels());
  for (const auto& ch : trial.data) {
    auto first = ch.begin() + static_cast<std::ptrdiff_t>(start_sample);
    out.data.emplace_back(first, first + static_cast<std::ptrdiff_t>(len));
  }
  const std::size_t stop = start_sample + len;
  for (const auto& a : trial.annotations) {
    const std::size_t s = std::max(a.start, start_sample);
    const std::size_t e = std::min(a.end, stop);
    if (s < e) out.annotations.push_back({s - start_sample, e - start_sample, a.label});
  }
  return out;
}

// Causal trailing mean over the last m samples. The first m-1 outputs average
// over the available prefix. Each output is an independent window sum so the
// batch and streaming paths agree bit for bit.
inline std::vector<double> moving_average(std::span<const double> samples, std::size_t m) {
  if (m == 0) throw ArgError("moving average window must be at least 1");
  std::vector<double> out(samples.size());
  for (std::size_t n = 0; n < samples.size(); ++n) {
    const std::size_t first = n + 1 >= m ? n + 1 - m : 0;
    double sum = 0.0;
    for (std::size_t i = first; i <= n; ++i) sum += samples[i];
    out[n] = sum / static_cast<double>(n + 1 - first);
  }
  return out;
}

// 0.4 s of samples, the smoothing span of the artifact signature.
inline std::size_t default_smooth_len(double sample_rate) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.4 * sample_rate)));
}

// Per-sample squared amplitude averaged across channels.
inline std::vector<double> mean_energy(const EegTrial& trial) {
  std::vector<double> energy(trial.length(), 0.0);
  for (const auto& ch : trial.data) {
    for (std::size_t i = 0; i < ch.size(); ++i) energy[i] += ch[i] * ch[i];
  }
  const auto k = static_cast<double>(trial.channels());
  for (double& e : energy) e /= k;
  return energy;
}

inline ArtifactSignal artifact_signal(const EegTrial& trial, std::size_t smooth_len) {
  if (trial.length() == 0) throw EmptyInput("artifact signal of an empty trial");
  ArtifactSignal sig;
  sig.samples = moving_average(mean_energy(trial), smooth_len);
  sig.sample_rate = trial.sample_rate;
  sig.source_start = 0;
  sig.source_end = trial.length();
  return sig;
}

inline ArtifactSignal artifact_signal(const EegTrial& trial) {
  return artifact_signal(trial, default_smooth_len(trial.sample_rate));
}

}  // namespace warpbci
