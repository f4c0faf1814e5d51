#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "warpbci/artifact_class.hpp"
#include "warpbci/error.hpp"
#include "warpbci/signal.hpp"
#include "warpbci/template_bank.hpp"

namespace warpbci {

// Duration (ms) and peak amplitude (uV) ranges of one gesture family.
struct ShapeRange {
  double min_ms{0.0};
  double max_ms{0.0};
  double min_amp{0.0};
  double max_amp{0.0};
};

struct GenSpec {
  double sample_rate{250.0};
  std::size_t channels{8};
  double noise_sigma{2.0};
  double epoch_s{3.0};
  std::size_t subjects{1};
  std::size_t sessions{1};

  // Asymmetric biphasic pulse.
  ShapeRange eye_blink{200.0, 400.0, 80.0, 120.0};
  // Sustained 25-40 Hz burst.
  ShapeRange jaw_movement{1000.0, 1600.0, 60.0, 90.0};
  // Two adjacent slow lobes of opposite sign, the second wider and weaker.
  ShapeRange head_nod{1200.0, 1800.0, 60.0, 90.0};
  // Three adjacent alternating slow lobes of decaying height.
  ShapeRange head_turn{1500.0, 2100.0, 60.0, 90.0};
  // Sustained EMG burst used for the jaw-clench speller gesture; outlasts a
  // 500 ms classification chunk.
  ShapeRange jaw_clench{600.0, 800.0, 110.0, 150.0};

  // Per-subject multiplicative spread of durations and amplitudes.
  double subject_duration_jitter{0.1};
  double subject_amplitude_jitter{0.2};

  std::uint64_t seed{1};

  const ShapeRange& shape(ArtifactClass c) const {
    switch (c) {
      case ArtifactClass::JawMovement: return jaw_movement;
      case ArtifactClass::HeadNod: return head_nod;
      case ArtifactClass::HeadTurn: return head_turn;
      case ArtifactClass::EyeBlink: return eye_blink;
      case ArtifactClass::JawClench: return jaw_clench;
    }
    return eye_blink;
  }
};

inline void validate(const GenSpec& spec) {
  if (!(spec.sample_rate > 0.0)) throw ArgError("generator sample rate must be positive");
  if (spec.channels == 0) throw ArgError("generator needs at least one channel");
  if (!(spec.noise_sigma >= 0.0)) throw ArgError("noise sigma must be nonnegative");
  if (spec.subjects == 0 || spec.sessions == 0) throw ArgError("need at least one subject and session");
  for (ArtifactClass c : kAllArtifactClasses) {
    const ShapeRange& r = spec.shape(c);
    if (!(r.min_ms > 0.0 && r.min_ms <= r.max_ms && r.min_amp >= 0.0 && r.min_amp <= r.max_amp)) {
      throw ArgError("bad shape range for " + std::string(to_string(c)));
    }
  }
}

namespace synth {

inline double half_sine(double u) { return std::sin(std::numbers::pi * u); }

// Unit-amplitude waveform over normalized time u in [0, 1).
inline double shape_value(ArtifactClass c, double u, double t_s, double carrier_hz) {
  switch (c) {
    case ArtifactClass::EyeBlink:
      return u < 0.7 ? half_sine(u / 0.7) : -0.3 * half_sine((u - 0.7) / 0.3);
    case ArtifactClass::JawMovement:
    case ArtifactClass::JawClench: {
      const double edge = std::min({u / 0.1, (1.0 - u) / 0.1, 1.0});
      const double taper = 0.5 - 0.5 * std::cos(std::numbers::pi * edge);
      return taper * std::sin(2.0 * std::numbers::pi * carrier_hz * t_s);
    }
    case ArtifactClass::HeadNod:
      return u < 0.4 ? half_sine(u / 0.4) : -0.7 * half_sine((u - 0.4) / 0.6);
    case ArtifactClass::HeadTurn: {
      const double third = 1.0 / 3.0;
      const int k = std::min(2, static_cast<int>(u / third));
      const double sign[] = {1.0, -0.8, 0.6};
      return sign[k] * half_sine((u - k * third) / third);
    }
  }
  return 0.0;
}

// Fixed spatial weighting of a gesture over the channel montage.
inline double channel_gain(ArtifactClass c, std::size_t ch, std::size_t channels) {
  const double pos = channels > 1 ? static_cast<double>(ch) / static_cast<double>(channels - 1) : 0.0;
  switch (c) {
    case ArtifactClass::EyeBlink: return 1.0 - 0.7 * pos;
    case ArtifactClass::JawMovement:
    case ArtifactClass::JawClench: return 0.3 + 0.7 * pos;
    case ArtifactClass::HeadNod: return 0.8;
    case ArtifactClass::HeadTurn: return ch % 2 ? -0.8 : 0.8;
  }
  return 1.0;
}

struct Gesture {
  ArtifactClass label{ArtifactClass::EyeBlink};
  std::size_t samples{1};
  double amplitude{0.0};
  double carrier_hz{30.0};
};

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline Gesture draw_gesture(const GenSpec& spec, ArtifactClass c, std::mt19937_64& rng,
                            double duration_scale, double amplitude_scale) {
  const ShapeRange& r = spec.shape(c);
  Gesture g;
  g.label = c;
  const double ms = uniform(rng, r.min_ms, r.max_ms) * duration_scale;
  g.samples = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(ms * spec.sample_rate / 1000.0)));
  g.amplitude = uniform(rng, r.min_amp, r.max_amp) * amplitude_scale;
  g.carrier_hz = uniform(rng, 25.0, 40.0);
  return g;
}

inline void add_gesture(std::vector<std::vector<double>>& data, const Gesture& g, std::size_t onset,
                        double rate) {
  for (std::size_t i = 0; i < g.samples; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(g.samples);
    const double v = g.amplitude * shape_value(g.label, u, static_cast<double>(i) / rate, g.carrier_hz);
    for (std::size_t ch = 0; ch < data.size(); ++ch) {
      data[ch][onset + i] += v * channel_gain(g.label, ch, data.size());
    }
  }
}

inline std::vector<std::vector<double>> noise(const GenSpec& spec, std::size_t length,
                                              std::mt19937_64& rng) {
  std::vector<std::vector<double>> data(spec.channels, std::vector<double>(length, 0.0));
  if (spec.noise_sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, spec.noise_sigma);
    for (auto& ch : data) {
      for (double& v : ch) v = gauss(rng);
    }
  }
  return data;
}

struct SubjectProfile {
  double duration_scale{1.0};
  double amplitude_scale{1.0};
};

inline SubjectProfile subject_profile(const GenSpec& spec, std::size_t subject) {
  if (subject == 0) return {};
  std::mt19937_64 rng(spec.seed ^ (0x9e3779b97f4a7c15ULL * (subject + 1)));
  return {uniform(rng, 1.0 - spec.subject_duration_jitter, 1.0 + spec.subject_duration_jitter),
          uniform(rng, 1.0 - spec.subject_amplitude_jitter, 1.0 + spec.subject_amplitude_jitter)};
}

inline std::string subject_name(std::size_t s) { return "s" + std::to_string(s + 1); }
inline std::string session_name(std::size_t s) { return std::string(1, static_cast<char>('a' + s % 26)); }

}  // namespace synth

// Labelled 3 s epochs, per_class of each class for every subject and session,
// each carrying one gesture at a random offset.
inline std::vector<EegTrial> gen_trials(const GenSpec& spec, std::size_t per_class,
                                        std::span<const ArtifactClass> classes) {
  validate(spec);
  if (per_class == 0 || classes.empty()) throw ArgError("need at least one trial per class");
  const auto epoch_len = static_cast<std::size_t>(std::lround(spec.epoch_s * spec.sample_rate));
  const auto margin = static_cast<std::size_t>(std::lround(0.2 * spec.sample_rate));
  std::mt19937_64 rng(spec.seed);
  std::vector<EegTrial> trials;
  for (std::size_t subject = 0; subject < spec.subjects; ++subject) {
    const synth::SubjectProfile profile = synth::subject_profile(spec, subject);
    for (std::size_t session = 0; session < spec.sessions; ++session) {
      for (ArtifactClass c : classes) {
        for (std::size_t rep = 0; rep < per_class; ++rep) {
          synth::Gesture g = synth::draw_gesture(spec, c, rng, profile.duration_scale,
                                                 profile.amplitude_scale);
          g.samples = std::min(g.samples, epoch_len > 2 * margin ? epoch_len - 2 * margin : epoch_len);
          const std::size_t lo = std::min(margin, epoch_len - g.samples);
          const std::size_t hi = std::max(lo, epoch_len - g.samples - lo);
          const auto onset = lo + static_cast<std::size_t>(
                                      synth::uniform(rng, 0.0, 1.0) * static_cast<double>(hi - lo));
          EegTrial t;
          t.sample_rate = spec.sample_rate;
          t.data = synth::noise(spec, epoch_len, rng);
          synth::add_gesture(t.data, g, onset, spec.sample_rate);
          t.label = c;
          t.subject_id = synth::subject_name(subject);
          t.session_id = synth::session_name(session);
          t.annotations.push_back({onset, onset + g.samples, c});
          trials.push_back(std::move(t));
        }
      }
    }
  }
  return trials;
}

inline std::vector<EegTrial> gen_trials(const GenSpec& spec, std::size_t per_class) {
  return gen_trials(spec, per_class, kEpochClasses);
}

struct ScheduledEvent {
  double time_s{0.0};
  ArtifactClass label{ArtifactClass::EyeBlink};
};

// Continuous unlabelled recording with gestures at the requested onsets.
inline EegTrial gen_stream(const GenSpec& spec, double duration_s,
                           std::span<const ScheduledEvent> events) {
  validate(spec);
  const auto length = static_cast<std::size_t>(std::lround(duration_s * spec.sample_rate));
  if (length == 0) throw ArgError("stream duration must cover at least one sample");
  std::mt19937_64 rng(spec.seed);
  EegTrial t;
  t.sample_rate = spec.sample_rate;
  t.data = synth::noise(spec, length, rng);
  t.subject_id = synth::subject_name(0);
  t.session_id = synth::session_name(0);

  std::vector<std::pair<std::size_t, synth::Gesture>> placed;
  for (const ScheduledEvent& ev : events) {
    if (!(ev.time_s >= 0.0)) throw RangeError("event time must be nonnegative");
    const auto onset = static_cast<std::size_t>(std::lround(ev.time_s * spec.sample_rate));
    synth::Gesture g = synth::draw_gesture(spec, ev.label, rng, 1.0, 1.0);
    if (onset + g.samples > length) {
      throw RangeError("event at " + std::to_string(ev.time_s) + " s runs past the stream end");
    }
    placed.emplace_back(onset, g);
  }
  std::sort(placed.begin(), placed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < placed.size(); ++i) {
    if (placed[i].first < placed[i - 1].first + placed[i - 1].second.samples) {
      throw OverlapError("scheduled events overlap");
    }
  }
  for (const auto& [onset, g] : placed) {
    synth::add_gesture(t.data, g, onset, spec.sample_rate);
    t.annotations.push_back({onset, onset + g.samples, g.label});
  }
  return t;
}

// count events spread over equal slots of the stream, each starting 1 s into
// its slot plus a random delay, cycling through classes.
inline std::vector<ScheduledEvent> burst_schedule(double duration_s, std::size_t count,
                                                  std::span<const ArtifactClass> classes,
                                                  std::uint64_t seed) {
  if (count == 0 || classes.empty()) return {};
  const double slot = duration_s / static_cast<double>(count);
  if (slot < 4.0) throw ArgError("bursts need at least 4 s slots");
  std::mt19937_64 rng(seed);
  std::vector<ScheduledEvent> out;
  for (std::size_t k = 0; k < count; ++k) {
    const double jitter = synth::uniform(rng, 0.0, std::max(0.0, slot - 3.5));
    out.push_back({static_cast<double>(k) * slot + 1.0 + jitter * 0.5, classes[k % classes.size()]});
  }
  return out;
}

// count streams; stream i uses seed + i and its own burst schedule.
inline std::vector<EegTrial> gen_streams(const GenSpec& base, std::size_t count, double duration_s,
                                         std::size_t bursts) {
  std::vector<EegTrial> out;
  for (std::size_t i = 0; i < count; ++i) {
    GenSpec g = base;
    g.seed = base.seed + i;
    const auto events = burst_schedule(duration_s, bursts, kEpochClasses, g.seed * 7 + 1);
    out.push_back(gen_stream(g, duration_s, events));
  }
  return out;
}

// Noise-free canonical blink and jaw-clench waveforms (single channel, mid
// range duration and amplitude).
inline TemplateBank gen_templates(const GenSpec& spec) {
  validate(spec);
  TemplateBank bank;
  for (ArtifactClass c : {ArtifactClass::EyeBlink, ArtifactClass::JawClench}) {
    const ShapeRange& r = spec.shape(c);
    synth::Gesture g;
    g.label = c;
    g.samples = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::lround(0.5 * (r.min_ms + r.max_ms) * spec.sample_rate / 1000.0)));
    g.amplitude = 0.5 * (r.min_amp + r.max_amp);
    g.carrier_hz = 30.0;
    std::vector<std::vector<double>> one(1, std::vector<double>(g.samples, 0.0));
    synth::add_gesture(one, g, 0, spec.sample_rate);
    bank.templates.push_back({c, Series::scalar(std::move(one.front()))});
  }
  return bank;
}

}  // namespace warpbci
