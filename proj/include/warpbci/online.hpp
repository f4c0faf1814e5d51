#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "warpbci/classify.hpp"
#include "warpbci/detect.hpp"
#include "warpbci/error.hpp"
#include "warpbci/signal.hpp"
#include "warpbci/template_bank.hpp"
#include "warpbci/warp.hpp"

namespace warpbci {

enum class EngineMode { BlinkOnly, BlinkAndJaw };

struct StreamConfig {
  double sample_rate{512.0};
  std::size_t smoothing{50};
  double calibration_s{20.0};
  double blink_window_ms{1000.0};
  double chunk_ms{500.0};
  double sigma_mult{2.0};
  EngineMode mode{EngineMode::BlinkOnly};

  std::size_t calibration_samples() const {
    return static_cast<std::size_t>(std::lround(calibration_s * sample_rate));
  }
  std::size_t window_samples() const {
    return static_cast<std::size_t>(std::lround(blink_window_ms * sample_rate / 1000.0));
  }
  std::size_t chunk_samples() const {
    return static_cast<std::size_t>(std::lround(chunk_ms * sample_rate / 1000.0));
  }
};

inline void validate(const StreamConfig& c) {
  if (!(c.sample_rate > 0.0 && c.calibration_s > 0.0 && c.blink_window_ms > 0.0 &&
        c.chunk_ms > 0.0 && c.sigma_mult > 0.0) ||
      c.smoothing == 0) {
    throw ArgError("stream configuration values must be positive");
  }
  if (c.chunk_samples() < 1) throw ArgError("chunk must span at least one sample");
  if (c.calibration_samples() < 2) throw ArgError("calibration must span at least two samples");
  if (c.window_samples() < 1) throw ArgError("blink window must span at least one sample");
}

struct CalibrationState {
  double mu{0.0};
  double sigma{0.0};
  double sigma_mult{2.0};
  std::size_t samples_seen{0};

  double threshold() const { return mu + sigma_mult * sigma; }
};

// Personalized threshold from already smoothed calibration samples.
inline CalibrationState calibrate_offline(std::span<const double> smoothed, double sigma_mult = 2.0) {
  if (smoothed.size() < 2) throw ArgError("calibration needs at least two samples");
  const Moments m = moments(smoothed);
  return {m.mean, m.stdev, sigma_mult, smoothed.size()};
}

enum class EventKind { Blink, JawClench, Unknown };

inline constexpr std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Blink: return "Blink";
    case EventKind::JawClench: return "JawClench";
    case EventKind::Unknown: return "Unknown";
  }
  return "?";
}

inline EventKind parse_event_kind(std::string_view s) {
  for (auto k : {EventKind::Blink, EventKind::JawClench, EventKind::Unknown}) {
    if (s == to_string(k)) return k;
  }
  throw ArgError("unknown event kind '" + std::string(s) + "'");
}

inline EventKind event_kind_for(ArtifactClass c) {
  switch (c) {
    case ArtifactClass::EyeBlink: return EventKind::Blink;
    case ArtifactClass::JawClench:
    case ArtifactClass::JawMovement: return EventKind::JawClench;
    default: return EventKind::Unknown;
  }
}

struct ArtifactEvent {
  EventKind kind{EventKind::Blink};
  std::size_t count{1};
  double t_ms{0.0};
  std::optional<double> confidence;  // nearest-template margin
  bool truncated{false};             // final chunk was zero padded

  friend bool operator==(const ArtifactEvent&, const ArtifactEvent&) = default;
};

inline nlohmann::ordered_json event_to_json(const ArtifactEvent& e) {
  nlohmann::ordered_json j;
  j["t_ms"] = e.t_ms;
  j["kind"] = std::string(to_string(e.kind));
  j["count"] = e.count;
  if (e.confidence) j["confidence"] = *e.confidence;
  if (e.truncated) j["truncated"] = true;
  return j;
}

// Accepts {"kind": "...", "count": n}; t_ms and confidence are optional.
inline ArtifactEvent event_from_json(const nlohmann::json& j) {
  ArtifactEvent e;
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  const auto count = j.value("count", 1);
  if (count < 1) throw ArgError("event count must be at least 1");
  e.count = static_cast<std::size_t>(count);
  e.t_ms = j.value("t_ms", 0.0);
  if (j.contains("confidence") && j["confidence"].is_number()) e.confidence = j["confidence"].get<double>();
  return e;
}

struct ChunkVerdict {
  ArtifactClass label{ArtifactClass::EyeBlink};
  double distance{0.0};
  double margin{0.0};  // runner-up distance minus best; 0 with a single template
};

// Normalized-DTW nearest template.
inline ChunkVerdict classify_chunk(const Series& chunk, const TemplateBank& bank) {
  if (bank.empty()) throw EmptyBank("template bank is empty");
  ReferenceSet refs;
  for (const Template& t : bank.templates) refs.push_back({t.series, t.label, {}, {}});
  const Prediction p = knn_classify(chunk, refs, 1, WarpOptions{WarpVariant::NormalizedDtw});
  ChunkVerdict v{p.label, p.neighbors.front().distance, 0.0};
  for (const Neighbor& n : p.neighbors) {
    if (n.label != p.label) {
      v.margin = n.distance - v.distance;
      break;
    }
  }
  return v;
}

// Streaming detector. Time is the sample index (k samples = k * 1000 / rate
// ms), so identical input produces identical events.
class StreamEngine {
 public:
  // bank holds raw single-channel gesture waveforms; required for
  // BlinkAndJaw and ignored otherwise.
  StreamEngine(const StreamConfig& config, std::size_t channels, const TemplateBank& bank = {})
      : config_(config), channels_(channels) {
    validate(config_);
    if (channels_ == 0) throw ArgError("stream needs at least one channel");
    raw_feature_ = config_.mode == EngineMode::BlinkOnly && channels_ == 1;
    if (config_.mode == EngineMode::BlinkAndJaw) {
      if (bank.empty()) throw EmptyBank("jaw-and-blink mode needs templates");
      bank_ = feature_bank(bank);
    }
  }

  const StreamConfig& config() const { return config_; }
  const std::optional<CalibrationState>& calibration() const { return calibration_; }
  bool calibrated() const { return calibration_.has_value(); }
  std::size_t samples_seen() const { return index_; }
  double last_smoothed() const { return prev_; }
  // Feature-space templates the chunks are compared against.
  const TemplateBank& feature_templates() const { return bank_; }

  double time_ms(std::size_t sample) const {
    return static_cast<double>(sample) * 1000.0 / config_.sample_rate;
  }

  std::vector<ArtifactEvent> feed(std::span<const double> frame) {
    if (frame.size() != channels_) {
      throw DimMismatch("frame has " + std::to_string(frame.size()) + " channels, expected " +
                        std::to_string(channels_));
    }
    const std::size_t k = index_++;
    const double smoothed = smooth(frame_feature(frame));
    std::vector<ArtifactEvent> out;

    if (!calibration_) {
      calib_buffer_.push_back(smoothed);
      if (calib_buffer_.size() == config_.calibration_samples()) {
        calibration_ = calibrate_offline(calib_buffer_, config_.sigma_mult);
        calib_buffer_.clear();
        calib_buffer_.shrink_to_fit();
      }
      prev_ = smoothed;
      return out;
    }

    expire(k, out);
    const double pt = calibration_->threshold();
    const bool crossing = prev_ <= pt && smoothed > pt;
    prev_ = smoothed;

    if (config_.mode == EngineMode::BlinkOnly) {
      if (crossing) {
        Pending& p = pending_[index_of(ArtifactClass::EyeBlink)];
        ++p.count;
        p.last_crossing = k;
      }
      return out;
    }

    if (capture_) {
      capture_->samples.push_back(smoothed);
      if (capture_->samples.size() == config_.chunk_samples()) close_capture(false);
    } else if (crossing) {
      capture_ = Capture{k, {smoothed}};
      if (config_.chunk_samples() == 1) close_capture(false);
    }
    return out;
  }

  // End of stream: pads an in-flight chunk with zeros, then releases every
  // pending count at its natural expiry time.
  std::vector<ArtifactEvent> finish() {
    if (capture_) {
      capture_->samples.resize(config_.chunk_samples(), 0.0);
      close_capture(true);
    }
    std::vector<ArtifactEvent> out;
    for (;;) {
      std::size_t best = kArtifactClassCount;
      for (std::size_t c = 0; c < kArtifactClassCount; ++c) {
        if (pending_[c].count && (best == kArtifactClassCount ||
                                  pending_[c].last_crossing < pending_[best].last_crossing)) {
          best = c;
        }
      }
      if (best == kArtifactClassCount) break;
      out.push_back(release(best, pending_[best].last_crossing + config_.window_samples()));
    }
    return out;
  }

 private:
  struct Pending {
    std::size_t count{0};
    std::size_t last_crossing{0};
    double confidence{0.0};
    bool truncated{false};
  };
  struct Capture {
    std::size_t start{0};
    std::vector<double> samples;
  };

  double frame_feature(std::span<const double> frame) const {
    if (raw_feature_) return frame[0];
    double e = 0.0;
    for (double v : frame) e += v * v;
    return e / static_cast<double>(frame.size());
  }

  // Same arithmetic as moving_average(): an in-order sum of the window.
  double smooth(double x) {
    window_.push_back(x);
    if (window_.size() > config_.smoothing) window_.pop_front();
    double sum = 0.0;
    for (double v : window_) sum += v;
    return sum / static_cast<double>(window_.size());
  }

  TemplateBank feature_bank(const TemplateBank& raw) const {
    TemplateBank out;
    const std::size_t chunk = config_.chunk_samples();
    for (const Template& t : raw.templates) {
      std::vector<double> energy(t.series.length() + chunk, 0.0);
      for (std::size_t i = 0; i < t.series.length(); ++i) {
        double e = 0.0;
        for (double v : t.series.frame(i)) e += v * v;
        energy[i] = e / static_cast<double>(t.series.dim());
      }
      const std::vector<double> smoothed = moving_average(energy, config_.smoothing);
      // Live chunks start at a threshold crossing, part way up the rise, so
      // the template starts where it first reaches a fifth of its peak.
      const double peak = *std::max_element(smoothed.begin(), smoothed.end());
      std::size_t onset = 0;
      while (onset < smoothed.size() && !(smoothed[onset] > 0.2 * peak)) ++onset;
      if (onset == smoothed.size()) onset = 0;
      std::vector<double> seg(chunk, 0.0);
      for (std::size_t i = 0; i < chunk && onset + i < smoothed.size(); ++i) seg[i] = smoothed[onset + i];
      out.templates.push_back({t.label, Series::scalar(std::move(seg))});
    }
    return out;
  }

  void close_capture(bool truncated) {
    const ChunkVerdict v = classify_chunk(Series::scalar(capture_->samples), bank_);
    Pending& p = pending_[index_of(v.label)];
    ++p.count;
    p.last_crossing = capture_->start;
    p.confidence = v.margin;
    p.truncated = p.truncated || truncated;
    capture_.reset();
  }

  ArtifactEvent release(std::size_t cls, std::size_t at_sample) {
    Pending& p = pending_[cls];
    ArtifactEvent e;
    e.kind = event_kind_for(kAllArtifactClasses[cls]);
    e.count = p.count;
    e.t_ms = time_ms(at_sample);
    if (config_.mode == EngineMode::BlinkAndJaw) e.confidence = p.confidence;
    e.truncated = p.truncated;
    p = Pending{};
    return e;
  }

  // A chunk still being captured may extend any pending count it started
  // inside the window of, so those wait for its verdict. Counts are stamped
  // with their natural expiry either way.
  void expire(std::size_t k, std::vector<ArtifactEvent>& out) {
    const std::size_t window = config_.window_samples();
    for (std::size_t c = 0; c < kArtifactClassCount; ++c) {
      const Pending& p = pending_[c];
      if (!p.count || k - p.last_crossing < window) continue;
      if (capture_ && capture_->start - p.last_crossing < window) continue;
      out.push_back(release(c, p.last_crossing + window));
    }
  }

  StreamConfig config_;
  std::size_t channels_;
  bool raw_feature_{false};
  TemplateBank bank_;
  std::deque<double> window_;
  std::vector<double> calib_buffer_;
  std::optional<CalibrationState> calibration_;
  double prev_{0.0};
  std::size_t index_{0};
  std::array<Pending, kArtifactClassCount> pending_{};
  std::optional<Capture> capture_;
};

// Runs a whole recording through a fresh engine.
inline std::vector<ArtifactEvent> replay(const EegTrial& trial, const StreamConfig& config,
                                         const TemplateBank& bank = {}) {
  StreamEngine engine(config, trial.channels(), bank);
  std::vector<ArtifactEvent> events;
  std::vector<double> frame(trial.channels());
  for (std::size_t i = 0; i < trial.length(); ++i) {
    for (std::size_t c = 0; c < trial.channels(); ++c) frame[c] = trial.data[c][i];
    auto ev = engine.feed(frame);
    events.insert(events.end(), ev.begin(), ev.end());
  }
  auto tail = engine.finish();
  events.insert(events.end(), tail.begin(), tail.end());
  return events;
}

}  // namespace warpbci
