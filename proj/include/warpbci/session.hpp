#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "warpbci/error.hpp"
#include "warpbci/lexicon.hpp"
#include "warpbci/online.hpp"
#include "warpbci/speller.hpp"
#include "warpbci/synth.hpp"
#include "warpbci/trial_io.hpp"

namespace warpbci {

inline constexpr int kProtocolVersion = 1;

struct SessionConfig {
  std::shared_ptr<const Lexicon> lexicon;
  std::string fixtures_dir;
  LayoutKind layout{LayoutKind::T9};
  std::int64_t dwell_ms{3000};
  // Ticks arrive as client "Tick" messages instead of from a wall clock.
  bool test_clock{false};
  // Engine settings for replays; the sample rate comes from the fixture.
  StreamConfig stream{};
};

// One client connection's state machine, independent of any transport.
// Every call returns the server messages to send, in order, already encoded.
class Session {
 public:
  explicit Session(SessionConfig config)
      : config_(std::move(config)), speller_(make_speller(config_.layout, config_.lexicon, config_.dwell_ms)) {}

  bool test_clock() const { return config_.test_clock; }
  bool replay_active() const { return replay_.has_value(); }
  const SpellerState& speller() const { return speller_; }

  std::vector<std::string> open() const { return {snapshot_message()}; }

  std::vector<std::string> handle(std::string_view text) {
    nlohmann::json msg;
    try {
      msg = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
      return {error_message("malformed JSON")};
    }
    try {
      if (!msg.is_object()) return {error_message("message must be a JSON object")};
      const int version = msg.value("v", kProtocolVersion);
      if (version != kProtocolVersion) {
        return {error_message("unsupported protocol version " + std::to_string(version))};
      }
      const std::string type = msg.value("type", std::string{});
      if (type == "InjectEvent") return apply_event(event_from_json(msg.at("event")));
      if (type == "SetLayout") {
        config_.layout = parse_layout_kind(msg.at("layout").get<std::string>());
        speller_ = make_speller(config_.layout, config_.lexicon, config_.dwell_ms);
        return {snapshot_message()};
      }
      if (type == "Reset") {
        replay_.reset();
        speller_ = make_speller(config_.layout, config_.lexicon, config_.dwell_ms);
        return {snapshot_message()};
      }
      if (type == "StartReplay") return start_replay(msg.at("fixture").get<std::string>());
      if (type == "Tick") {
        if (!config_.test_clock) return {error_message("Tick is only accepted in test-clock mode")};
        const auto ms = msg.at("ms").get<std::int64_t>();
        if (ms < 0) return {error_message("Tick ms must be nonnegative")};
        return advance(ms);
      }
      return {error_message("unknown message type '" + type + "'")};
    } catch (const nlohmann::json::exception& e) {
      return {error_message(std::string("bad message: ") + e.what())};
    } catch (const Error& e) {
      return {error_message(e.what())};
    }
  }

  // Moves session time forward in 1 ms steps: the speller dwell clock
  // advances, then replay samples stamped at or before the new time are fed.
  // Ends with a Snapshot of the resulting state.
  std::vector<std::string> advance(std::int64_t ms) {
    std::vector<std::string> out;
    for (std::int64_t step = 0; step < ms; ++step) {
      emit(tick(std::move(speller_), 1), out);
      if (replay_) step_replay(out);
    }
    std::string last = snapshot_message();
    if (out.empty() || out.back() != last) out.push_back(std::move(last));
    return out;
  }

  static std::string error_message(const std::string& text) {
    return envelope("Error", {{"message", text}});
  }

 private:
  struct Replay {
    std::string fixture;
    EegTrial trial;
    StreamEngine engine;
    std::size_t next{0};
    std::int64_t elapsed_ms{0};
  };

  static std::string envelope(std::string_view type, nlohmann::ordered_json body = nlohmann::ordered_json::object()) {
    nlohmann::ordered_json j;
    j["v"] = kProtocolVersion;
    j["type"] = std::string(type);
    for (auto& [k, v] : body.items()) j[k] = v;
    return j.dump();
  }

  std::string snapshot_message() const {
    return envelope("Snapshot", {{"snapshot", to_json(snapshot(speller_))}});
  }

  void emit(Transition t, std::vector<std::string>& out) {
    speller_ = std::move(t.state);
    for (const auto& o : t.outputs) {
      if (const auto* sc = std::get_if<StateChanged>(&o)) {
        out.push_back(envelope("Snapshot", {{"snapshot", to_json(sc->snapshot)}}));
      } else if (const auto* sp = std::get_if<SpeakPhrase>(&o)) {
        out.push_back(envelope("Spoken", {{"words", sp->words}}));
      }
    }
  }

  std::vector<std::string> apply_event(const ArtifactEvent& ev) {
    std::vector<std::string> out;
    emit(on_event(std::move(speller_), ev), out);
    return out;
  }

  std::vector<std::string> start_replay(const std::string& fixture) {
    if (fixture.empty() || fixture.find_first_not_of(
                               "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
                               std::string::npos) {
      return {error_message("invalid fixture id '" + fixture + "'")};
    }
    namespace fs = std::filesystem;
    fs::path path = fs::path(config_.fixtures_dir) / (fixture + ".csv");
    if (!fs::exists(path)) path = fs::path(config_.fixtures_dir) / (fixture + ".jsonl");
    if (!fs::exists(path)) return {error_message("unknown fixture '" + fixture + "'")};
    EegTrial trial = load_trials(path.string()).front();

    StreamConfig cfg = config_.stream;
    cfg.sample_rate = trial.sample_rate;
    cfg.mode = trial.channels() == 1 ? EngineMode::BlinkOnly : EngineMode::BlinkAndJaw;
    TemplateBank bank;
    if (cfg.mode == EngineMode::BlinkAndJaw) {
      GenSpec spec;
      spec.sample_rate = trial.sample_rate;
      bank = gen_templates(spec);
    }
    StreamEngine engine(cfg, trial.channels(), bank);
    replay_.emplace(Replay{fixture, std::move(trial), std::move(engine), 0, 0});
    return {};
  }

  void step_replay(std::vector<std::string>& out) {
    Replay& r = *replay_;
    ++r.elapsed_ms;
    // Sample k is stamped k * 1000 / rate ms after the replay started.
    const auto due = static_cast<std::size_t>(
                         std::floor(static_cast<double>(r.elapsed_ms) * r.trial.sample_rate / 1000.0)) +
                     1;
    std::vector<double> frame(r.trial.channels());
    while (r.next < r.trial.length() && r.next < due) {
      for (std::size_t c = 0; c < frame.size(); ++c) frame[c] = r.trial.data[c][r.next];
      ++r.next;
      for (const ArtifactEvent& ev : r.engine.feed(frame)) detected(ev, out);
    }
    if (r.next == r.trial.length()) {
      for (const ArtifactEvent& ev : r.engine.finish()) detected(ev, out);
      out.push_back(envelope("ReplayEnded", {{"fixture", r.fixture}}));
      replay_.reset();
    }
  }

  void detected(const ArtifactEvent& ev, std::vector<std::string>& out) {
    out.push_back(envelope("Detected", {{"event", event_to_json(ev)}}));
    emit(on_event(std::move(speller_), ev), out);
  }

  SessionConfig config_;
  SpellerState speller_;
  std::optional<Replay> replay_;
};

}  // namespace warpbci
