#pragma once

// Scripted inputs shared by the unit tests and the acceptance runner.

#include <memory>
#include <string>
#include <vector>

#include "warpbci/warpbci.hpp"

namespace scripts {

using namespace warpbci;

// 1 kHz, no smoothing, 10-sample calibration: one sample is one
// millisecond and P_t can be computed by hand.
inline StreamConfig blink_config() {
  StreamConfig c;
  c.sample_rate = 1000.0;
  c.smoothing = 1;
  c.calibration_s = 0.01;
  c.blink_window_ms = 1000.0;
  c.sigma_mult = 2.0;
  c.mode = EngineMode::BlinkOnly;
  return c;
}

struct Pulse {
  std::size_t start;
  std::size_t end;  // exclusive
  double value;
};

struct BlinkScript {
  std::string name;
  std::vector<double> calibration;
  std::size_t body_length;  // samples after calibration
  std::vector<Pulse> pulses;  // sample indices count from the stream start
  std::vector<ArtifactEvent> expected;
};

inline std::vector<double> render(const BlinkScript& s) {
  std::vector<double> x = s.calibration;
  x.resize(s.calibration.size() + s.body_length, 0.0);
  for (const Pulse& p : s.pulses) {
    for (std::size_t i = p.start; i < p.end; ++i) x[i] = p.value;
  }
  return x;
}

inline std::vector<ArtifactEvent> run(const BlinkScript& s) {
  StreamEngine engine(blink_config(), 1);
  std::vector<ArtifactEvent> out;
  for (double v : render(s)) {
    const double frame[1] = {v};
    for (auto& e : engine.feed(frame)) out.push_back(e);
  }
  for (auto& e : engine.finish()) out.push_back(e);
  return out;
}

inline ArtifactEvent blink(std::size_t count, double t_ms) {
  ArtifactEvent e;
  e.kind = EventKind::Blink;
  e.count = count;
  e.t_ms = t_ms;
  return e;
}

// Calibration {0,1,...}: mean 0.5, sd 0.5, P_t = 1.5. A Blink(n) is released
// 1000 samples after the last crossing.
inline std::vector<BlinkScript> blink_scripts() {
  const std::vector<double> alt{0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  return {
      {"single crossing", alt, 2000, {{100, 150, 5}}, {blink(1, 1100)}},
      {"two crossings 600 ms apart", alt, 2500, {{100, 150, 5}, {700, 750, 5}}, {blink(2, 1700)}},
      {"three crossings 600 ms apart", alt, 3000, {{100, 150, 5}, {700, 750, 5}, {1300, 1350, 5}},
       {blink(3, 2300)}},
      {"two crossings 1200 ms apart", alt, 3000, {{100, 150, 5}, {1300, 1350, 5}},
       {blink(1, 1100), blink(1, 2300)}},
      {"gap of exactly one window", alt, 2500, {{100, 150, 5}, {1100, 1150, 5}},
       {blink(1, 1100), blink(1, 2100)}},
      {"gap one sample short of the window", alt, 2500, {{100, 150, 5}, {1099, 1150, 5}},
       {blink(2, 2099)}},
      {"long plateau crosses once", alt, 2000, {{100, 400, 5}}, {blink(1, 1100)}},
      {"dip staying above threshold", alt, 2000, {{100, 120, 5}, {120, 130, 1.6}, {130, 150, 5}},
       {blink(1, 1100)}},
      {"dip touching threshold re-crosses", alt, 2000, {{100, 120, 5}, {120, 130, 1.5}, {130, 150, 5}},
       {blink(2, 1130)}},
      {"crossing on the first calibrated sample", alt, 1500, {{10, 40, 5}}, {blink(1, 1010)}},
      // Calibration {0 x9, 3}: mean 0.3, sd 0.9, P_t = 2.1. Sample 10 continues
      // the high level, so the first crossing is at 12.
      {"calibration ending above threshold", {0, 0, 0, 0, 0, 0, 0, 0, 0, 3}, 1500,
       {{10, 11, 3}, {12, 20, 3}}, {blink(1, 1012)}},
      {"stream ends inside the window", alt, 490, {{100, 150, 5}}, {blink(1, 1100)}},
      {"quiet stream", alt, 3000, {}, {}},
  };
}

// One line per speller output, as JSON.
struct SpellerLog {
  SpellerState state;
  std::vector<std::string> lines;

  void take(Transition t) {
    state = std::move(t.state);
    for (const auto& o : t.outputs) lines.push_back(output_to_json(o).dump());
  }
  void wait(std::int64_t ms) { take(tick(std::move(state), ms)); }
  void event(EventKind kind, std::size_t count) {
    ArtifactEvent e;
    e.kind = kind;
    e.count = count;
    take(on_event(std::move(state), e));
  }
};

// T9, 3 s dwell: keys 4, 6, 6, 3 (indices 2, 4, 4, 1), then the second
// suggestion, which is "good" for 4663. Ends with the word committed and the
// highlight back on the first key.
inline void spell_good(SpellerLog& log) {
  for (std::int64_t dwells : {2, 4, 4, 1}) {
    log.wait(dwells * 3000);
    log.event(EventKind::Blink, 2);
  }
  // Eight keypad keys, then suggestions 0 and 1.
  log.wait(9 * 3000);
  log.event(EventKind::Blink, 2);
}

// Commits "good" and speaks it by selecting Phrase (8 keys, no suggestions,
// backspace, then phrase) or with a double jaw clench.
inline std::vector<std::string> speller_golden(std::shared_ptr<const Lexicon> lex, bool by_jaw) {
  SpellerLog log{make_speller(LayoutKind::T9, std::move(lex), 3000), {}};
  spell_good(log);
  log.event(EventKind::Blink, 1);  // single blinks select nothing
  if (by_jaw) {
    log.wait(1000);
    log.event(EventKind::JawClench, 2);
  } else {
    log.wait(9 * 3000);
    log.event(EventKind::Blink, 2);
  }
  return log.lines;
}

// Client messages for the gateway transcript. The last one is rejected
// (version 2), which marks the end of the replies.
inline std::vector<std::string> gateway_script() {
  auto blink2 = R"({"v":1,"type":"InjectEvent","event":{"kind":"Blink","count":2}})";
  auto tick = [](int ms) { return R"({"v":1,"type":"Tick","ms":)" + std::to_string(ms) + "}"; };
  return {
      tick(6000), blink2,  // key 4
      tick(12000), blink2, // key 6
      tick(12000), blink2, // key 6
      tick(3000), blink2,  // key 3
      tick(27000), blink2, // suggestion 1: good
      R"({"v":1,"type":"InjectEvent","event":{"kind":"JawClench","count":2}})",
      R"({"v":1,"type":"SetLayout","layout":"ABC"})",
      tick(3000),
      R"({"v":1,"type":"Reset"})",
      R"({"v":1,"type":"StartReplay","fixture":"demo"})",
      tick(30000),
      R"({"v":1,"type":"StartReplay","fixture":"../etc"})",
      R"({"v":2,"type":"Reset"})",
  };
}

}  // namespace scripts
