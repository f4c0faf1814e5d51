#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "warpbci/error.hpp"
#include "warpbci/lexicon.hpp"
#include "warpbci/online.hpp"

namespace warpbci {

enum class LayoutKind { T9, Abc };
enum class Region { Keypad, Suggestions, Backspace, Phrase };

inline constexpr std::string_view to_string(LayoutKind k) { return k == LayoutKind::T9 ? "T9" : "ABC"; }

inline LayoutKind parse_layout_kind(std::string_view s) {
  if (s == "T9" || s == "t9") return LayoutKind::T9;
  if (s == "ABC" || s == "abc") return LayoutKind::Abc;
  throw ArgError("unknown layout '" + std::string(s) + "' (T9 or ABC)");
}

inline constexpr std::string_view to_string(Region r) {
  switch (r) {
    case Region::Keypad: return "Keypad";
    case Region::Suggestions: return "Suggestions";
    case Region::Backspace: return "Backspace";
    case Region::Phrase: return "Phrase";
  }
  return "?";
}

inline Region parse_region(std::string_view s) {
  for (auto r : {Region::Keypad, Region::Suggestions, Region::Backspace, Region::Phrase}) {
    if (s == to_string(r)) return r;
  }
  throw ArgError("unknown region '" + std::string(s) + "'");
}

struct Key {
  std::string label;  // what the UI shows, e.g. "4 ghi"
  std::string value;  // what selection appends; empty for the control key
};

// Keypad keys in highlight order followed by the single Backspace control.
// T9: digits 2-9. ABC: a-z.
struct Layout {
  LayoutKind kind{LayoutKind::T9};
  std::vector<Key> keys;

  static Layout t9() {
    Layout l{LayoutKind::T9, {}};
    for (char d = '2'; d <= '9'; ++d) {
      l.keys.push_back({std::string(1, d) + " " + std::string(T9Map::letters(d)), std::string(1, d)});
    }
    l.keys.push_back({"Backspace", ""});
    return l;
  }
  static Layout abc() {
    Layout l{LayoutKind::Abc, {}};
    for (char c = 'a'; c <= 'z'; ++c) l.keys.push_back({std::string(1, c), std::string(1, c)});
    l.keys.push_back({"Backspace", ""});
    return l;
  }
  static Layout of(LayoutKind k) { return k == LayoutKind::T9 ? t9() : abc(); }

  std::size_t keypad_size() const { return keys.size() - 1; }
};

struct SpellerState {
  Layout layout{Layout::t9()};
  Region region{Region::Keypad};
  std::size_t highlight{0};
  std::string current_word;
  std::vector<std::string> suggestions;
  std::vector<std::string> phrase;
  std::int64_t dwell_ms{3000};
  std::int64_t dwell_elapsed_ms{0};
  std::int64_t clock_ms{0};
  std::shared_ptr<const Lexicon> lexicon;

  std::size_t region_size(Region r) const {
    switch (r) {
      case Region::Keypad: return layout.keypad_size();
      case Region::Suggestions: return suggestions.size();
      case Region::Backspace: return 1;
      case Region::Phrase: return 1;
    }
    return 0;
  }
};

inline SpellerState make_speller(LayoutKind kind, std::shared_ptr<const Lexicon> lexicon,
                                 std::int64_t dwell_ms = 3000) {
  if (dwell_ms <= 0) throw ArgError("dwell must be positive");
  SpellerState s;
  s.layout = Layout::of(kind);
  s.dwell_ms = dwell_ms;
  s.lexicon = std::move(lexicon);
  return s;
}

// Render model for the UI.
struct SpellerSnapshot {
  std::string layout;
  std::string region;
  std::size_t highlight_index{0};
  std::string highlighted;
  std::vector<std::string> keys;
  std::string current_word;
  std::vector<std::string> suggestions;
  std::vector<std::string> phrase;
  std::int64_t dwell_ms{0};
  std::int64_t dwell_remaining_ms{0};
  std::int64_t clock_ms{0};

  friend bool operator==(const SpellerSnapshot&, const SpellerSnapshot&) = default;
};

inline SpellerSnapshot snapshot(const SpellerState& s) {
  SpellerSnapshot v;
  v.layout = std::string(to_string(s.layout.kind));
  v.region = std::string(to_string(s.region));
  v.highlight_index = s.highlight;
  switch (s.region) {
    case Region::Keypad: v.highlighted = s.layout.keys[s.highlight].label; break;
    case Region::Suggestions: v.highlighted = s.suggestions[s.highlight]; break;
    case Region::Backspace: v.highlighted = s.layout.keys.back().label; break;
    case Region::Phrase: v.highlighted = "Phrase"; break;
  }
  for (std::size_t i = 0; i < s.layout.keypad_size(); ++i) v.keys.push_back(s.layout.keys[i].label);
  v.current_word = s.current_word;
  v.suggestions = s.suggestions;
  v.phrase = s.phrase;
  v.dwell_ms = s.dwell_ms;
  v.dwell_remaining_ms = s.dwell_ms - s.dwell_elapsed_ms;
  v.clock_ms = s.clock_ms;
  return v;
}

inline nlohmann::ordered_json to_json(const SpellerSnapshot& v) {
  nlohmann::ordered_json j;
  j["layout"] = v.layout;
  j["region"] = v.region;
  j["highlight_index"] = v.highlight_index;
  j["highlighted"] = v.highlighted;
  j["keys"] = v.keys;
  j["current_word"] = v.current_word;
  j["suggestions"] = v.suggestions;
  j["phrase"] = v.phrase;
  j["dwell_ms"] = v.dwell_ms;
  j["dwell_remaining_ms"] = v.dwell_remaining_ms;
  j["clock_ms"] = v.clock_ms;
  return j;
}

inline SpellerSnapshot snapshot_from_json(const nlohmann::json& j) {
  SpellerSnapshot v;
  v.layout = j.at("layout").get<std::string>();
  v.region = j.at("region").get<std::string>();
  v.highlight_index = j.at("highlight_index").get<std::size_t>();
  v.highlighted = j.at("highlighted").get<std::string>();
  v.keys = j.at("keys").get<std::vector<std::string>>();
  v.current_word = j.at("current_word").get<std::string>();
  v.suggestions = j.at("suggestions").get<std::vector<std::string>>();
  v.phrase = j.at("phrase").get<std::vector<std::string>>();
  v.dwell_ms = j.at("dwell_ms").get<std::int64_t>();
  v.dwell_remaining_ms = j.at("dwell_remaining_ms").get<std::int64_t>();
  v.clock_ms = j.at("clock_ms").get<std::int64_t>();
  return v;
}

struct SpeakPhrase {
  std::vector<std::string> words;
};
struct StateChanged {
  SpellerSnapshot snapshot;
};
struct WordCommitted {
  std::string word;
};
struct CharAppended {
  std::string value;
};
struct BackspaceApplied {
  std::string removed;
};

using SpellerOutput = std::variant<SpeakPhrase, StateChanged, WordCommitted, CharAppended, BackspaceApplied>;

inline nlohmann::ordered_json output_to_json(const SpellerOutput& out) {
  return std::visit(
      [](const auto& o) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(o)>;
        nlohmann::ordered_json j;
        if constexpr (std::is_same_v<T, SpeakPhrase>) {
          j["output"] = "SpeakPhrase";
          j["words"] = o.words;
        } else if constexpr (std::is_same_v<T, StateChanged>) {
          j["output"] = "StateChanged";
          j["snapshot"] = to_json(o.snapshot);
        } else if constexpr (std::is_same_v<T, WordCommitted>) {
          j["output"] = "WordCommitted";
          j["word"] = o.word;
        } else if constexpr (std::is_same_v<T, CharAppended>) {
          j["output"] = "CharAppended";
          j["value"] = o.value;
        } else {
          j["output"] = "BackspaceApplied";
          j["removed"] = o.removed;
        }
        return j;
      },
      out);
}

struct Transition {
  SpellerState state;
  std::vector<SpellerOutput> outputs;
};

namespace detail {

// Empty words have no suggestions; otherwise the lexicon's top five.
inline void refresh_suggestions(SpellerState& s) {
  s.suggestions.clear();
  if (s.current_word.empty() || !s.lexicon) return;
  s.suggestions = s.layout.kind == LayoutKind::T9 ? s.lexicon->suggest_t9(s.current_word, 5)
                                                  : s.lexicon->suggest_prefix(s.current_word, 5);
}

inline Region next_region(const SpellerState& s, Region r) {
  switch (r) {
    case Region::Keypad: return s.suggestions.empty() ? Region::Backspace : Region::Suggestions;
    case Region::Suggestions: return Region::Backspace;
    case Region::Backspace: return Region::Phrase;
    case Region::Phrase: return Region::Keypad;
  }
  return Region::Keypad;
}

inline void advance_highlight(SpellerState& s) {
  if (++s.highlight < s.region_size(s.region)) return;
  s.region = next_region(s, s.region);
  s.highlight = 0;
}

inline void restart_cycle(SpellerState& s) {
  s.region = Region::Keypad;
  s.highlight = 0;
  s.dwell_elapsed_ms = 0;
}

}  // namespace detail

// Advances the dwell clock; each expiry moves the highlight one step.
inline Transition tick(SpellerState state, std::int64_t elapsed_ms) {
  if (elapsed_ms < 0) throw ArgError("elapsed time must be nonnegative");
  Transition t{std::move(state), {}};
  if (elapsed_ms == 0) return t;
  SpellerState& s = t.state;
  s.clock_ms += elapsed_ms;
  s.dwell_elapsed_ms += elapsed_ms;
  bool moved = false;
  while (s.dwell_elapsed_ms >= s.dwell_ms) {
    s.dwell_elapsed_ms -= s.dwell_ms;
    detail::advance_highlight(s);
    moved = true;
  }
  if (moved) t.outputs.emplace_back(StateChanged{snapshot(s)});
  return t;
}

// Blink(2) selects whatever is highlighted, then the cycle restarts at the
// first keypad key. JawClench(2) speaks the phrase from any region. Other
// events only republish the state.
inline Transition on_event(SpellerState state, const ArtifactEvent& ev) {
  Transition t{std::move(state), {}};
  SpellerState& s = t.state;
  auto speak = [&] {
    if (!s.phrase.empty()) t.outputs.emplace_back(SpeakPhrase{s.phrase});
    s.phrase.clear();
  };

  if (ev.kind == EventKind::Blink && ev.count == 2) {
    switch (s.region) {
      case Region::Keypad: {
        const std::string& v = s.layout.keys[s.highlight].value;
        s.current_word += v;
        detail::refresh_suggestions(s);
        t.outputs.emplace_back(CharAppended{v});
        break;
      }
      case Region::Suggestions: {
        std::string word = s.suggestions[s.highlight];
        s.phrase.push_back(word);
        s.current_word.clear();
        s.suggestions.clear();
        t.outputs.emplace_back(WordCommitted{std::move(word)});
        break;
      }
      case Region::Backspace:
        if (!s.current_word.empty()) {
          std::string removed(1, s.current_word.back());
          s.current_word.pop_back();
          detail::refresh_suggestions(s);
          t.outputs.emplace_back(BackspaceApplied{std::move(removed)});
        }
        break;
      case Region::Phrase:
        speak();
        break;
    }
    detail::restart_cycle(s);
  } else if (ev.kind == EventKind::JawClench && ev.count == 2) {
    speak();
  }
  t.outputs.emplace_back(StateChanged{snapshot(s)});
  return t;
}

}  // namespace warpbci
