#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "warpbci/error.hpp"

namespace warpbci {

// Closed set of artifact gestures. JawClench is the short clench used by the
// four-electrode speller; the epoch classifier treats it as its own label.
enum class ArtifactClass { JawMovement, HeadNod, HeadTurn, EyeBlink, JawClench };

inline constexpr std::size_t kArtifactClassCount = 5;

inline constexpr std::array<ArtifactClass, kArtifactClassCount> kAllArtifactClasses = {
    ArtifactClass::JawMovement, ArtifactClass::HeadNod, ArtifactClass::HeadTurn,
    ArtifactClass::EyeBlink, ArtifactClass::JawClench};

// The four classes of the 128-electrode epoch experiments.
inline constexpr std::array<ArtifactClass, 4> kEpochClasses = {
    ArtifactClass::JawMovement, ArtifactClass::HeadNod, ArtifactClass::HeadTurn,
    ArtifactClass::EyeBlink};

inline constexpr std::size_t index_of(ArtifactClass c) { return static_cast<std::size_t>(c); }

inline constexpr std::string_view to_string(ArtifactClass c) {
  switch (c) {
    case ArtifactClass::JawMovement: return "JawMovement";
    case ArtifactClass::HeadNod: return "HeadNod";
    case ArtifactClass::HeadTurn: return "HeadTurn";
    case ArtifactClass::EyeBlink: return "EyeBlink";
    case ArtifactClass::JawClench: return "JawClench";
  }
  return "?";
}

// Case-insensitive; underscores and hyphens are ignored ("eye_blink" works).
inline std::optional<ArtifactClass> try_parse_artifact_class(std::string_view text) {
  auto squash = [](std::string_view s) {
    std::string out;
    for (char ch : s) {
      if (ch == '_' || ch == '-') continue;
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    return out;
  };
  const std::string key = squash(text);
  for (ArtifactClass c : kAllArtifactClasses) {
    if (squash(to_string(c)) == key) return c;
  }
  return std::nullopt;
}

inline ArtifactClass parse_artifact_class(std::string_view text) {
  if (auto c = try_parse_artifact_class(text)) return *c;
  throw ArgError("unknown artifact class '" + std::string(text) + "'");
}

}  // namespace warpbci
