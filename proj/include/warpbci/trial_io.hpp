#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "warpbci/error.hpp"
#include "warpbci/signal.hpp"

namespace warpbci {

enum class TrialFormat { Csv, Jsonl };

inline TrialFormat parse_trial_format(std::string_view s) {
  if (s == "csv") return TrialFormat::Csv;
  if (s == "jsonl") return TrialFormat::Jsonl;
  throw ArgError("unknown trial format '" + std::string(s) + "' (expected csv or jsonl)");
}

inline TrialFormat trial_format_for_path(std::string_view path) {
  return path.ends_with(".jsonl") || path.ends_with(".json") ? TrialFormat::Jsonl
                                                             : TrialFormat::Csv;
}

namespace detail {

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf, end);
}

inline bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline bool parse_index(std::string_view s, std::size_t& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, begin);
    parts.push_back(s.substr(begin, pos == std::string_view::npos ? pos : pos - begin));
    if (pos == std::string_view::npos) break;
    begin = pos + 1;
  }
  return parts;
}

inline void check_id(const std::string& id, const char* what) {
  for (char ch : id) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      throw ArgError(std::string(what) + " id must not contain whitespace: '" + id + "'");
    }
  }
}

// Wraps validate() so the error names the header line of the offending trial.
inline void finish_trial(const EegTrial& t, std::size_t header_line) {
  try {
    validate(t);
  } catch (const FormatError& e) {
    throw FormatError(header_line, e.reason());
  }
}

inline std::vector<EegTrial> read_csv(std::istream& in) {
  std::vector<EegTrial> trials;
  std::size_t header_line = 0;
  std::size_t declared_channels = 0;
  bool in_annotations = false;
  std::string line;
  std::size_t lineno = 0;

  while (std::getline(in, line)) {
    ++lineno;
    std::string_view text = line;
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (text.empty()) continue;

    if (text.front() == '#') {
      if (!trials.empty()) finish_trial(trials.back(), header_line);
      EegTrial t;
      bool have_rate = false;
      bool have_channels = false;
      std::istringstream fields{std::string(text.substr(1))};
      std::string field;
      while (fields >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw FormatError(lineno, "header field without '='");
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "rate") {
          if (!parse_double(value, t.sample_rate)) throw FormatError(lineno, "bad rate");
          have_rate = true;
        } else if (key == "channels") {
          if (!parse_index(value, declared_channels) || declared_channels == 0) {
            throw FormatError(lineno, "bad channel count");
          }
          have_channels = true;
        } else if (key == "label") {
          if (value != "none") {
            auto c = try_parse_artifact_class(value);
            if (!c) throw FormatError(lineno, "unknown label '" + value + "'");
            t.label = *c;
          }
        } else if (key == "subject") {
          t.subject_id = value;
        } else if (key == "session") {
          t.session_id = value;
        } else {
          throw FormatError(lineno, "unknown header field '" + key + "'");
        }
      }
      if (!have_rate || !have_channels) {
        throw FormatError(lineno, "header needs rate= and channels=");
      }
      t.data.assign(declared_channels, {});
      trials.push_back(std::move(t));
      header_line = lineno;
      in_annotations = false;
      continue;
    }

    if (trials.empty()) throw FormatError(lineno, "data before header");
    EegTrial& t = trials.back();

    if (text.front() == '@') {
      const auto parts = split(text.substr(1), ',');
      Annotation a;
      if (parts.size() != 3 || !parse_index(parts[0], a.start) || !parse_index(parts[1], a.end)) {
        throw FormatError(lineno, "annotation must be '@ start,end,class'");
      }
      std::string_view cls = parts[2];
      while (!cls.empty() && cls.front() == ' ') cls.remove_prefix(1);
      auto c = try_parse_artifact_class(cls);
      if (!c) throw FormatError(lineno, "unknown annotation class '" + std::string(cls) + "'");
      a.label = *c;
      if (!(a.start < a.end && a.end <= t.length())) {
        throw FormatError(lineno, "annotation outside trial");
      }
      t.annotations.push_back(a);
      in_annotations = true;
      continue;
    }

    if (in_annotations) throw FormatError(lineno, "sample row after annotations");
    const auto cells = split(text, ',');
    if (cells.size() != declared_channels) {
      throw FormatError(lineno, "expected " + std::to_string(declared_channels) +
                                    " values, found " + std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v)) {
        throw FormatError(lineno, "not a number: '" + std::string(cells[c]) + "'");
      }
      t.data[c].push_back(v);
    }
  }
  if (trials.empty()) throw FormatError(lineno, "no trials in input");
  finish_trial(trials.back(), header_line);
  return trials;
}

inline void write_csv(std::ostream& out, const std::vector<EegTrial>& trials) {
  for (const EegTrial& t : trials) {
    validate(t);
    check_id(t.subject_id, "subject");
    check_id(t.session_id, "session");
    out << "# rate=" << format_double(t.sample_rate) << " channels=" << t.channels()
        << " label=" << (t.label ? std::string(to_string(*t.label)) : std::string("none"))
        << " subject=" << t.subject_id << " session=" << t.session_id << '\n';
    for (std::size_t i = 0; i < t.length(); ++i) {
      for (std::size_t c = 0; c < t.channels(); ++c) {
        if (c) out << ',';
        out << format_double(t.data[c][i]);
      }
      out << '\n';
    }
    for (const Annotation& a : t.annotations) {
      out << "@ " << a.start << ',' << a.end << ',' << to_string(a.label) << '\n';
    }
  }
}

inline nlohmann::ordered_json trial_to_json(const EegTrial& t) {
  nlohmann::ordered_json j;
  j["rate"] = t.sample_rate;
  j["channels"] = t.channels();
  j["label"] = t.label ? nlohmann::ordered_json(std::string(to_string(*t.label)))
                       : nlohmann::ordered_json(nullptr);
  j["subject"] = t.subject_id;
  j["session"] = t.session_id;
  j["data"] = t.data;
  auto ann = nlohmann::ordered_json::array();
  for (const Annotation& a : t.annotations) {
    ann.push_back({a.start, a.end, std::string(to_string(a.label))});
  }
  j["annotations"] = std::move(ann);
  return j;
}

inline EegTrial trial_from_json(const nlohmann::json& j, std::size_t lineno) {
  try {
    EegTrial t;
    t.sample_rate = j.at("rate").get<double>();
    const auto& label = j.at("label");
    if (!label.is_null()) {
      auto c = try_parse_artifact_class(label.get<std::string>());
      if (!c) throw FormatError(lineno, "unknown label");
      t.label = *c;
    }
    t.subject_id = j.value("subject", std::string{});
    t.session_id = j.value("session", std::string{});
    t.data = j.at("data").get<std::vector<std::vector<double>>>();
    if (j.contains("channels") && j["channels"].get<std::size_t>() != t.data.size()) {
      throw FormatError(lineno, "channel count does not match data");
    }
    for (const auto& a : j.value("annotations", nlohmann::json::array())) {
      if (!a.is_array() || a.size() != 3) throw FormatError(lineno, "bad annotation");
      auto c = try_parse_artifact_class(a[2].get<std::string>());
      if (!c) throw FormatError(lineno, "unknown annotation class");
      t.annotations.push_back({a[0].get<std::size_t>(), a[1].get<std::size_t>(), *c});
    }
    finish_trial(t, lineno);
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(lineno, e.what());
  }
}

inline std::vector<EegTrial> read_jsonl(std::istream& in) {
  std::vector<EegTrial> trials;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(lineno, e.what());
    }
    trials.push_back(trial_from_json(j, lineno));
  }
  if (trials.empty()) throw FormatError(lineno, "no trials in input");
  return trials;
}

inline void write_jsonl(std::ostream& out, const std::vector<EegTrial>& trials) {
  for (const EegTrial& t : trials) {
    validate(t);
    out << trial_to_json(t).dump() << '\n';
  }
}

}  // namespace detail

inline std::vector<EegTrial> read_trials(std::istream& in, TrialFormat format) {
  return format == TrialFormat::Csv ? detail::read_csv(in) : detail::read_jsonl(in);
}

inline void write_trials(std::ostream& out, const std::vector<EegTrial>& trials,
                         TrialFormat format) {
  if (format == TrialFormat::Csv) {
    detail::write_csv(out, trials);
  } else {
    detail::write_jsonl(out, trials);
  }
}

inline std::vector<EegTrial> load_trials(const std::string& path, TrialFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_trials(in, format);
}

inline std::vector<EegTrial> load_trials(const std::string& path) {
  return load_trials(path, trial_format_for_path(path));
}

inline void save_trials(const std::string& path, const std::vector<EegTrial>& trials,
                        TrialFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_trials(out, trials, format);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace warpbci
