#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "warpbci/artifact_class.hpp"
#include "warpbci/detect.hpp"
#include "warpbci/error.hpp"
#include "warpbci/parallel.hpp"
#include "warpbci/signal.hpp"
#include "warpbci/warp.hpp"

namespace warpbci {

enum class FeatureMode { Energy1d, Multichannel };

struct FeatureParams {
  FeatureMode mode{FeatureMode::Energy1d};
  ThresholdSpec threshold{ThresholdSpec::kEpochedDefault};
  std::optional<std::size_t> smooth_len;
};

// The detected artifact window of an epoch as a series: the artifact-signal
// slice (energy1d) or the raw channel frames (multichannel). Falls back to
// the whole epoch when nothing crosses the threshold.
inline Series featurize(const EegTrial& trial, const FeatureParams& params = {}) {
  const ArtifactSignal sig =
      artifact_signal(trial, params.smooth_len.value_or(default_smooth_len(trial.sample_rate)));
  std::size_t first = 0;
  std::size_t last = sig.size() - 1;
  if (auto ev = detect_in_epoch(sig, params.threshold)) {
    first = ev->onset;
    last = ev->offset;
  }
  if (params.mode == FeatureMode::Energy1d) {
    return Series::scalar(std::vector<double>(sig.samples.begin() + static_cast<std::ptrdiff_t>(first),
                                              sig.samples.begin() + static_cast<std::ptrdiff_t>(last + 1)));
  }
  std::vector<double> values;
  values.reserve((last - first + 1) * trial.channels());
  for (std::size_t i = first; i <= last; ++i) {
    for (const auto& ch : trial.data) values.push_back(ch[i]);
  }
  return Series(trial.channels(), std::move(values));
}

struct Reference {
  Series feature;
  ArtifactClass label{ArtifactClass::EyeBlink};
  std::string subject_id;
  std::string session_id;
};

using ReferenceSet = std::vector<Reference>;

struct Neighbor {
  double distance{0.0};
  ArtifactClass label{ArtifactClass::EyeBlink};
  std::size_t index{0};  // position in the reference set
};

struct Prediction {
  ArtifactClass label{ArtifactClass::EyeBlink};
  std::vector<Neighbor> neighbors;  // every reference, nearest first
};

// Distances to every reference sorted by (distance, class). Index is only a
// final tie-break so the chosen label multiset ignores reference order.
inline std::vector<Neighbor> rank_neighbors(const Series& query, std::span<const Reference> refs,
                                            const WarpOptions& opts) {
  std::vector<Neighbor> out;
  out.reserve(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    out.push_back({warp_distance(query, refs[i].feature, opts).distance, refs[i].label, i});
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    return std::tuple(a.distance, index_of(a.label), a.index) <
           std::tuple(b.distance, index_of(b.label), b.index);
  });
  return out;
}

// Majority label among the first k neighbours; ties go to the smaller summed
// distance, then to the earlier class.
inline ArtifactClass vote(std::span<const Neighbor> ranked, std::size_t k) {
  if (k == 0 || k > ranked.size()) throw ArgError("k must lie in [1, number of references]");
  std::array<std::size_t, kArtifactClassCount> votes{};
  std::array<double, kArtifactClassCount> sums{};
  for (std::size_t i = 0; i < k; ++i) {
    ++votes[index_of(ranked[i].label)];
    sums[index_of(ranked[i].label)] += ranked[i].distance;
  }
  std::size_t best = kArtifactClassCount;
  for (std::size_t c = 0; c < kArtifactClassCount; ++c) {
    if (votes[c] == 0) continue;
    if (best == kArtifactClassCount || votes[c] > votes[best] ||
        (votes[c] == votes[best] && sums[c] < sums[best])) {
      best = c;
    }
  }
  return kAllArtifactClasses[best];
}

inline Prediction knn_classify(const Series& query, std::span<const Reference> refs,
                               std::size_t k, const WarpOptions& opts) {
  if (refs.empty()) throw ArgError("reference set is empty");
  if (k == 0 || k > refs.size()) throw ArgError("k must lie in [1, number of references]");
  Prediction p;
  p.neighbors = rank_neighbors(query, refs, opts);
  p.label = vote(p.neighbors, k);
  return p;
}

enum class Protocol { IntraSession, InterSession, InterSubject };

inline constexpr std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::IntraSession: return "intra";
    case Protocol::InterSession: return "inter-session";
    case Protocol::InterSubject: return "inter-subject";
  }
  return "?";
}

inline Protocol parse_protocol(std::string_view s) {
  for (auto p : {Protocol::IntraSession, Protocol::InterSession, Protocol::InterSubject}) {
    if (s == to_string(p)) return p;
  }
  throw ArgError("unknown protocol '" + std::string(s) +
                 "' (intra, inter-session, inter-subject)");
}

struct EvalReport {
  Protocol protocol{Protocol::IntraSession};
  WarpVariant variant{WarpVariant::NormalizedDtw};
  std::size_t k{1};
  // confusion[truth][predicted]
  std::array<std::array<std::size_t, kArtifactClassCount>, kArtifactClassCount> confusion{};
  std::size_t references{0};

  std::size_t test_count(ArtifactClass c) const {
    std::size_t n = 0;
    for (std::size_t v : confusion[index_of(c)]) n += v;
    return n;
  }
  std::size_t total() const {
    std::size_t n = 0;
    for (ArtifactClass c : kAllArtifactClasses) n += test_count(c);
    return n;
  }
  std::optional<double> class_accuracy(ArtifactClass c) const {
    const std::size_t n = test_count(c);
    if (n == 0) return std::nullopt;
    return static_cast<double>(confusion[index_of(c)][index_of(c)]) / static_cast<double>(n);
  }
  double overall_accuracy() const {
    std::size_t hit = 0;
    for (ArtifactClass c : kAllArtifactClasses) hit += confusion[index_of(c)][index_of(c)];
    const std::size_t n = total();
    return n ? static_cast<double>(hit) / static_cast<double>(n) : 0.0;
  }
  std::vector<ArtifactClass> classes() const {
    std::vector<ArtifactClass> out;
    for (ArtifactClass c : kAllArtifactClasses) {
      bool seen = test_count(c) > 0;
      for (ArtifactClass t : kAllArtifactClasses) seen = seen || confusion[index_of(t)][index_of(c)] > 0;
      if (seen) out.push_back(c);
    }
    return out;
  }
};

struct Split {
  std::vector<std::size_t> reference;
  std::vector<std::size_t> test;
};

namespace detail {

// Fisher-Yates over mt19937_64 draws; identical on every standard library.
inline void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace detail

// IntraSession: every (subject, session, class) stratum is shuffled and its
// first ceil(n/2) trials become references.
// InterSession: per subject, the first session (by id) is the reference and
// the remaining sessions are tested.
// InterSubject: subjects are shuffled; the first ceil(S/2) are references.
inline Split split_trials(std::span<const EegTrial> trials, Protocol protocol, std::uint64_t seed) {
  for (const auto& t : trials) {
    if (!t.label) throw ProtocolError("evaluation needs labelled trials");
  }
  std::mt19937_64 rng(seed);
  Split split;
  switch (protocol) {
    case Protocol::IntraSession: {
      std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<std::size_t>> strata;
      for (std::size_t i = 0; i < trials.size(); ++i) {
        strata[{trials[i].subject_id, trials[i].session_id, index_of(*trials[i].label)}].push_back(i);
      }
      for (auto& [key, members] : strata) {
        detail::shuffle(members, rng);
        const std::size_t refs = (members.size() + 1) / 2;
        for (std::size_t r = 0; r < members.size(); ++r) {
          (r < refs ? split.reference : split.test).push_back(members[r]);
        }
      }
      break;
    }
    case Protocol::InterSession: {
      std::map<std::string, std::set<std::string>> sessions;
      for (const auto& t : trials) sessions[t.subject_id].insert(t.session_id);
      for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& s = sessions[trials[i].subject_id];
        if (s.size() < 2) continue;
        (trials[i].session_id == *s.begin() ? split.reference : split.test).push_back(i);
      }
      if (split.test.empty()) {
        throw ProtocolError("inter-session evaluation needs a subject with two or more sessions");
      }
      break;
    }
    case Protocol::InterSubject: {
      std::set<std::string> subject_set;
      for (const auto& t : trials) subject_set.insert(t.subject_id);
      if (subject_set.size() < 2) {
        throw ProtocolError("inter-subject evaluation needs two or more subjects");
      }
      std::vector<std::string> subjects(subject_set.begin(), subject_set.end());
      std::vector<std::size_t> order(subjects.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      detail::shuffle(order, rng);
      std::set<std::string> ref_subjects;
      for (std::size_t r = 0; r < (order.size() + 1) / 2; ++r) ref_subjects.insert(subjects[order[r]]);
      for (std::size_t i = 0; i < trials.size(); ++i) {
        (ref_subjects.count(trials[i].subject_id) ? split.reference : split.test).push_back(i);
      }
      break;
    }
  }
  if (split.reference.empty() || split.test.empty()) {
    throw ProtocolError("split left no reference or no test trials");
  }
  return split;
}

struct EvalParams {
  Protocol protocol{Protocol::IntraSession};
  std::vector<std::size_t> ks{1};
  WarpOptions warp{WarpVariant::NormalizedDtw};
  std::uint64_t seed{0};
  FeatureParams features{};
  std::optional<FilterSpec> filter{FilterSpec{}};  // preprocessing; nullopt skips it
  std::size_t threads{0};
};

inline EegTrial preprocess(const EegTrial& trial, const std::optional<FilterSpec>& filter) {
  return mean_center(filter ? bandpass_notch(trial, *filter) : trial);
}

inline std::vector<Series> featurize_all(std::span<const EegTrial> trials, const EvalParams& p) {
  std::vector<Series> features(trials.size());
  parallel_for(
      trials.size(),
      [&](std::size_t i) { features[i] = featurize(preprocess(trials[i], p.filter), p.features); },
      p.threads);
  return features;
}

// One report per k, all sharing one split and one set of distances.
inline std::vector<EvalReport> evaluate(std::span<const EegTrial> trials, const EvalParams& p) {
  if (p.ks.empty()) throw ArgError("no k values given");
  const Split split = split_trials(trials, p.protocol, p.seed);
  for (std::size_t k : p.ks) {
    if (k == 0 || k > split.reference.size()) {
      throw ArgError("k=" + std::to_string(k) + " exceeds the " +
                     std::to_string(split.reference.size()) + " references");
    }
  }
  const std::vector<Series> features = featurize_all(trials, p);
  ReferenceSet refs;
  for (std::size_t i : split.reference) {
    refs.push_back({features[i], *trials[i].label, trials[i].subject_id, trials[i].session_id});
  }
  std::vector<std::vector<Neighbor>> ranked(split.test.size());
  parallel_for(
      split.test.size(),
      [&](std::size_t t) { ranked[t] = rank_neighbors(features[split.test[t]], refs, p.warp); },
      p.threads);

  std::vector<EvalReport> reports;
  for (std::size_t k : p.ks) {
    EvalReport r;
    r.protocol = p.protocol;
    r.variant = p.warp.variant;
    r.k = k;
    r.references = refs.size();
    for (std::size_t t = 0; t < split.test.size(); ++t) {
      const ArtifactClass truth = *trials[split.test[t]].label;
      ++r.confusion[index_of(truth)][index_of(vote(ranked[t], k))];
    }
    reports.push_back(r);
  }
  return reports;
}

// Per-class accuracy columns followed by the overall model accuracy.
inline void write_report_csv(std::ostream& out, std::span<const EvalReport> reports) {
  std::vector<ArtifactClass> cols;
  for (const auto& r : reports) {
    for (ArtifactClass c : r.classes()) {
      if (r.test_count(c) && std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
    }
  }
  std::sort(cols.begin(), cols.end());
  out << "protocol,variant,k";
  for (ArtifactClass c : cols) out << ',' << to_string(c);
  out << ",model_accuracy\n";
  char buf[32];
  for (const auto& r : reports) {
    out << to_string(r.protocol) << ',' << to_string(r.variant) << ',' << r.k;
    for (ArtifactClass c : cols) {
      out << ',';
      if (auto acc = r.class_accuracy(c)) {
        std::snprintf(buf, sizeof buf, "%.4f", *acc);
        out << buf;
      }
    }
    std::snprintf(buf, sizeof buf, "%.4f", r.overall_accuracy());
    out << ',' << buf << '\n';
  }
}

inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["protocol"] = std::string(to_string(r.protocol));
  j["variant"] = std::string(to_string(r.variant));
  j["k"] = r.k;
  j["references"] = r.references;
  j["tests"] = r.total();
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  const auto classes = r.classes();
  for (ArtifactClass c : classes) {
    if (auto acc = r.class_accuracy(c)) per_class[std::string(to_string(c))] = *acc;
  }
  j["class_accuracy"] = per_class;
  j["model_accuracy"] = r.overall_accuracy();
  nlohmann::ordered_json labels = nlohmann::ordered_json::array();
  for (ArtifactClass c : classes) labels.push_back(std::string(to_string(c)));
  nlohmann::ordered_json matrix = nlohmann::ordered_json::array();
  for (ArtifactClass t : classes) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (ArtifactClass p : classes) row.push_back(r.confusion[index_of(t)][index_of(p)]);
    matrix.push_back(row);
  }
  j["confusion"] = {{"labels", labels}, {"rows_truth_cols_predicted", matrix}};
  return j;
}

}  // namespace warpbci
