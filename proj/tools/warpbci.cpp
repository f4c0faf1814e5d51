#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "warpbci/server.hpp"
#include "warpbci/warpbci.hpp"

#ifndef WARPBCI_DATA_DIR
#define WARPBCI_DATA_DIR "data"
#endif

namespace {

using namespace warpbci;

const std::string kDataDir = WARPBCI_DATA_DIR;

// Every flag can also come from WARPBCI_<FLAG> in the environment.
template <class T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& value, const std::string& help) {
  std::string env = "WARPBCI_" + name;
  for (char& c : env) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return app->add_option("--" + name, value, help)->envname(env);
}

CLI::Option* toggle(CLI::App* app, const std::string& name, bool& value, const std::string& help) {
  std::string env = "WARPBCI_" + name;
  for (char& c : env) c = c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return app->add_flag("--" + name, value, help)->envname(env);
}

// Writes to the file when given, else stdout.
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  fn(out);
}

std::vector<EegTrial> read_input(const std::string& path, const std::string& format) {
  if (path == "-") return read_trials(std::cin, parse_trial_format(format.empty() ? "csv" : format));
  return format.empty() ? load_trials(path) : load_trials(path, parse_trial_format(format));
}

struct GenOptions {
  double rate{250.0};
  std::size_t channels{8};
  double noise{2.0};
  std::uint64_t seed{1};
  std::size_t subjects{1};
  std::size_t sessions{1};

  void add(CLI::App* app) {
    flag(app, "rate", rate, "sample rate in Hz");
    flag(app, "channels", channels, "channel count");
    flag(app, "noise", noise, "baseline noise sigma");
    flag(app, "seed", seed, "random seed");
    flag(app, "subjects", subjects, "subjects to generate");
    flag(app, "sessions", sessions, "sessions per subject");
  }
  GenSpec spec() const {
    GenSpec g;
    g.sample_rate = rate;
    g.channels = channels;
    g.noise_sigma = noise;
    g.seed = seed;
    g.subjects = subjects;
    g.sessions = sessions;
    return g;
  }
};

std::shared_ptr<const Lexicon> open_lexicon(const std::string& path, std::uint64_t min_count) {
  return std::make_shared<const Lexicon>(load_lexicon(path, min_count));
}

Server* g_server = nullptr;
extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Artifact-driven BCI toolkit: detection, warping classifiers, T9 speller, session server"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // gen
  auto* gen = app.add_subcommand("gen", "write synthetic trials, streams or templates");
  GenOptions gen_opts;
  gen_opts.add(gen);
  std::string gen_kind = "trials", gen_out, gen_format;
  std::size_t gen_per_class = 25, gen_bursts = 8, gen_count = 1;
  double gen_duration = 60.0;
  flag(gen, "kind", gen_kind, "trials, stream or templates")
      ->check(CLI::IsMember({"trials", "stream", "templates"}));
  flag(gen, "per-class", gen_per_class, "epochs per class (trials)");
  flag(gen, "duration", gen_duration, "stream length in seconds");
  flag(gen, "bursts", gen_bursts, "gestures per stream");
  flag(gen, "count", gen_count, "number of streams");
  std::vector<std::string> gen_events;
  flag(gen, "events", gen_events, "explicit stream gestures as seconds:Class (overrides --bursts)")
      ->delimiter(',');
  flag(gen, "out", gen_out, "output file (default stdout)");
  flag(gen, "format", gen_format, "csv or jsonl (default from extension, else csv)");

  // detect
  auto* det = app.add_subcommand("detect", "threshold detection and the eta-F1 table");
  GenOptions det_gen;
  det_gen.add(det);
  std::string det_input, det_format;
  double det_eta = ThresholdSpec::kContinuousDefault, eta_lo = -1.0, eta_hi = 2.0, eta_step = 0.1;
  double det_gap = 0.2, det_overlap = 0.6;
  std::size_t det_streams = 20, det_bursts = 8;
  double det_duration = 60.0;
  bool det_no_sweep = false;
  flag(det, "input", det_input, "trial file (default: synthetic streams)");
  flag(det, "format", det_format, "input format override");
  flag(det, "eta", det_eta, "threshold multiplier for the event list");
  flag(det, "eta-min", eta_lo, "sweep start");
  flag(det, "eta-max", eta_hi, "sweep end");
  flag(det, "eta-step", eta_step, "sweep step");
  flag(det, "merge-gap", det_gap, "merge runs closer than this many seconds");
  flag(det, "overlap", det_overlap, "minimum covered fraction of a truth window");
  flag(det, "streams", det_streams, "synthetic streams when no input is given");
  flag(det, "duration", det_duration, "synthetic stream length in seconds");
  flag(det, "bursts", det_bursts, "gestures per synthetic stream");
  toggle(det, "no-sweep", det_no_sweep, "print only the event list");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "split trials into references and tests and report accuracy");
  GenOptions ev_gen;
  ev_gen.add(ev);
  std::string ev_input, ev_format, ev_protocol = "intra", ev_variant = "ndtw", ev_out_format = "csv",
                                   ev_feature = "energy";
  std::vector<std::size_t> ev_k{1};
  std::size_t ev_per_class = 25, ev_threads = 0;
  std::uint64_t ev_split_seed = 0;
  bool ev_raw = false;
  flag(ev, "input", ev_input, "trial file (default: synthetic epochs)");
  flag(ev, "format", ev_format, "input format override");
  flag(ev, "protocol", ev_protocol, "intra, inter-session or inter-subject");
  flag(ev, "variant", ev_variant, "ltw, dtw, ndtw or tsdtw");
  flag(ev, "k", ev_k, "neighbour counts")->delimiter(',');
  flag(ev, "per-class", ev_per_class, "synthetic epochs per class");
  flag(ev, "split-seed", ev_split_seed, "shuffle seed for the split");
  flag(ev, "output", ev_out_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  flag(ev, "feature", ev_feature, "energy or multichannel")->check(CLI::IsMember({"energy", "multichannel"}));
  flag(ev, "threads", ev_threads, "worker threads (0 = all cores)");
  toggle(ev, "raw", ev_raw, "skip band-pass filtering and mean-centering");

  // classify
  auto* cl = app.add_subcommand("classify", "label query trials against reference trials");
  std::string cl_refs, cl_queries, cl_variant = "ndtw", cl_out_format = "csv", cl_feature = "energy";
  std::size_t cl_k = 1;
  bool cl_raw = false;
  flag(cl, "refs", cl_refs, "labelled reference trials")->required();
  flag(cl, "queries", cl_queries, "trials to classify")->required();
  flag(cl, "variant", cl_variant, "ltw, dtw, ndtw or tsdtw");
  flag(cl, "k", cl_k, "neighbour count");
  flag(cl, "output", cl_out_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  flag(cl, "feature", cl_feature, "energy or multichannel")->check(CLI::IsMember({"energy", "multichannel"}));
  toggle(cl, "raw", cl_raw, "skip band-pass filtering and mean-centering");

  // suggest
  auto* sg = app.add_subcommand("suggest", "word suggestions for a T9 digit string or a letter prefix");
  std::string sg_t9, sg_prefix, sg_lexicon = kDataDir + "/lexicon_en_50k.tsv";
  std::size_t sg_limit = 5;
  std::uint64_t sg_min = 0;
  auto* t9_opt = flag(sg, "t9", sg_t9, "digits 2-9");
  auto* prefix_opt = flag(sg, "prefix", sg_prefix, "letters");
  t9_opt->excludes(prefix_opt);
  flag(sg, "lexicon", sg_lexicon, "word<TAB>count file");
  flag(sg, "limit", sg_limit, "maximum suggestions");
  flag(sg, "min-count", sg_min, "drop words below this count");

  // replay
  auto* rp = app.add_subcommand("replay", "feed a recording through the online engine, one JSON event per line");
  std::string rp_input, rp_format, rp_mode = "auto";
  StreamConfig rp_cfg;
  flag(rp, "input", rp_input, "trial file")->required();
  flag(rp, "format", rp_format, "input format override");
  flag(rp, "mode", rp_mode, "auto, blink or blink-jaw")->check(CLI::IsMember({"auto", "blink", "blink-jaw"}));
  flag(rp, "smoothing", rp_cfg.smoothing, "moving-average length in samples");
  flag(rp, "calibration", rp_cfg.calibration_s, "calibration seconds");
  flag(rp, "window-ms", rp_cfg.blink_window_ms, "count window after a crossing");
  flag(rp, "chunk-ms", rp_cfg.chunk_ms, "classified chunk length");
  flag(rp, "sigma-mult", rp_cfg.sigma_mult, "threshold = mean + sigma-mult * sd");

  // serve
  auto* sv = app.add_subcommand("serve", "run the speller session server");
  ServerConfig sv_cfg;
  std::string sv_lexicon = kDataDir + "/lexicon_en_50k.tsv", sv_layout = "T9";
  sv_cfg.session.fixtures_dir = kDataDir + "/fixtures";
  flag(sv, "host", sv_cfg.host, "listen address");
  flag(sv, "port", sv_cfg.port, "listen port (0 = any free port)");
  flag(sv, "static", sv_cfg.static_dir, "directory served over plain HTTP");
  flag(sv, "tick-ms", sv_cfg.tick_ms, "dwell clock resolution");
  flag(sv, "fixtures", sv_cfg.session.fixtures_dir, "directory of replay fixtures");
  flag(sv, "lexicon", sv_lexicon, "word<TAB>count file");
  flag(sv, "layout", sv_layout, "T9 or ABC");
  flag(sv, "dwell-ms", sv_cfg.session.dwell_ms, "highlight dwell time");
  toggle(sv, "test-clock", sv_cfg.session.test_clock, "advance time only on client Tick messages");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      const GenSpec spec = gen_opts.spec();
      std::vector<EegTrial> trials;
      if (gen_kind == "trials") {
        trials = gen_trials(spec, gen_per_class);
      } else if (gen_kind == "stream" && !gen_events.empty()) {
        std::vector<ScheduledEvent> events;
        for (const std::string& e : gen_events) {
          const auto colon = e.find(':');
          if (colon == std::string::npos) throw ArgError("event '" + e + "' is not seconds:Class");
          events.push_back({std::stod(e.substr(0, colon)), parse_artifact_class(e.substr(colon + 1))});
        }
        trials.push_back(gen_stream(spec, gen_duration, events));
      } else if (gen_kind == "stream") {
        trials = gen_streams(spec, gen_count, gen_duration, gen_bursts);
      } else {
        for (const Template& t : gen_templates(spec).templates) {
          EegTrial tr;
          tr.sample_rate = spec.sample_rate;
          tr.data = {t.series.values()};
          tr.label = t.label;
          tr.subject_id = "template";
          tr.session_id = "template";
          trials.push_back(std::move(tr));
        }
      }
      const TrialFormat fmt = !gen_format.empty() ? parse_trial_format(gen_format)
                              : gen_out.empty()   ? TrialFormat::Csv
                                                  : trial_format_for_path(gen_out);
      with_output(gen_out, [&](std::ostream& out) { write_trials(out, trials, fmt); });
    } else if (*det) {
      const std::vector<EegTrial> trials =
          det_input.empty() ? gen_streams(det_gen.spec(), det_streams, det_duration, det_bursts)
                            : read_input(det_input, det_format);
      std::printf("trial,onset,offset,peak_energy\n");
      ContinuousParams cp;
      cp.threshold = ThresholdSpec{det_eta};
      cp.merge_gap_s = det_gap;
      for (std::size_t i = 0; i < trials.size(); ++i) {
        for (const DetectedEvent& e : detect_continuous(trials[i], cp, i)) {
          std::printf("%zu,%zu,%zu,%.6g\n", e.trial, e.onset, e.offset, e.peak_energy);
        }
      }
      std::size_t truths = 0;
      for (const auto& t : trials) truths += t.annotations.size();
      if (!det_no_sweep && truths > 0) {
        SweepParams sp;
        sp.merge_gap_s = det_gap;
        sp.overlap_min = det_overlap;
        std::printf("\neta,tp,fp,fn,f1\n");
        for (const SweepRow& r : f1_sweep(trials, eta_grid(eta_lo, eta_hi, eta_step), sp)) {
          std::printf("%.4g,%zu,%zu,%zu,%.4f\n", r.eta, r.counts.tp, r.counts.fp, r.counts.fn, r.f1);
        }
      }
    } else if (*ev) {
      GenSpec spec = ev_gen.spec();
      if (ev_input.empty() && ev_protocol != "intra" && spec.subjects == 1 && spec.sessions == 1) {
        // The cross protocols need more than one group to split on.
        (ev_protocol == "inter-subject" ? spec.subjects : spec.sessions) = 2;
      }
      const std::vector<EegTrial> trials =
          ev_input.empty() ? gen_trials(spec, ev_per_class) : read_input(ev_input, ev_format);
      EvalParams p;
      p.protocol = parse_protocol(ev_protocol);
      p.ks = ev_k;
      p.warp.variant = parse_warp_variant(ev_variant);
      p.seed = ev_split_seed;
      p.features.mode = ev_feature == "energy" ? FeatureMode::Energy1d : FeatureMode::Multichannel;
      p.threads = ev_threads;
      if (ev_raw) p.filter.reset();
      const std::vector<EvalReport> reports = evaluate(trials, p);
      if (ev_out_format == "csv") {
        write_report_csv(std::cout, reports);
      } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : reports) arr.push_back(report_to_json(r));
        std::cout << arr.dump(2) << "\n";
      }
    } else if (*cl) {
      const std::vector<EegTrial> refs_t = load_trials(cl_refs);
      const std::vector<EegTrial> queries = load_trials(cl_queries);
      EvalParams p;
      p.features.mode = cl_feature == "energy" ? FeatureMode::Energy1d : FeatureMode::Multichannel;
      if (cl_raw) p.filter.reset();
      const WarpOptions wo{parse_warp_variant(cl_variant)};
      const std::vector<Series> ref_features = featurize_all(refs_t, p);
      ReferenceSet refs;
      for (std::size_t i = 0; i < refs_t.size(); ++i) {
        if (!refs_t[i].label) throw FormatError(0, "reference trial " + std::to_string(i) + " has no label");
        refs.push_back({ref_features[i], *refs_t[i].label, refs_t[i].subject_id, refs_t[i].session_id});
      }
      const std::vector<Series> query_features = featurize_all(queries, p);
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      if (cl_out_format == "csv") std::printf("index,predicted,distance,truth\n");
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const Prediction pr = knn_classify(query_features[i], refs, cl_k, wo);
        const std::string truth = queries[i].label ? std::string(to_string(*queries[i].label)) : "";
        if (cl_out_format == "csv") {
          std::printf("%zu,%s,%.6g,%s\n", i, std::string(to_string(pr.label)).c_str(),
                      pr.neighbors.front().distance, truth.c_str());
        } else {
          nlohmann::ordered_json j;
          j["index"] = i;
          j["predicted"] = std::string(to_string(pr.label));
          j["distance"] = pr.neighbors.front().distance;
          if (queries[i].label) j["truth"] = truth;
          arr.push_back(j);
        }
      }
      if (cl_out_format == "json") std::cout << arr.dump(2) << "\n";
    } else if (*sg) {
      if (sg_t9.empty() == sg_prefix.empty()) throw ArgError("give exactly one of --t9 or --prefix");
      const Lexicon lex = load_lexicon(sg_lexicon, sg_min);
      for (const std::string& w : sg_t9.empty() ? lex.suggest_prefix(sg_prefix, sg_limit)
                                                : lex.suggest_t9(sg_t9, sg_limit)) {
        std::printf("%s\n", w.c_str());
      }
    } else if (*rp) {
      const std::vector<EegTrial> trials = read_input(rp_input, rp_format);
      if (trials.size() != 1) throw FormatError(0, "replay expects exactly one trial");
      const EegTrial& t = trials.front();
      StreamConfig cfg = rp_cfg;
      cfg.sample_rate = t.sample_rate;
      cfg.mode = rp_mode == "blink-jaw" || (rp_mode == "auto" && t.channels() > 1) ? EngineMode::BlinkAndJaw
                                                                                   : EngineMode::BlinkOnly;
      TemplateBank bank;
      if (cfg.mode == EngineMode::BlinkAndJaw) {
        GenSpec g;
        g.sample_rate = t.sample_rate;
        bank = gen_templates(g);
      }
      for (const ArtifactEvent& e : replay(t, cfg, bank)) std::printf("%s\n", event_to_json(e).dump().c_str());
    } else if (*sv) {
      sv_cfg.session.layout = parse_layout_kind(sv_layout);
      sv_cfg.session.lexicon = open_lexicon(sv_lexicon, 0);
      Server server(sv_cfg);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::fprintf(stderr, "listening on %s:%u%s\n", sv_cfg.host.c_str(), server.port(),
                   sv_cfg.session.test_clock ? " (test clock)" : "");
      std::fflush(stderr);
      server.run();
      g_server = nullptr;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "warpbci %s: %s\n", app.get_subcommands().front()->get_name().c_str(), e.what());
    return 1;
  }
  return 0;
}
