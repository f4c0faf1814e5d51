// Runs each acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is nonzero when any criterion fails.

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "scripts.hpp"
#include "warpbci/warpbci.hpp"
#include "ws_client.hpp"

extern char** environ;

using namespace warpbci;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

const WarpOptions kRawDtw{WarpVariant::VanillaDtw, LocalDistance::Euclidean, false};

Outcome dtw_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t dims = k % 2 ? 4 : 1;
    const auto fa = oracle::random_frames(rng, 1 + rng() % 7, dims);
    const auto fb = oracle::random_frames(rng, 1 + rng() % 7, dims);
    const Series a = Series::from_frames(fa), b = Series::from_frames(fb);
    const double raw = dtw_distance(a, b, kRawDtw).distance;
    worst = std::max(worst, std::fabs(raw - oracle::enumerate_paths(fa, fb, true).cost));
    const double z = dtw_distance(a, b, {WarpVariant::VanillaDtw}).distance;
    worst = std::max(worst, std::fabs(z - oracle::enumerate_paths(oracle::znorm(fa), oracle::znorm(fb), true).cost));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 10.0, fmt("max |error| %.3g, %.2f s", worst, secs)};
}

Outcome path_validity() {
  std::mt19937_64 rng(77);
  std::size_t checked = 0, bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 1 + rng() % 20, m = 1 + rng() % 20, dims = 1 + rng() % 3;
    const Series a = Series::from_frames(oracle::random_frames(rng, n, dims));
    const Series b = Series::from_frames(oracle::random_frames(rng, m, dims));
    for (auto v : {WarpVariant::VanillaDtw, WarpVariant::NormalizedDtw, WarpVariant::TimeSyncDtw}) {
      const WarpResult r = dtw_distance(a, b, {v});
      if (v == WarpVariant::TimeSyncDtw && m > n) {
        bad += !(std::isinf(r.distance) && r.path && r.path->empty());
        continue;
      }
      ++checked;
      if (!r.path || !validate_path(*r.path, n, m, step_pattern(v))) {
        ++bad;
        continue;
      }
      if (v == WarpVariant::TimeSyncDtw) {
        for (std::size_t s = 1; s < r.path->size(); ++s) {
          if ((*r.path)[s].first == (*r.path)[s - 1].first) {
            ++bad;
            break;
          }
        }
      }
    }
  }
  return {bad == 0, std::to_string(checked) + " paths, " + std::to_string(bad) + " invalid"};
}

Outcome ltw_interpolation() {
  const Series y = linear_interpolate(Series{0.0, 3.0, 0.0}, 5);
  const double want[] = {0.0, 1.5, 3.0, 1.5, 0.0};
  double worst = y.length() == 5 ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < 5 && i < y.length(); ++i) worst = std::max(worst, std::fabs(y.at(i, 0) - want[i]));
  std::mt19937_64 rng(5);
  bool identity = true;
  for (int k = 0; k < 100; ++k) {
    const Series s = Series::from_frames(oracle::random_frames(rng, 1 + rng() % 30, 1 + rng() % 4));
    identity = identity && linear_interpolate(s, s.length()) == s;
  }
  return {worst <= 1e-12 && identity, fmt("max |error| %.3g", worst) + (identity ? ", identity exact" : ", identity broken")};
}

Outcome threshold_formula() {
  std::mt19937_64 rng(31);
  std::lognormal_distribution<double> energy(0.0, 1.5);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    std::vector<double> x(1 + rng() % 2000);
    for (double& v : x) v = energy(rng);
    const oracle::Moments m = oracle::moments(x);
    for (double eta : {-1.0, 0.0, 0.8, 0.9}) {
      const double want = m.mean + eta * m.sd;
      worst = std::max(worst, std::fabs(threshold(x, ThresholdSpec{eta}) - want) / std::max(1.0, std::fabs(want)));
    }
  }
  return {worst <= 1e-9, fmt("max relative error %.3g", worst)};
}

Outcome detection() {
  const auto t0 = Clock::now();
  const auto streams = gen_streams(GenSpec{}, 20, 60.0, 8);
  const auto rows = f1_sweep(streams, eta_grid(-1.0, 2.0, 0.1));
  const double secs = seconds_since(t0);
  const SweepRow* best = &rows.front();
  for (const auto& r : rows) {
    if (r.f1 > best->f1) best = &r;
  }
  const bool uni = unimodal_within_one_step(rows);
  return {best->f1 >= 0.95 && uni && secs < 30.0,
          fmt("best F1 %.4f at eta %.1f", best->f1, best->eta) + (uni ? ", unimodal" : ", not unimodal") +
              fmt(", %.2f s", secs)};
}

Outcome classification() {
  const auto t0 = Clock::now();
  const auto trials = gen_trials(GenSpec{}, 25);
  EvalParams p;
  p.warp.variant = WarpVariant::NormalizedDtw;
  const double ndtw = evaluate(trials, p).front().overall_accuracy();
  p.warp.variant = WarpVariant::VanillaDtw;
  const double dtw = evaluate(trials, p).front().overall_accuracy();
  const double secs = seconds_since(t0);
  return {ndtw >= 0.90 && ndtw >= dtw && secs < 60.0,
          fmt("ndtw %.4f, dtw %.4f", ndtw, dtw) + fmt(", %.2f s", secs)};
}

Outcome blink_counter() {
  const auto suite = scripts::blink_scripts();
  std::size_t wrong = 0, unstable = 0;
  for (const auto& s : suite) {
    const auto a = scripts::run(s);
    const auto b = scripts::run(s);
    wrong += a != s.expected;
    std::string ja, jb;
    for (const auto& e : a) ja += event_to_json(e).dump();
    for (const auto& e : b) jb += event_to_json(e).dump();
    unstable += ja != jb;
  }
  return {suite.size() >= 10 && wrong == 0 && unstable == 0,
          std::to_string(suite.size()) + " scripts, " + std::to_string(wrong) + " wrong, " +
              std::to_string(unstable) + " unstable"};
}

Outcome t9() {
  const bool codes = encode_t9("the") == "843" && encode_t9("good") == "4663" && encode_t9("felix") == "33549";
  const Lexicon lex = load_lexicon(WARPBCI_DATA_DIR "/lexicon_en_50k.tsv");
  const auto top = lex.suggest_t9("4663");
  std::string listed;
  for (const auto& w : top) listed += (listed.empty() ? "" : " ") + w;
  bool present = true;
  std::vector<std::uint64_t> counts;
  for (const char* w : {"good", "home", "gone", "hood"}) {
    present = present && std::find(top.begin(), top.end(), w) != top.end();
  }
  for (const auto& w : top) counts.push_back(lex.count(w));
  bool ordered = true;
  for (std::size_t i = 1; i < counts.size(); ++i) ordered = ordered && counts[i - 1] >= counts[i];
  return {codes && present && ordered, "4663 -> " + listed};
}

Outcome speller() {
  const auto lex = std::make_shared<const Lexicon>(load_lexicon(WARPBCI_DATA_DIR "/lexicon_en_50k.tsv"));
  const auto phrase = scripts::speller_golden(lex, false);
  const auto jaw = scripts::speller_golden(lex, true);
  const bool stable = phrase == scripts::speller_golden(lex, false) && jaw == scripts::speller_golden(lex, true);
  const bool golden = phrase == read_lines(WARPBCI_TEST_DIR "/golden/speller_phrase.jsonl") &&
                      jaw == read_lines(WARPBCI_TEST_DIR "/golden/speller_jaw.jsonl");
  const std::string spoken = R"({"output":"SpeakPhrase","words":["good"]})";
  const bool speaks = std::count(phrase.begin(), phrase.end(), spoken) == 1 &&
                      std::count(jaw.begin(), jaw.end(), spoken) == 1;
  return {stable && golden && speaks, std::string(golden ? "matches golden" : "differs from golden") +
                                          (stable ? ", stable" : ", unstable") + (speaks ? "" : ", not spoken")};
}

// Starts `warpbci serve` on a free port and reads the port from its banner.
Outcome gateway() {
  int fds[2];
  if (pipe(fds) != 0) return {false, "pipe failed"};
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDERR_FILENO);
  posix_spawn_file_actions_addclose(&actions, fds[0]);
  const std::string exe = WARPBCI_CLI;
  std::vector<std::string> args{exe, "serve", "--port", "0", "--test-clock", "--fixtures", WARPBCI_DATA_DIR "/fixtures"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, exe.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(fds[1]);
  if (rc != 0) {
    close(fds[0]);
    return {false, "could not start " + exe};
  }
  std::string banner;
  char c;
  while (read(fds[0], &c, 1) == 1 && c != '\n') banner += c;
  close(fds[0]);

  Outcome out{false, "no port in banner: " + banner};
  const auto colon = banner.rfind(':');
  if (banner.rfind("listening on ", 0) == 0 && colon != std::string::npos) {
    const auto port = static_cast<unsigned short>(std::stoul(banner.substr(colon + 1)));
    try {
      const auto got = wsclient::transcript(port, scripts::gateway_script());
      const auto want = read_lines(WARPBCI_TEST_DIR "/golden/gateway_transcript.jsonl");
      const bool spoken = std::count(got.begin(), got.end(), R"({"v":1,"type":"Spoken","words":["good"]})") == 1;
      out = {got == want && spoken && !want.empty(),
             std::to_string(got.size()) + " messages, " + (got == want ? "matches golden" : "differs from golden")};
    } catch (const std::exception& e) {
      out = {false, e.what()};
    }
  }
  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"dtw-oracle-equivalence", dtw_oracle},
      {"warp-path-validity", path_validity},
      {"ltw-interpolation", ltw_interpolation},
      {"threshold-formula", threshold_formula},
      {"detection-synthetic-streams", detection},
      {"classification-ndtw-intra", classification},
      {"blink-counter-scripts", blink_counter},
      {"t9-textonyms", t9},
      {"speller-end-to-end", speller},
      {"gateway-integration", gateway},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
