#pragma once

// Reference implementations written independently of the library: slow,
// direct, and used only to check it.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Frames = std::vector<std::vector<double>>;

// Population z-score per dimension; near-constant dimensions become zero.
inline Frames znorm(const Frames& x) {
  Frames out = x;
  if (x.empty()) return out;
  const std::size_t dims = x[0].size();
  for (std::size_t d = 0; d < dims; ++d) {
    long double mean = 0.0L;
    for (const auto& f : x) mean += f[d];
    mean /= static_cast<long double>(x.size());
    long double ss = 0.0L;
    for (const auto& f : x) ss += (f[d] - mean) * (f[d] - mean);
    const long double sd = std::sqrt(ss / static_cast<long double>(x.size()));
    const bool flat = sd <= 1e-12L * std::max(1.0L, std::fabs(mean));
    for (auto& f : out) f[d] = flat ? 0.0 : static_cast<double>((f[d] - mean) / sd);
  }
  return out;
}

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

struct PathCost {
  double cost{std::numeric_limits<double>::infinity()};
  std::size_t cells{0};
};

// Minimum summed local cost over every monotone, continuous path from
// (0,0) to (n-1,m-1), found by enumerating all of them.
inline PathCost enumerate_paths(const Frames& a, const Frames& b, bool allow_horizontal) {
  PathCost best;
  const std::size_t n = a.size(), m = b.size();
  std::function<void(std::size_t, std::size_t, double, std::size_t)> walk =
      [&](std::size_t i, std::size_t j, double acc, std::size_t cells) {
        acc += euclid(a[i], b[j]);
        ++cells;
        if (i == n - 1 && j == m - 1) {
          if (acc < best.cost) best = {acc, cells};
          return;
        }
        if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc, cells);
        if (i + 1 < n) walk(i + 1, j, acc, cells);
        if (allow_horizontal && j + 1 < m) walk(i, j + 1, acc, cells);
      };
  walk(0, 0, 0.0, 0);
  return best;
}

struct Moments {
  double mean;
  double sd;
};

// Two passes in extended precision, population deviation.
inline Moments moments(const std::vector<double>& x) {
  long double sum = 0.0L;
  for (double v : x) sum += v;
  const long double mean = sum / static_cast<long double>(x.size());
  long double ss = 0.0L;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(ss / static_cast<long double>(x.size())))};
}

inline Frames random_frames(std::mt19937_64& rng, std::size_t len, std::size_t dims) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  Frames f(len, std::vector<double>(dims));
  for (auto& row : f) {
    for (double& v : row) v = u(rng);
  }
  return f;
}

}  // namespace oracle
