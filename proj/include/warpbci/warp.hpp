#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "warpbci/error.hpp"

namespace warpbci {

// Sequence of equal-dimension frames stored row-major.
class Series {
 public:
  Series() = default;

  Series(std::size_t dim, std::vector<double> values) : dim_(dim), values_(std::move(values)) {
    if (dim_ == 0) throw ArgError("series frame dimension must be at least 1");
    if (values_.size() % dim_ != 0) throw DimMismatch("series values are not whole frames");
  }

  // One-dimensional series.
  Series(std::initializer_list<double> values) : Series(1, std::vector<double>(values)) {}

  static Series scalar(std::vector<double> values) { return Series(1, std::move(values)); }

  static Series from_frames(const std::vector<std::vector<double>>& frames) {
    if (frames.empty()) return {};
    const std::size_t dim = frames.front().size();
    std::vector<double> values;
    values.reserve(dim * frames.size());
    for (const auto& f : frames) {
      if (f.size() != dim) throw DimMismatch("frames differ in dimension");
      values.insert(values.end(), f.begin(), f.end());
    }
    return Series(dim, std::move(values));
  }

  std::size_t dim() const { return dim_; }
  std::size_t length() const { return dim_ ? values_.size() / dim_ : 0; }
  bool empty() const { return values_.empty(); }

  std::span<const double> frame(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<double> frame(std::size_t i) { return {values_.data() + i * dim_, dim_}; }

  double at(std::size_t i, std::size_t d = 0) const { return values_[i * dim_ + d]; }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const Series&, const Series&) = default;

 private:
  std::size_t dim_{1};
  std::vector<double> values_;
};

enum class WarpVariant { Ltw, VanillaDtw, NormalizedDtw, TimeSyncDtw };
enum class LocalDistance { Manhattan, Euclidean, Squared };

inline constexpr std::string_view to_string(WarpVariant v) {
  switch (v) {
    case WarpVariant::Ltw: return "ltw";
    case WarpVariant::VanillaDtw: return "dtw";
    case WarpVariant::NormalizedDtw: return "ndtw";
    case WarpVariant::TimeSyncDtw: return "tsdtw";
  }
  return "?";
}

inline WarpVariant parse_warp_variant(std::string_view s) {
  for (auto v : {WarpVariant::Ltw, WarpVariant::VanillaDtw, WarpVariant::NormalizedDtw,
                 WarpVariant::TimeSyncDtw}) {
    if (s == to_string(v)) return v;
  }
  throw ArgError("unknown warp variant '" + std::string(s) + "' (ltw, dtw, ndtw, tsdtw)");
}

inline constexpr std::string_view to_string(LocalDistance d) {
  switch (d) {
    case LocalDistance::Manhattan: return "manhattan";
    case LocalDistance::Euclidean: return "euclidean";
    case LocalDistance::Squared: return "squared";
  }
  return "?";
}

struct WarpOptions {
  WarpVariant variant{WarpVariant::VanillaDtw};
  LocalDistance local{LocalDistance::Euclidean};
  // Off only in tests that need raw-amplitude alignments.
  bool znormalize{true};
};

// 0-based cell (i into the first series, j into the second).
using Cell = std::pair<std::size_t, std::size_t>;
using WarpPath = std::vector<Cell>;

struct WarpResult {
  double distance{0.0};
  std::optional<WarpPath> path;  // absent for LTW
  std::size_t rows{0};
  std::size_t cols{0};
};

inline double local_cost(std::span<const double> x, std::span<const double> y, LocalDistance d) {
  double acc = 0.0;
  switch (d) {
    case LocalDistance::Manhattan:
      for (std::size_t k = 0; k < x.size(); ++k) acc += std::abs(x[k] - y[k]);
      return acc;
    case LocalDistance::Euclidean:
      for (std::size_t k = 0; k < x.size(); ++k) acc += (x[k] - y[k]) * (x[k] - y[k]);
      return std::sqrt(acc);
    case LocalDistance::Squared:
      for (std::size_t k = 0; k < x.size(); ++k) acc += (x[k] - y[k]) * (x[k] - y[k]);
      return acc;
  }
  return acc;
}

// Per-dimension zero mean, unit population variance. Constant dimensions
// become all zeros.
inline Series znormalize(const Series& s) {
  const std::size_t n = s.length();
  if (n == 0) throw EmptySeries("cannot normalize an empty series");
  std::vector<double> out = s.values();
  for (std::size_t d = 0; d < s.dim(); ++d) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += s.at(i, d);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (s.at(i, d) - mean) * (s.at(i, d) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    // Relative cutoff so rounding noise on a constant input is not amplified.
    const bool constant = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
    for (std::size_t i = 0; i < n; ++i) {
      out[i * s.dim() + d] = constant ? 0.0 : (s.at(i, d) - mean) / sd;
    }
  }
  return Series(s.dim(), std::move(out));
}

// Resample onto target_len uniformly spaced positions with straight-line
// interpolation between neighbouring frames. Endpoints are preserved.
inline Series linear_interpolate(const Series& s, std::size_t target_len) {
  if (target_len == 0) throw ArgError("interpolation target length must be at least 1");
  const std::size_t n = s.length();
  if (n == 0) throw EmptySeries("cannot interpolate an empty series");
  if (target_len == n) return s;
  std::vector<double> out(target_len * s.dim());
  for (std::size_t i = 0; i < target_len; ++i) {
    std::size_t left = 0;
    double frac = 0.0;
    if (target_len > 1 && n > 1) {
      const double pos =
          static_cast<double>(i) * static_cast<double>(n - 1) / static_cast<double>(target_len - 1);
      left = std::min(static_cast<std::size_t>(std::floor(pos)), n - 1);
      frac = pos - static_cast<double>(left);
    }
    const std::size_t right = std::min(left + 1, n - 1);
    for (std::size_t d = 0; d < s.dim(); ++d) {
      const double b0 = s.at(left, d);
      const double b1 = s.at(right, d);
      out[i * s.dim() + d] = frac == 0.0 ? b0 : b0 * (1.0 - frac) + b1 * frac;
    }
  }
  return Series(s.dim(), std::move(out));
}

namespace detail {

inline void check_pair(const Series& a, const Series& b) {
  if (a.empty() || b.empty()) throw EmptySeries("warp distance of an empty series");
  if (a.dim() != b.dim()) {
    throw DimMismatch("frame dimensions differ: " + std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()));
  }
}

}  // namespace detail

inline WarpResult ltw_distance(const Series& a, const Series& b, const WarpOptions& opts = {}) {
  detail::check_pair(a, b);
  const std::size_t len = std::max(a.length(), b.length());
  const Series x = linear_interpolate(opts.znormalize ? znormalize(a) : a, len);
  const Series y = linear_interpolate(opts.znormalize ? znormalize(b) : b, len);
  double acc = 0.0;
  for (std::size_t k = 0; k < x.values().size(); ++k) {
    const double diff = x.values()[k] - y.values()[k];
    acc += diff * diff;
  }
  return {std::sqrt(acc), std::nullopt, a.length(), b.length()};
}

enum class StepPattern {
  Symmetric,     // diagonal, vertical (i+1) and horizontal (j+1) steps
  VerticalOnly,  // diagonal and vertical steps
};

inline StepPattern step_pattern(WarpVariant v) {
  return v == WarpVariant::TimeSyncDtw ? StepPattern::VerticalOnly : StepPattern::Symmetric;
}

// Accumulated cost matrix with an infinite border: cell (i+1, j+1) holds the
// cost of the best path from (0,0) to (i,j); cell (0,0) is zero.
class CostMatrix {
 public:
  CostMatrix(std::size_t n, std::size_t m)
      : n_(n), m_(m), cells_((n + 1) * (m + 1), std::numeric_limits<double>::infinity()) {
    at(0, 0) = 0.0;
  }

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return m_; }

  // Bordered indexing: 0 is the border, 1..n the series.
  double& at(std::size_t i, std::size_t j) { return cells_[i * (m_ + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return cells_[i * (m_ + 1) + j]; }

  double total() const { return at(n_, m_); }

 private:
  std::size_t n_, m_;
  std::vector<double> cells_;
};

// Fills the matrix for any frame-cost functor cost(i, j) over 0-based indices.
template <class FrameCost>
CostMatrix accumulate(std::size_t n, std::size_t m, FrameCost&& cost, StepPattern pattern) {
  CostMatrix D(n, m);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      double best = std::min(D.at(i - 1, j - 1), D.at(i - 1, j));
      if (pattern == StepPattern::Symmetric) best = std::min(best, D.at(i, j - 1));
      D.at(i, j) = cost(i - 1, j - 1) + best;
    }
  }
  return D;
}

// Walks back from (n-1, m-1) choosing the cheapest admissible predecessor;
// ties prefer diagonal, then vertical, then horizontal. Empty when the end
// cell is unreachable.
inline WarpPath backtrack(const CostMatrix& D, StepPattern pattern) {
  WarpPath path;
  std::size_t i = D.rows();
  std::size_t j = D.cols();
  if (!std::isfinite(D.at(i, j))) return path;
  path.emplace_back(i - 1, j - 1);
  while (i > 1 || j > 1) {
    const double diag = D.at(i - 1, j - 1);
    const double vert = D.at(i - 1, j);
    const double horiz =
        pattern == StepPattern::Symmetric ? D.at(i, j - 1) : std::numeric_limits<double>::infinity();
    if (diag <= vert && diag <= horiz) {
      --i;
      --j;
    } else if (vert <= horiz) {
      --i;
    } else {
      --j;
    }
    path.emplace_back(i - 1, j - 1);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Elastic distance for the DTW variants. TimeSync paths cannot advance the
// second series faster than the first, so pairs with len(b) > len(a) have
// infinite distance and no path.
inline WarpResult dtw_distance(const Series& a, const Series& b, const WarpOptions& opts = {}) {
  detail::check_pair(a, b);
  if (opts.variant == WarpVariant::Ltw) return ltw_distance(a, b, opts);
  const Series x = opts.znormalize ? znormalize(a) : a;
  const Series y = opts.znormalize ? znormalize(b) : b;
  const StepPattern pattern = step_pattern(opts.variant);
  const CostMatrix D = accumulate(
      x.length(), y.length(),
      [&](std::size_t i, std::size_t j) { return local_cost(x.frame(i), y.frame(j), opts.local); },
      pattern);
  WarpResult r{D.total(), backtrack(D, pattern), x.length(), y.length()};
  if (opts.variant == WarpVariant::NormalizedDtw && !r.path->empty()) {
    r.distance /= static_cast<double>(r.path->size());
  }
  return r;
}

inline WarpResult warp_distance(const Series& a, const Series& b, const WarpOptions& opts = {}) {
  return opts.variant == WarpVariant::Ltw ? ltw_distance(a, b, opts) : dtw_distance(a, b, opts);
}

// Boundary, continuity and monotonicity over 0-based cells.
inline bool validate_path(std::span<const Cell> path, std::size_t n, std::size_t m,
                          StepPattern pattern = StepPattern::Symmetric) {
  if (path.empty() || n == 0 || m == 0) return false;
  if (path.front() != Cell{0, 0} || path.back() != Cell{n - 1, m - 1}) return false;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const auto [pi, pj] = path[k - 1];
    const auto [ci, cj] = path[k];
    if (ci < pi || cj < pj) return false;
    const std::size_t di = ci - pi;
    const std::size_t dj = cj - pj;
    if (di > 1 || dj > 1 || (di == 0 && dj == 0)) return false;
    if (pattern == StepPattern::VerticalOnly && di == 0) return false;
  }
  return true;
}

}  // namespace warpbci
