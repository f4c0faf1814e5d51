#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace warpbci::iir {

// Normalized second-order section (a0 == 1), transposed direct form II.
struct Biquad {
  double b0{1.0}, b1{0.0}, b2{0.0};
  double a1{0.0}, a2{0.0};

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

namespace detail {

inline Biquad normalize(double b0, double b1, double b2, double a0, double a1, double a2) {
  return Biquad{b0 / a0, b1 / a0, b2 / a0, a1 / a0, a2 / a0};
}

}  // namespace detail

// Bilinear-transform designs with frequency prewarping (audio EQ cookbook).
inline Biquad lowpass(double cutoff_hz, double rate_hz, double q) {
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / rate_hz;
  const double c = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  return detail::normalize((1.0 - c) / 2.0, 1.0 - c, (1.0 - c) / 2.0, 1.0 + alpha, -2.0 * c,
                           1.0 - alpha);
}

inline Biquad highpass(double cutoff_hz, double rate_hz, double q) {
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / rate_hz;
  const double c = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  return detail::normalize((1.0 + c) / 2.0, -(1.0 + c), (1.0 + c) / 2.0, 1.0 + alpha, -2.0 * c,
                           1.0 - alpha);
}

inline Biquad notch(double center_hz, double rate_hz, double q) {
  const double w0 = 2.0 * std::numbers::pi * center_hz / rate_hz;
  const double c = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  return detail::normalize(1.0, -2.0 * c, 1.0, 1.0 + alpha, -2.0 * c, 1.0 - alpha);
}

// Quality factors of the conjugate pole pairs of an even-order Butterworth
// prototype.
inline std::vector<double> butterworth_q(int order) {
  std::vector<double> qs;
  for (int k = 0; k < order / 2; ++k) {
    qs.push_back(1.0 / (2.0 * std::cos(std::numbers::pi * (2 * k + 1) / (2.0 * order))));
  }
  return qs;
}

// Cascade of biquads with steady-state initialization and zero-phase
// forward-backward application.
class Cascade {
 public:
  Cascade() = default;
  explicit Cascade(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

  void push_back(const Biquad& s) { sections_.push_back(s); }
  std::span<const Biquad> sections() const { return sections_; }

  // Causal single pass. State starts at the steady state for a constant
  // input equal to x.front().
  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(x.begin(), x.end());
    if (y.empty()) return y;
    double level = y.front();
    for (const Biquad& s : sections_) {
      const double out_level = s.dc_gain() * level;
      double z1 = out_level - s.b0 * level;
      double z2 = s.b2 * level - s.a2 * out_level;
      for (double& v : y) {
        const double in = v;
        const double out = s.b0 * in + z1;
        z1 = s.b1 * in - s.a1 * out + z2;
        z2 = s.b2 * in - s.a2 * out;
        v = out;
      }
      level = out_level;
    }
    return y;
  }

  // Forward-backward filtering with odd reflection padding at both ends.
  std::vector<double> filtfilt(std::span<const double> x, std::size_t pad) const {
    const std::size_t n = x.size();
    if (n == 0) return {};
    pad = std::min(pad, n - 1);
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t k = pad; k >= 1; --k) ext.push_back(2.0 * x.front() - x[k]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t k = 1; k <= pad; ++k) ext.push_back(2.0 * x.back() - x[n - 1 - k]);

    std::vector<double> fwd = apply(ext);
    std::reverse(fwd.begin(), fwd.end());
    std::vector<double> back = apply(fwd);
    std::reverse(back.begin(), back.end());
    return {back.begin() + static_cast<std::ptrdiff_t>(pad),
            back.begin() + static_cast<std::ptrdiff_t>(pad + n)};
  }

 private:
  std::vector<Biquad> sections_;
};

}  // namespace warpbci::iir
