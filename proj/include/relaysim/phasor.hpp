#ifndef RELAYSIM_PHASOR_HPP
#define RELAYSIM_PHASOR_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>

#include "relaysim/errors.hpp"

namespace relaysim {

using Complex = std::complex<double>;

/// Wrap an angle into the canonical interval (-pi, pi].
inline double normalize_angle(double angle_rad) {
  double a = std::remainder(angle_rad, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

/// Polar-form complex quantity with an RMS magnitude and an angle kept in
/// (-pi, pi].  A negative magnitude passed to the constructor is folded into
/// the angle; a zero magnitude collapses to the canonical 0 at angle 0.
class Phasor {
 public:
  Phasor() = default;

  Phasor(double magnitude, double angle_rad) {
    if (magnitude < 0.0) {
      magnitude = -magnitude;
      angle_rad += std::numbers::pi;
    }
    mag_ = magnitude;
    ang_ = (magnitude == 0.0) ? 0.0 : normalize_angle(angle_rad);
  }

  static Phasor from_complex(const Complex& c) {
    return Phasor(std::abs(c), std::arg(c));
  }

  static Phasor polar_deg(double magnitude, double angle_deg) {
    return Phasor(magnitude, angle_deg * std::numbers::pi / 180.0);
  }

  double magnitude() const { return mag_; }
  double angle() const { return ang_; }
  double angle_deg() const { return ang_ * 180.0 / std::numbers::pi; }

  Complex as_complex() const { return std::polar(mag_, ang_); }

  Phasor operator+(const Phasor& o) const {
    return from_complex(as_complex() + o.as_complex());
  }
  Phasor operator-(const Phasor& o) const {
    return from_complex(as_complex() - o.as_complex());
  }
  /// Multiplication and division stay in polar form, so magnitudes and
  /// angles combine without a rectangular round trip.
  Phasor operator*(const Phasor& o) const {
    return Phasor(mag_ * o.mag_, ang_ + o.ang_);
  }
  Phasor operator/(const Phasor& o) const {
    return Phasor(mag_ / o.mag_, ang_ - o.ang_);
  }
  Phasor operator*(double s) const { return Phasor(mag_ * s, ang_); }
  Phasor operator-() const { return Phasor(mag_, ang_ + std::numbers::pi); }

 private:
  double mag_ = 0.0;
  double ang_ = 0.0;
};

inline Phasor operator*(double s, const Phasor& p) { return p * s; }

/// One value per phase conductor.
struct ThreePhaseSet {
  Phasor a, b, c;
};

/// Symmetrical-component triplet.
struct SequenceSet {
  Phasor zero, positive, negative;
};

namespace detail {
// alpha = 1 /_ 120 degrees, the rotation operator of the component transform.
inline const Complex kAlpha{-0.5, 0.86602540378443864676};
inline const Complex kAlpha2{-0.5, -0.86602540378443864676};
}  // namespace detail

/// Phase quantities -> symmetrical components:
///   zero     = (a +      b +      c) / 3
///   positive = (a +  alpha*b + alpha^2*c) / 3
///   negative = (a + alpha^2*b +  alpha*c) / 3
inline SequenceSet to_sequence(const ThreePhaseSet& p) {
  using detail::kAlpha;
  using detail::kAlpha2;
  const Complex a = p.a.as_complex();
  const Complex b = p.b.as_complex();
  const Complex c = p.c.as_complex();
  return SequenceSet{
      Phasor::from_complex((a + b + c) / 3.0),
      Phasor::from_complex((a + kAlpha * b + kAlpha2 * c) / 3.0),
      Phasor::from_complex((a + kAlpha2 * b + kAlpha * c) / 3.0),
  };
}

/// Exact algebraic inverse of to_sequence.
inline ThreePhaseSet from_sequence(const SequenceSet& s) {
  using detail::kAlpha;
  using detail::kAlpha2;
  const Complex s0 = s.zero.as_complex();
  const Complex s1 = s.positive.as_complex();
  const Complex s2 = s.negative.as_complex();
  return ThreePhaseSet{
      Phasor::from_complex(s0 + s1 + s2),
      Phasor::from_complex(s0 + kAlpha2 * s1 + kAlpha * s2),
      Phasor::from_complex(s0 + kAlpha * s1 + kAlpha2 * s2),
  };
}

/// Full-cycle discrete Fourier extraction of the fundamental phasor from the
/// most recent complete cycle of time-domain samples.
///
/// The sample rate must be an integer multiple (>= 8) of the fundamental.
/// The returned magnitude is RMS; the angle is referenced to the first sample
/// of the analysed window, so a cosine A*sqrt(2)*cos(w*t + phi) sampled from
/// t = 0 over exactly one cycle estimates A at angle phi.  Aligned DC offsets
/// and integer harmonics cancel exactly in this window.
inline Phasor estimate_phasor(std::span<const double> samples,
                              double sample_rate_hz, double fundamental_hz) {
  if (!(sample_rate_hz > 0.0) || !(fundamental_hz > 0.0)) {
    throw InvalidRate("sample rate and fundamental must be positive");
  }
  const double ratio = sample_rate_hz / fundamental_hz;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * ratio || rounded < 8.0) {
    throw InvalidRate(
        "sample rate must be an integer multiple (>= 8) of the fundamental");
  }
  const std::size_t n = static_cast<std::size_t>(rounded);
  if (samples.size() < n) {
    throw InsufficientSamples("need at least one full cycle of samples");
  }

  const std::size_t offset = samples.size() - n;
  Complex acc{0.0, 0.0};
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    acc += samples[offset + k] *
           std::polar(1.0, -step * static_cast<double>(k));
  }
  acc *= std::numbers::sqrt2 / static_cast<double>(n);
  return Phasor::from_complex(acc);
}

}  // namespace relaysim

#endif  // RELAYSIM_PHASOR_HPP
