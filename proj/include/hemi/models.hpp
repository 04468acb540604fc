#pragma once

// Catalogue of closed-form model metrics on the unit ball. Every model is
// conformally flat and analytic on the ball of radius 2.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "hemi/core.hpp"
#include "hemi/metric.hpp"

namespace hemi {

/// Stereographic factor of the round metric: 2 / (1 + |x|^2).
template <int N>
double round_factor(const Point<N>& x) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return 2.0 / (1.0 + r2);
}

template <int N>
double radius_squared(const Point<N>& x) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return r2;
}

template <int N>
MetricSpec<N> flat_model() {
  return conformal_metric<N>("flat", [](const Point<N>&) { return 1.0; }, true);
}

/// Upper hemisphere via stereographic projection; boundary = equator.
template <int N>
MetricSpec<N> hemisphere_model() {
  return conformal_metric<N>("hemisphere", [](const Point<N>& x) { return round_factor<N>(x); },
                             true);
}

/// Round metric pulled back from the ball of radius a: a geodesic cap of
/// radius 2 atan(a) with umbilical boundary of mean curvature (1 - a^2)/(2a).
template <int N>
MetricSpec<N> cap_model(double a) {
  if (!(a > 0.0) || !(a < 1.0)) throw PreconditionError("cap(a) requires 0 < a < 1");
  char buf[64];
  std::snprintf(buf, sizeof buf, "cap(%g)", a);
  return conformal_metric<N>(
      buf,
      [a](const Point<N>& x) { return 2.0 * a / (1.0 + a * a * radius_squared<N>(x)); }, true);
}

/// Even polynomial u(s), s = |x|^2, with seeded coefficients and sup |u| <=
/// amplitude on the unit ball, times (1 - s)^vanish_order.
struct RadialProfile {
  std::vector<double> coeffs;  // u(s) = (1 - s)^vanish_order sum_k coeffs[k] s^k
  int vanish_order = 0;

  double operator()(double s) const {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * s + coeffs[k];
    for (int k = 0; k < vanish_order; ++k) acc *= 1.0 - s;
    return acc;
  }

  static RadialProfile seeded(std::uint64_t seed, double amplitude, int vanish_order,
                              int degree = 3) {
    SeededStream rng(seed);
    RadialProfile u;
    u.vanish_order = vanish_order;
    u.coeffs.assign(degree + 1, 0.0);
    double l1 = 0.0;
    const int first = vanish_order > 0 ? 0 : 1;
    for (int k = first; k <= degree; ++k) {
      u.coeffs[k] = rng.uniform(-1.0, 1.0);
      l1 += std::abs(u.coeffs[k]);
    }
    for (double& c : u.coeffs) c *= amplitude / l1;
    return u;
  }
};

/// Hemisphere factor times exp(u(|x|^2)).
template <int N>
MetricSpec<N> radial_bump_model(std::uint64_t seed, double amplitude) {
  const auto u = RadialProfile::seeded(seed, amplitude, 0);
  char buf[96];
  std::snprintf(buf, sizeof buf, "radial_bump(%llu,%g)",
                static_cast<unsigned long long>(seed), amplitude);
  return conformal_metric<N>(
      buf,
      [u](const Point<N>& x) {
        const double s = radius_squared<N>(x);
        return round_factor<N>(x) * std::exp(u(s));
      },
      true);
}

/// Hemisphere factor times exp(u) with u = O((1 - |x|^2)^2): the boundary
/// stays totally geodesic while E does not vanish.
template <int N>
MetricSpec<N> geodesic_bump_model(std::uint64_t seed, double amplitude) {
  const auto u = RadialProfile::seeded(seed, amplitude, 2);
  char buf[96];
  std::snprintf(buf, sizeof buf, "geodesic_bump(%llu,%g)",
                static_cast<unsigned long long>(seed), amplitude);
  return conformal_metric<N>(
      buf,
      [u](const Point<N>& x) {
        const double s = radius_squared<N>(x);
        return round_factor<N>(x) * std::exp(u(s));
      },
      true);
}

/// Seeded non-radial analytic function with |p| <= 1 on the unit ball:
///   p(x) = (a.x + x^T B x / 2 + c sin(b.x)) / (|a| + |B|_F / 2 + |c|).
template <int N>
struct GenericProfile {
  Point<N> a{}, b{};
  std::array<double, N * N> B{};
  double c = 0.0;
  double scale = 1.0;

  double operator()(const Point<N>& x) const {
    double lin = 0.0, quad = 0.0, bx = 0.0;
    for (int i = 0; i < N; ++i) {
      lin += a[i] * x[i];
      bx += b[i] * x[i];
      for (int j = 0; j < N; ++j) quad += B[i * N + j] * x[i] * x[j];
    }
    return (lin + 0.5 * quad + c * std::sin(bx)) / scale;
  }

  static GenericProfile seeded(std::uint64_t seed) {
    SeededStream rng(seed ^ 0xA5A5A5A5ULL);
    GenericProfile p;
    double na = 0.0, nb = 0.0;
    for (int i = 0; i < N; ++i) {
      p.a[i] = rng.uniform(-1.0, 1.0);
      p.b[i] = rng.uniform(-2.0, 2.0);
      na += p.a[i] * p.a[i];
    }
    for (int i = 0; i < N; ++i)
      for (int j = i; j < N; ++j) {
        const double v = rng.uniform(-1.0, 1.0);
        p.B[i * N + j] = p.B[j * N + i] = v;
      }
    for (double v : p.B) nb += v * v;
    p.c = rng.uniform(-1.0, 1.0);
    p.scale = std::sqrt(na) + 0.5 * std::sqrt(nb) + std::abs(p.c);
    return p;
  }
};

/// Hemisphere factor times (1 + amplitude * p(x)) with p non-radial; large
/// amplitudes make the factor vanish and are rejected by validate_metric.
template <int N>
MetricSpec<N> generic_bump_model(std::uint64_t seed, double amplitude) {
  const auto p = GenericProfile<N>::seeded(seed);
  char buf[96];
  std::snprintf(buf, sizeof buf, "generic_bump(%llu,%g)",
                static_cast<unsigned long long>(seed), amplitude);
  return conformal_metric<N>(
      buf,
      [p, amplitude](const Point<N>& x) { return round_factor<N>(x) * (1.0 + amplitude * p(x)); },
      false);
}

/// Parsed form of a model label such as "cap(0.6)" or "radial_bump(7,0.2)".
struct ModelName {
  std::string family;
  std::vector<double> params;
};

inline ModelName parse_model_name(const std::string& label) {
  static const std::regex re(R"(^\s*([a-z_]+)\s*(?:\(([^)]*)\))?\s*$)");
  std::smatch m;
  if (!std::regex_match(label, m, re)) throw PreconditionError("unknown model '" + label + "'");
  ModelName out;
  out.family = m[1];
  if (m[2].matched) {
    std::string args = m[2];
    std::size_t pos = 0;
    while (pos <= args.size()) {
      const std::size_t comma = args.find(',', pos);
      const std::string tok =
          args.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      try {
        std::size_t used = 0;
        out.params.push_back(std::stod(tok, &used));
        if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw PreconditionError("bad model parameter '" + tok + "' in '" + label + "'");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  return out;
}

/// model(name, N): flat | hemisphere | cap(a) | radial_bump(seed, amplitude)
/// | geodesic_bump(seed, amplitude) | generic_bump(seed, amplitude).
template <int N>
MetricSpec<N> model(const std::string& label) {
  const ModelName m = parse_model_name(label);
  auto want = [&](std::size_t count) {
    if (m.params.size() != count)
      throw PreconditionError("model '" + m.family + "' takes " + std::to_string(count) +
                              " parameter(s), got '" + label + "'");
  };
  auto seed_of = [&](double v) {
    if (v < 0 || v != std::floor(v)) throw PreconditionError("seed must be a non-negative integer");
    return static_cast<std::uint64_t>(v);
  };
  if (m.family == "flat") return want(0), flat_model<N>();
  if (m.family == "hemisphere") return want(0), hemisphere_model<N>();
  if (m.family == "cap") return want(1), cap_model<N>(m.params[0]);
  if (m.family == "radial_bump") {
    want(2);
    return radial_bump_model<N>(seed_of(m.params[0]), m.params[1]);
  }
  if (m.family == "geodesic_bump") {
    want(2);
    return geodesic_bump_model<N>(seed_of(m.params[0]), m.params[1]);
  }
  if (m.family == "generic_bump") {
    want(2);
    return generic_bump_model<N>(seed_of(m.params[0]), m.params[1]);
  }
  throw PreconditionError("unknown model '" + label + "'");
}

}  // namespace hemi
