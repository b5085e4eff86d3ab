#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radnet/errors.hpp"

namespace radnet {

// Edge flow functions g mapping flow to potential drop across the edge.
//
//   linear_multi:     g(f) = sum_i c_i * f_i        (one coefficient per commodity;
//                                                    a power line uses c = (2r, 2x))
//   quadratic_boost:  g(f) = alpha * f|f| + beta    (pipe friction plus compressor boost)
//   power_law:        g(f) = alpha * f|f|^(gamma-1) + beta
//
// All families are strictly increasing in the flow, which is what the
// variance-ordering results downstream rely on.
enum class FlowFamily { linear_multi, quadratic_boost, power_law };

inline const char* to_string(FlowFamily f) {
  switch (f) {
    case FlowFamily::linear_multi: return "linear-multi";
    case FlowFamily::quadratic_boost: return "quadratic-boost";
    case FlowFamily::power_law: return "power-law";
  }
  return "?";
}

using FlowVec = std::vector<double>;

struct FlowFunctionSpec {
  FlowFamily family = FlowFamily::linear_multi;
  std::vector<double> coeff;  // linear_multi only, one entry per commodity
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 2.0;  // power_law exponent

  std::size_t commodities() const noexcept {
    return family == FlowFamily::linear_multi ? coeff.size() : 1;
  }

  static FlowFunctionSpec linear(std::vector<double> c);
  static FlowFunctionSpec quadratic(double alpha, double beta = 0.0);
  static FlowFunctionSpec power(double alpha, double gamma, double beta = 0.0);
};

// Construction invariants: alpha > 0, gamma >= 1, linear coefficients
// nonnegative with at least one positive. Throws InvalidSpec.
inline void validate_spec(const FlowFunctionSpec& spec) {
  switch (spec.family) {
    case FlowFamily::linear_multi: {
      if (spec.coeff.empty())
        throw InvalidSpec("linear-multi spec needs at least one coefficient");
      bool any_positive = false;
      for (double c : spec.coeff) {
        if (c < 0.0) throw InvalidSpec("linear-multi coefficients must be >= 0");
        if (c > 0.0) any_positive = true;
      }
      if (!any_positive) throw InvalidSpec("linear-multi spec needs a positive coefficient");
      return;
    }
    case FlowFamily::quadratic_boost:
      if (!(spec.alpha > 0.0)) throw InvalidSpec("quadratic-boost alpha must be > 0");
      return;
    case FlowFamily::power_law:
      if (!(spec.alpha > 0.0)) throw InvalidSpec("power-law alpha must be > 0");
      if (!(spec.gamma >= 1.0)) throw InvalidSpec("power-law exponent must be >= 1");
      return;
  }
  throw InvalidSpec("unknown flow family");
}

inline FlowFunctionSpec FlowFunctionSpec::linear(std::vector<double> c) {
  FlowFunctionSpec spec;
  spec.family = FlowFamily::linear_multi;
  spec.coeff = std::move(c);
  validate_spec(spec);
  return spec;
}

inline FlowFunctionSpec FlowFunctionSpec::quadratic(double alpha, double beta) {
  FlowFunctionSpec spec;
  spec.family = FlowFamily::quadratic_boost;
  spec.alpha = alpha;
  spec.beta = beta;
  validate_spec(spec);
  return spec;
}

inline FlowFunctionSpec FlowFunctionSpec::power(double alpha, double gamma, double beta) {
  FlowFunctionSpec spec;
  spec.family = FlowFamily::power_law;
  spec.alpha = alpha;
  spec.gamma = gamma;
  spec.beta = beta;
  validate_spec(spec);
  return spec;
}

// Single-commodity fast path; `spec` must not be multi-commodity linear.
inline double eval_g1(const FlowFunctionSpec& spec, double f) noexcept {
  switch (spec.family) {
    case FlowFamily::linear_multi:
      return spec.coeff[0] * f;
    case FlowFamily::quadratic_boost:
      return spec.alpha * f * std::fabs(f) + spec.beta;
    case FlowFamily::power_law:
      if (spec.gamma == 2.0) return spec.alpha * f * std::fabs(f) + spec.beta;
      return spec.alpha * f * std::pow(std::fabs(f), spec.gamma - 1.0) + spec.beta;
  }
  return 0.0;
}

inline double eval_g(const FlowFunctionSpec& spec, std::span<const double> f) {
  if (f.size() != spec.commodities())
    throw DimensionMismatch("flow vector has " + std::to_string(f.size()) +
                            " commodities, spec expects " + std::to_string(spec.commodities()));
  if (spec.family == FlowFamily::linear_multi) {
    double drop = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) drop += spec.coeff[i] * f[i];
    return drop;
  }
  return eval_g1(spec, f[0]);
}

// Bisection fallback for monotone drop functions without a closed-form
// inverse. The bracket grows geometrically from [-1, 1] until it straddles
// `drop`.
inline double invert_bisect(const std::function<double(double)>& g, double drop,
                            double tol = 1e-12) {
  double lo = -1.0, hi = 1.0;
  for (int grow = 0; g(lo) > drop; ++grow) {
    if (grow > 200) throw NotInvertible("bisection bracket failed to straddle the drop");
    lo *= 2.0;
  }
  for (int grow = 0; g(hi) < drop; ++grow) {
    if (grow > 200) throw NotInvertible("bisection bracket failed to straddle the drop");
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > tol * std::max(1.0, std::fabs(hi) + std::fabs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < drop ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Unique f with eval_g(spec, {f}) == drop. Closed form for all three
// families; multi-commodity linear is one equation in several unknowns and
// throws NotInvertible.
inline double invert_g(const FlowFunctionSpec& spec, double drop) {
  switch (spec.family) {
    case FlowFamily::linear_multi: {
      if (spec.coeff.size() != 1)
        throw NotInvertible("linear-multi with " + std::to_string(spec.coeff.size()) +
                            " commodities cannot be inverted from one potential drop");
      return drop / spec.coeff[0];
    }
    case FlowFamily::quadratic_boost: {
      const double d = drop - spec.beta;
      return std::copysign(std::sqrt(std::fabs(d) / spec.alpha), d);
    }
    case FlowFamily::power_law: {
      const double d = drop - spec.beta;
      return std::copysign(std::pow(std::fabs(d) / spec.alpha, 1.0 / spec.gamma), d);
    }
  }
  throw NotInvertible("unknown flow family");
}

struct MonotoneReport {
  bool monotone = false;
  // On failure, two flow vectors f1 < f2 (componentwise in one commodity)
  // whose drops are not increasing.
  std::optional<std::pair<FlowVec, FlowVec>> witness;
};

// Strict monotonicity per commodity, decided from the parameters. On failure
// a witness pair is located by scanning a small grid along the offending
// commodity.
inline MonotoneReport is_monotone(const FlowFunctionSpec& spec) {
  const auto grid_witness = [&](std::size_t commodity) -> std::pair<FlowVec, FlowVec> {
    FlowVec base(spec.commodities(), 0.0);
    for (double lo = -2.0; lo < 2.0; lo += 0.5) {
      FlowVec f1 = base, f2 = base;
      f1[commodity] = lo;
      f2[commodity] = lo + 0.5;
      if (!(eval_g(spec, f1) < eval_g(spec, f2))) return {f1, f2};
    }
    // Analytic detection said non-monotone; the grid must contain a pair.
    return {base, base};
  };

  MonotoneReport report;
  switch (spec.family) {
    case FlowFamily::linear_multi:
      for (std::size_t i = 0; i < spec.coeff.size(); ++i) {
        if (!(spec.coeff[i] > 0.0)) {
          report.witness = grid_witness(i);
          return report;
        }
      }
      report.monotone = !spec.coeff.empty();
      if (!report.monotone) report.witness = {{FlowVec{}, FlowVec{}}};
      return report;
    case FlowFamily::quadratic_boost:
      report.monotone = spec.alpha > 0.0;
      break;
    case FlowFamily::power_law:
      report.monotone = spec.alpha > 0.0 && spec.gamma > 0.0;
      break;
  }
  if (!report.monotone) report.witness = grid_witness(0);
  return report;
}

}  // namespace radnet
