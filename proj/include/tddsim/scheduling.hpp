#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>

#include "tddsim/rng.hpp"

namespace tddsim {

enum class Direction { Downlink, Uplink };

enum class Scheme { Stdd, DtddFixed, DtddMwu };

/// Per-UE pair of direction weights, held at the UE's tagged SAP. Both start
/// at 1; only the ratio matters for decisions, so the pair is renormalized to
/// sum 2 after each update to keep it floating-point safe over long horizons.
template <class Real = double>
struct MwuState {
  Real w_ul = Real(1);
  Real w_dl = Real(1);
};

/// One network-wide draw per slot: every SAP transmits DL with probability
/// eta_s this slot, UL otherwise.
inline Direction stdd_direction(double eta_s, RandomStream& rng) {
  return rng.bernoulli(eta_s) ? Direction::Downlink : Direction::Uplink;
}

/// Independent per-SAP draw: DL with probability eta_d.
inline Direction dtdd_fixed_direction(double eta_d, RandomStream& rng) {
  return rng.bernoulli(eta_d) ? Direction::Downlink : Direction::Uplink;
}

/// Uniform pick among the SAP's served UEs. Callers must skip SAPs with an
/// empty served list (they idle the slot).
inline std::int32_t select_ue(std::span<const std::int32_t> served,
                              RandomStream& rng) {
  return served[rng.uniform_index(served.size())];
}

/// DL transmission probability implied by the weights: w_dl / (w_ul + w_dl).
template <class Real>
Real mwu_eta(const MwuState<Real>& state) {
  return state.w_dl / (state.w_ul + state.w_dl);
}

/// Draws the slot direction from the current weights and reports the
/// probability that was used.
template <class Real>
std::pair<Direction, Real> mwu_direction(const MwuState<Real>& state,
                                         RandomStream& rng) {
  const Real eta_now = mwu_eta(state);
  const Direction dir = rng.bernoulli(static_cast<double>(eta_now))
                            ? Direction::Downlink
                            : Direction::Uplink;
  return {dir, eta_now};
}

/// Penalty of a direction decision: theta - gamma * (1 - e^(-eta_sharp * Q)).
/// At Q = 0 the gamma term vanishes analytically, so the result is exactly
/// theta and no SIR measurement is needed. A no-interference slot
/// (gamma = +inf) with backlog maps to the most negative representable
/// penalty; the update clamps it to -rho.
inline double penalty(double theta, double gamma, std::int64_t q_len,
                      double eta_sharp) {
  if (q_len == 0) return theta;
  const double backlog_term =
      -std::expm1(-eta_sharp * static_cast<double>(q_len));
  const double m = theta - gamma * backlog_term;
  if (std::isnan(m) || m == -std::numeric_limits<double>::infinity()) {
    return std::numeric_limits<double>::lowest();
  }
  return m;
}

/// Multiplicative update of the chosen direction's weight:
///   w *= (1 - delta)^(m/rho)   if m >= 0
///   w *= (1 + delta)^(-m/rho)  if m <  0
/// with m clamped to [-rho, rho] first. The other weight is untouched; the
/// pair is then rescaled to sum 2 (ratio-preserving) unless `renormalize` is
/// off, which exists for the invariance cross-check.
template <class Real>
void mwu_update(MwuState<Real>& state, Direction dir, Real m, Real delta,
                Real rho, bool renormalize = true) {
  const Real mc = std::clamp(m, -rho, rho);
  const Real factor = mc >= Real(0) ? std::pow(Real(1) - delta, mc / rho)
                                    : std::pow(Real(1) + delta, -mc / rho);
  if (dir == Direction::Uplink) {
    state.w_ul *= factor;
  } else {
    state.w_dl *= factor;
  }
  if (renormalize) {
    const Real scale = Real(2) / (state.w_ul + state.w_dl);
    state.w_ul *= scale;
    state.w_dl *= scale;
  }
}

}  // namespace tddsim
