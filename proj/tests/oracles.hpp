#pragma once

// Independent cross-check implementations shared by the unit tests and the
// acceptance suite. These deliberately avoid the library's code paths:
// distances are recomputed from scratch, gains use exp/log instead of pow,
// and interference is summed in reverse order with compensation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "tddsim/channel.hpp"

namespace oracle {

inline double torus_distance_ref(double ax, double ay, double bx, double by,
                                 double side) {
  double dx = std::fabs(ax - bx);
  if (side - dx < dx) dx = side - dx;
  double dy = std::fabs(ay - by);
  if (side - dy < dy) dy = side - dy;
  return std::sqrt(dx * dx + dy * dy);
}

inline double received_w_ref(const Eigen::Vector2d& rx,
                             const tddsim::ActiveTransmitter& tx, double alpha,
                             double side) {
  const double d =
      torus_distance_ref(rx.x(), rx.y(), tx.position.x(), tx.position.y(),
                         side);
  return tx.power_w * tx.fade * std::exp(-alpha * std::log(d));
}

struct BruteSir {
  double value = 0.0;
  bool no_interference = false;
};

// Kahan-compensated interference sum taken in reverse list order.
inline BruteSir brute_sir(const Eigen::Vector2d& rx,
                          const tddsim::ActiveTransmitter& desired,
                          std::span<const tddsim::ActiveTransmitter> interferers,
                          double alpha, double side) {
  const double desired_w = received_w_ref(rx, desired, alpha, side);
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t k = interferers.size(); k-- > 0;) {
    const double term = received_w_ref(rx, interferers[k], alpha, side) - comp;
    const double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  if (sum == 0.0) {
    return {std::numeric_limits<double>::infinity(), true};
  }
  return {desired_w / sum, false};
}

// Upper chi-square quantile via the Wilson-Hilferty cube approximation.
inline double chi2_critical(int df, double z_upper) {
  const double d = static_cast<double>(df);
  const double a = 2.0 / (9.0 * d);
  const double c = 1.0 - a + z_upper * std::sqrt(a);
  return d * c * c * c;
}

struct Chi2Result {
  double statistic = 0.0;
  int df = 0;
};

// Left-to-right bin merging until every expected count reaches 5; the
// remainder folds into the last bin. df = merged bins - 1.
inline Chi2Result chi2_merged(const std::vector<double>& expected,
                              const std::vector<double>& observed) {
  std::vector<double> me;
  std::vector<double> mo;
  double e = 0.0;
  double o = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    e += expected[i];
    o += observed[i];
    if (e >= 5.0) {
      me.push_back(e);
      mo.push_back(o);
      e = 0.0;
      o = 0.0;
    }
  }
  if (!me.empty() && e > 0.0) {
    me.back() += e;
    mo.back() += o;
  }
  Chi2Result r;
  for (std::size_t i = 0; i < me.size(); ++i) {
    const double d = mo[i] - me[i];
    r.statistic += d * d / me[i];
  }
  r.df = static_cast<int>(me.size()) - 1;
  return r;
}

struct QueueWindow {
  std::int64_t window_arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t delay_sum = 0;
};

// Replays a single always-scheduled, always-successful FIFO server fed with
// the given arrival stamps (a packet stamped s is first servable in slot s),
// restricted to the [warmup, horizon) window.
inline QueueWindow replay_single_queue(const std::vector<std::int64_t>& stamps,
                                       std::int64_t warmup,
                                       std::int64_t horizon) {
  QueueWindow w;
  std::int64_t next_free = 0;
  for (std::int64_t s : stamps) {
    if (s >= warmup && s < horizon) ++w.window_arrivals;
    const std::int64_t depart = std::max(s, next_free);
    next_free = depart + 1;
    if (depart < horizon && s >= warmup) {
      ++w.delivered;
      w.delay_sum += depart - s + 1;
    }
  }
  return w;
}

}  // namespace oracle
