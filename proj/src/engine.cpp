#include "tddsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "tddsim/channel.hpp"
#include "tddsim/errors.hpp"

namespace tddsim {

namespace {

// Stream key layout behind the (master_seed, realization, purpose, entity)
// derivation rule. UE entities are offset so they can never collide with SAP
// indices under the same purpose; the network-wide entity sits above both.
constexpr std::uint64_t kTopoPurpose = 1;
constexpr std::uint64_t kArrivalPurpose = 2;
constexpr std::uint64_t kSelectionPurpose = 3;
constexpr std::uint64_t kDirectionPurpose = 4;
constexpr std::uint64_t kFadingPurpose = 5;
constexpr std::uint64_t kUeEntity = std::uint64_t(1) << 32;
constexpr std::uint64_t kNetworkEntity = std::uint64_t(1) << 40;

constexpr int kMaxTopologyAttempts = 1000;

int dir_index(Direction d) { return static_cast<int>(d); }

}  // namespace

RealizationState make_realization_state(const SimConfig& cfg, Topology topo,
                                        std::uint64_t realization) {
  RealizationState st;
  st.region = Region{cfg.side_m};
  st.topo = std::move(topo);

  const auto n_saps = static_cast<std::int32_t>(st.topo.saps.size());
  st.sap_links.resize(static_cast<std::size_t>(n_saps));
  for (std::int32_t s = 0; s < n_saps; ++s) {
    const auto begin = static_cast<std::int32_t>(st.links.size());
    for (std::int32_t ue : st.topo.served[static_cast<std::size_t>(s)]) {
      LinkState link;
      link.sap = s;
      link.ue = ue;
      link.ue_node = n_saps + static_cast<std::int32_t>(st.links.size());
      st.links.push_back(link);
    }
    st.sap_links[static_cast<std::size_t>(s)] = {
        begin, static_cast<std::int32_t>(st.links.size())};
  }

  const auto n_links = static_cast<std::int32_t>(st.links.size());
  const std::int32_t n_nodes = n_saps + n_links;
  Eigen::Matrix<double, Eigen::Dynamic, 2> pos(n_nodes, 2);
  for (std::int32_t s = 0; s < n_saps; ++s) {
    pos.row(s) = st.topo.saps.positions.row(s);
  }
  for (std::int32_t l = 0; l < n_links; ++l) {
    pos.row(n_saps + l) =
        st.topo.ues.positions.row(st.links[static_cast<std::size_t>(l)].ue);
  }
  st.gain.setZero(n_nodes, n_nodes);
  for (std::int32_t i = 0; i < n_nodes; ++i) {
    const Eigen::Vector2d a = pos.row(i).transpose();
    for (std::int32_t j = i + 1; j < n_nodes; ++j) {
      const Eigen::Vector2d b = pos.row(j).transpose();
      const double g =
          path_gain(torus_distance(a, b, st.region), cfg.alpha);
      st.gain(i, j) = g;
      st.gain(j, i) = g;
    }
  }

  const std::uint64_t ms = cfg.master_seed;
  st.stdd_stream = RandomStream(
      derive_seed(ms, {realization, kDirectionPurpose, kNetworkEntity}));
  st.arrival_streams.reserve(static_cast<std::size_t>(n_links));
  st.fading_streams.reserve(static_cast<std::size_t>(n_links));
  for (const LinkState& link : st.links) {
    const std::uint64_t ue = kUeEntity + static_cast<std::uint64_t>(link.ue);
    st.arrival_streams.emplace_back(
        derive_seed(ms, {realization, kArrivalPurpose, ue}));
    st.fading_streams.emplace_back(
        derive_seed(ms, {realization, kFadingPurpose, ue}));
  }
  st.selection_streams.reserve(static_cast<std::size_t>(n_saps));
  for (std::int32_t s = 0; s < n_saps; ++s) {
    st.selection_streams.emplace_back(derive_seed(
        ms, {realization, kSelectionPurpose, static_cast<std::uint64_t>(s)}));
  }
  if (cfg.scheme == Scheme::DtddFixed) {
    st.direction_streams.reserve(static_cast<std::size_t>(n_saps));
    for (std::int32_t s = 0; s < n_saps; ++s) {
      st.direction_streams.emplace_back(derive_seed(
          ms,
          {realization, kDirectionPurpose, static_cast<std::uint64_t>(s)}));
    }
  } else if (cfg.scheme == Scheme::DtddMwu) {
    st.direction_streams.reserve(static_cast<std::size_t>(n_links));
    for (const LinkState& link : st.links) {
      const std::uint64_t ue = kUeEntity + static_cast<std::uint64_t>(link.ue);
      st.direction_streams.emplace_back(
          derive_seed(ms, {realization, kDirectionPurpose, ue}));
    }
  }

  st.selected.assign(static_cast<std::size_t>(n_saps), -1);
  st.selected_dir.assign(static_cast<std::size_t>(n_saps),
                         Direction::Downlink);
  st.active.reserve(static_cast<std::size_t>(n_saps));
  st.active_dir.reserve(static_cast<std::size_t>(n_saps));
  st.active_qlen.reserve(static_cast<std::size_t>(n_saps));
  st.fades.setZero(n_saps, n_saps);  // only the leading AxA block is used
  return st;
}

SlotOutcome run_slot(RealizationState& st, const SimConfig& cfg) {
  SlotOutcome out;
  out.slot = st.slot;
  const std::int64_t t = st.slot;
  const double theta = cfg.theta_linear();
  const double p_sap = cfg.p_sap_w();
  const double p_ue = cfg.p_ue_w();
  const auto n_saps = static_cast<std::int32_t>(st.sap_links.size());

  // Queue-occupancy sampling at slot start, inside the window only.
  if (t >= cfg.warmup) {
    for (LinkState& link : st.links) {
      link.empty_obs[0] += link.dl_queue.empty() ? 1 : 0;
      link.empty_obs[1] += link.ul_queue.empty() ? 1 : 0;
      ++link.observed_slots;
    }
  }

  // Per-SAP uniform UE selection; SAPs without served UEs idle and draw
  // nothing.
  for (std::int32_t s = 0; s < n_saps; ++s) {
    const auto [begin, end] = st.sap_links[static_cast<std::size_t>(s)];
    if (begin == end) {
      st.selected[static_cast<std::size_t>(s)] = -1;
      continue;
    }
    const std::size_t offset =
        st.selection_streams[static_cast<std::size_t>(s)].uniform_index(
            static_cast<std::size_t>(end - begin));
    st.selected[static_cast<std::size_t>(s)] =
        begin + static_cast<std::int32_t>(offset);
  }

  // Direction decision, then activation (transmit iff the decided queue is
  // backlogged).
  st.active.clear();
  st.active_dir.clear();
  st.active_qlen.clear();
  Direction global_dir = Direction::Downlink;
  if (cfg.scheme == Scheme::Stdd) {
    global_dir = stdd_direction(cfg.eta_s, st.stdd_stream);
  }
  for (std::int32_t s = 0; s < n_saps; ++s) {
    const std::int32_t l = st.selected[static_cast<std::size_t>(s)];
    if (l < 0) continue;
    LinkState& link = st.links[static_cast<std::size_t>(l)];
    Direction dir = global_dir;
    if (cfg.scheme == Scheme::DtddFixed) {
      dir = dtdd_fixed_direction(
          cfg.eta_d, st.direction_streams[static_cast<std::size_t>(s)]);
    } else if (cfg.scheme == Scheme::DtddMwu) {
      dir = mwu_direction(link.weights,
                          st.direction_streams[static_cast<std::size_t>(l)])
                .first;
    }
    st.selected_dir[static_cast<std::size_t>(s)] = dir;
    const PacketQueue& q = link.queue(dir);
    if (!q.empty()) {
      st.active.push_back(l);
      st.active_dir.push_back(dir);
      st.active_qlen.push_back(q.size());
    }
  }

  // Fresh per-link fades: one row per active receiver, drawn from that
  // link's fading stream across all active transmitters (diagonal = desired
  // path).
  const auto n_active = static_cast<std::int32_t>(st.active.size());
  for (std::int32_t i = 0; i < n_active; ++i) {
    RandomStream& stream =
        st.fading_streams[static_cast<std::size_t>(st.active[i])];
    for (std::int32_t j = 0; j < n_active; ++j) {
      st.fades(i, j) = stream.exponential();
    }
  }

  // Joint SIR evaluation over the active-set snapshot. Terms accumulate in
  // ascending active order with the same expression shape as compute_sir so
  // the two code paths agree bit for bit.
  out.links.reserve(static_cast<std::size_t>(n_active));
  for (std::int32_t i = 0; i < n_active; ++i) {
    const auto l = static_cast<std::size_t>(st.active[i]);
    const Direction dir = st.active_dir[static_cast<std::size_t>(i)];
    const bool downlink = dir == Direction::Downlink;
    const std::int32_t rx_node = downlink ? st.links[l].ue_node : st.links[l].sap;
    const std::int32_t tx_node = downlink ? st.links[l].sap : st.links[l].ue_node;
    const double desired_w =
        (downlink ? p_sap : p_ue) * st.fades(i, i) * st.gain(rx_node, tx_node);
    double interference_w = 0.0;
    for (std::int32_t j = 0; j < n_active; ++j) {
      if (j == i) continue;
      const auto m = static_cast<std::size_t>(st.active[j]);
      const bool j_downlink =
          st.active_dir[static_cast<std::size_t>(j)] == Direction::Downlink;
      const std::int32_t txj = j_downlink ? st.links[m].sap : st.links[m].ue_node;
      // UE interferers at a SAP receiver optionally take the SAP power, which
      // reproduces the literal printed UL denominators.
      const double pj =
          j_downlink ? p_sap
                     : (cfg.literal_eq3_powers && !downlink ? p_sap : p_ue);
      interference_w += pj * st.fades(i, j) * st.gain(rx_node, txj);
    }
    LinkOutcome lo;
    lo.link = st.active[i];
    lo.direction = dir;
    lo.sir = interference_w > 0.0
                 ? desired_w / interference_w
                 : std::numeric_limits<double>::infinity();
    lo.success = interference_w == 0.0 || lo.sir >= theta;
    out.links.push_back(lo);
  }

  // ACK: head departs and its delay is recorded if it arrived inside the
  // window. NACK: head stays for retransmission.
  for (std::size_t i = 0; i < out.links.size(); ++i) {
    const LinkOutcome& lo = out.links[i];
    if (!lo.success) continue;
    LinkState& link = st.links[static_cast<std::size_t>(lo.link)];
    PacketQueue& q = link.queue(lo.direction);
    const std::int64_t stamp = q.head_arrival_slot();
    const std::int64_t delay = q.complete_head(t);
    if (stamp >= cfg.warmup) {
      const int d = dir_index(lo.direction);
      link.delivered[d] += 1;
      link.delay_sum[d] += delay;
    }
  }

  // MWU: every selected UE updates its chosen direction's weight. An empty
  // decided queue means no transmission and a penalty of exactly theta.
  if (cfg.scheme == Scheme::DtddMwu) {
    std::size_t cursor = 0;
    for (std::int32_t s = 0; s < n_saps; ++s) {
      const std::int32_t l = st.selected[static_cast<std::size_t>(s)];
      if (l < 0) continue;
      const Direction dir = st.selected_dir[static_cast<std::size_t>(s)];
      double gamma = 0.0;
      std::int64_t q_at_decision = 0;
      if (cursor < st.active.size() && st.active[cursor] == l) {
        gamma = out.links[cursor].sir;
        q_at_decision = st.active_qlen[cursor];
        ++cursor;
      }
      const double m = penalty(theta, gamma, q_at_decision, cfg.eta_sharp);
      mwu_update(st.links[static_cast<std::size_t>(l)].weights, dir, m,
                 cfg.delta, cfg.rho);
    }
  }

  // End-of-slot arrivals, stamped with the first slot that can serve them.
  // Per link: DL draw, then UL draw.
  const std::int64_t stamp = t + 1;
  const bool in_window = stamp >= cfg.warmup && stamp < cfg.horizon;
  for (std::size_t l = 0; l < st.links.size(); ++l) {
    LinkState& link = st.links[l];
    RandomStream& rng = st.arrival_streams[l];
    if (maybe_arrive(link.dl_queue, cfg.xi_dl, stamp, rng) && in_window) {
      link.window_arrivals[0] += 1;
    }
    if (maybe_arrive(link.ul_queue, cfg.xi_ul, stamp, rng) && in_window) {
      link.window_arrivals[1] += 1;
    }
  }

  ++st.slot;
  return out;
}

RealizationMetrics collect_metrics(const RealizationState& st,
                                   const SimConfig& cfg) {
  RealizationMetrics out;
  for (int d = 0; d < 2; ++d) {
    std::vector<std::optional<double>> thr;
    std::vector<std::optional<double>> dly;
    std::vector<std::optional<double>> prq;
    thr.reserve(st.links.size());
    dly.reserve(st.links.size());
    prq.reserve(st.links.size());
    DirectionMetrics dm;
    for (const LinkState& link : st.links) {
      std::optional<double> v = ue_throughput(link.window_arrivals[d],
                                              link.delivered[d],
                                              link.delay_sum[d]);
      if (!v && cfg.count_idle_as_zero) v = 0.0;
      if (v) ++dm.n_ues_counted;
      thr.push_back(v);
      dly.push_back(link.delivered[d] > 0
                        ? std::optional<double>(
                              static_cast<double>(link.delay_sum[d]) /
                              static_cast<double>(link.delivered[d]))
                        : std::nullopt);
      prq.push_back(link.observed_slots > 0
                        ? std::optional<double>(
                              static_cast<double>(link.empty_obs[d]) /
                              static_cast<double>(link.observed_slots))
                        : std::nullopt);
      dm.n_delivered += link.delivered[d];
    }
    dm.mean_throughput = network_mean(thr);
    dm.mean_delay = network_mean(dly);
    dm.pr_empty_queue = network_mean(prq);
    (d == 0 ? out.dl : out.ul) = dm;
  }
  return out;
}

namespace {

Topology sample_topology(const SimConfig& cfg, std::uint64_t realization,
                         int& resamples) {
  const Region region{cfg.side_m};
  for (int attempt = 0; attempt < kMaxTopologyAttempts; ++attempt) {
    RandomStream rng(derive_seed(
        cfg.master_seed,
        {realization, kTopoPurpose, static_cast<std::uint64_t>(attempt)}));
    PointSet saps = sample_ppp(cfg.lambda_s, region, NodeKind::Sap, rng);
    if (saps.size() == 0) {
      ++resamples;
      continue;
    }
    PointSet ues = sample_ppp(cfg.lambda_u, region, NodeKind::Ue, rng);
    return associate(saps, ues, cfg.k_s, region);
  }
  throw TopologyError("no SAPs sampled after " +
                      std::to_string(kMaxTopologyAttempts) +
                      " attempts; raise lambda_s or side_m");
}

RealizationMetrics run_to_horizon(const SimConfig& cfg, Topology topo,
                                  std::uint64_t realization,
                                  const SlotHook* hook) {
  RealizationState st = make_realization_state(cfg, std::move(topo),
                                               realization);
  for (std::int64_t t = 0; t < cfg.horizon; ++t) {
    const SlotOutcome out = run_slot(st, cfg);
    if (hook != nullptr && *hook) (*hook)(st, out);
  }
  for (const LinkState& link : st.links) {
    if (!link.dl_queue.conserved() || !link.ul_queue.conserved()) {
      throw std::logic_error("packet conservation violated in realization " +
                             std::to_string(realization));
    }
  }
  return collect_metrics(st, cfg);
}

}  // namespace

RealizationMetrics run_realization(const SimConfig& cfg,
                                   std::uint64_t realization) {
  int resamples = 0;
  Topology topo = sample_topology(cfg, realization, resamples);
  RealizationMetrics m =
      run_to_horizon(cfg, std::move(topo), realization, nullptr);
  m.resample_count = resamples;
  return m;
}

RealizationMetrics run_realization(const SimConfig& cfg, Topology topo,
                                   std::uint64_t realization,
                                   const SlotHook& hook) {
  return run_to_horizon(cfg, std::move(topo), realization, &hook);
}

ExperimentSummary run_experiment(const SimConfig& cfg, int n_threads) {
  std::vector<RealizationMetrics> results(
      static_cast<std::size_t>(cfg.realizations));
  const int workers = std::max(1, std::min(n_threads, cfg.realizations));
  if (workers == 1) {
    for (int i = 0; i < cfg.realizations; ++i) {
      results[static_cast<std::size_t>(i)] =
          run_realization(cfg, static_cast<std::uint64_t>(i));
    }
  } else {
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= cfg.realizations) return;
          try {
            results[static_cast<std::size_t>(i)] =
                run_realization(cfg, static_cast<std::uint64_t>(i));
          } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            return;
          }
        }
      });
    }
    for (std::thread& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  return summarize(results);
}

}  // namespace tddsim
