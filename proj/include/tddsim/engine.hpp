#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tddsim/config.hpp"
#include "tddsim/geometry.hpp"
#include "tddsim/metrics.hpp"
#include "tddsim/rng.hpp"
#include "tddsim/scheduling.hpp"
#include "tddsim/traffic.hpp"

namespace tddsim {

struct LinkOutcome {
  std::int32_t link = -1;  // index into RealizationState::links
  Direction direction = Direction::Downlink;
  double sir = 0.0;        // +inf when no co-slot interference
  bool success = false;
};

// Attempted transmissions of one slot, in ascending link order.
struct SlotOutcome {
  std::int64_t slot = 0;
  std::vector<LinkOutcome> links;
};

// One served (SAP, UE) pair with its two queues and window accumulators.
// Direction-indexed arrays use static_cast<int>(Direction).
struct LinkState {
  std::int32_t sap = -1;      // SAP index == node index in the gain cache
  std::int32_t ue = -1;       // global UE index
  std::int32_t ue_node = -1;  // UE node index in the gain cache
  PacketQueue dl_queue;       // held at the SAP
  PacketQueue ul_queue;       // held at the UE
  MwuState<double> weights;

  std::int64_t window_arrivals[2] = {0, 0};
  std::int64_t delivered[2] = {0, 0};
  std::int64_t delay_sum[2] = {0, 0};
  std::int64_t empty_obs[2] = {0, 0};  // queue empty at slot start
  std::int64_t observed_slots = 0;

  PacketQueue& queue(Direction d) {
    return d == Direction::Downlink ? dl_queue : ul_queue;
  }
  const PacketQueue& queue(Direction d) const {
    return d == Direction::Downlink ? dl_queue : ul_queue;
  }
};

// Mutable state of one realization. Per-slot scratch stays valid until the
// next run_slot call so tests can cross-check the SIR inputs.
struct RealizationState {
  Region region;
  Topology topo;
  std::vector<LinkState> links;  // SAP-major, UE-ascending within a SAP
  std::vector<std::pair<std::int32_t, std::int32_t>> sap_links;  // [begin,end)
  Eigen::MatrixXd gain;  // node-pair path gains; nodes = SAPs then link UEs
  std::int64_t slot = 0;

  // Entity streams, derived from (master_seed, realization, purpose, entity).
  RandomStream stdd_stream{0};
  std::vector<RandomStream> arrival_streams;    // per link, keyed by UE
  std::vector<RandomStream> selection_streams;  // per SAP
  std::vector<RandomStream> direction_streams;  // per SAP or per link UE
  std::vector<RandomStream> fading_streams;     // per link (receiver side)

  // Per-slot scratch.
  std::vector<std::int32_t> selected;   // per SAP: link id, -1 when none
  std::vector<Direction> selected_dir;  // per SAP, valid where selected >= 0
  std::vector<std::int32_t> active;     // link ids, ascending
  std::vector<Direction> active_dir;
  std::vector<std::int64_t> active_qlen;  // queue length at decision
  Eigen::MatrixXd fades;  // row = active receiver link, col = active tx link
};

// Builds engine state over a fixed topology: flattens the served lists into
// links, caches the node-pair gain matrix, and seeds all entity streams.
// Throws DegenerateGeometryError if any two nodes coincide.
RealizationState make_realization_state(const SimConfig& cfg, Topology topo,
                                        std::uint64_t realization);

// Advances one slot: Pr(Q=0) sampling, per-SAP selection, direction decision,
// activation, joint SIR evaluation, ACK/NACK, MWU updates, end-of-slot
// arrivals (stamped slot+1, the first slot they can be served).
SlotOutcome run_slot(RealizationState& state, const SimConfig& cfg);

// Window metrics from the accumulated link counters.
RealizationMetrics collect_metrics(const RealizationState& state,
                                   const SimConfig& cfg);

// Samples a topology (resampling on zero SAPs with the next derived seed) and
// runs the full horizon. Deterministic function of (cfg, realization).
RealizationMetrics run_realization(const SimConfig& cfg,
                                   std::uint64_t realization);

// Test variant: fixed topology plus an end-of-slot observer.
using SlotHook =
    std::function<void(const RealizationState&, const SlotOutcome&)>;
RealizationMetrics run_realization(const SimConfig& cfg, Topology topo,
                                   std::uint64_t realization,
                                   const SlotHook& hook);

// Runs cfg.realizations independent realizations (optionally on n_threads
// workers) and aggregates. Results are independent of the thread count.
ExperimentSummary run_experiment(const SimConfig& cfg, int n_threads = 1);

}  // namespace tddsim
