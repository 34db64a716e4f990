#pragma once

#include <cassert>
#include <cstdint>
#include <deque>

#include "tddsim/rng.hpp"

namespace tddsim {

struct Packet {
  std::int64_t arrival_slot = 0;
};

/// Per-direction Bernoulli arrival rates, packets per slot.
struct TrafficRates {
  double xi_ul = 0.05;
  double xi_dl = 0.10;
};

/// Infinite FIFO packet buffer for one link direction. Tracks the counters
/// behind the throughput estimator: arrivals, deliveries and summed delays.
/// Conservation (arrivals == delivered + backlog) holds at every slot
/// boundary.
class PacketQueue {
 public:
  void push_arrival(std::int64_t slot) {
    packets_.push_back(Packet{slot});
    ++total_arrivals_;
  }

  /// Removes the head packet, delivered in `slot`. Returns its delay,
  /// counted inclusively: departure - arrival + 1.
  std::int64_t complete_head(std::int64_t slot) {
    assert(!packets_.empty() && "complete_head on empty queue");
    const std::int64_t delay = slot - packets_.front().arrival_slot + 1;
    packets_.pop_front();
    ++total_delivered_;
    sum_delivered_delay_ += delay;
    return delay;
  }

  std::int64_t head_arrival_slot() const {
    assert(!packets_.empty());
    return packets_.front().arrival_slot;
  }

  bool empty() const { return packets_.empty(); }
  std::int64_t size() const {
    return static_cast<std::int64_t>(packets_.size());
  }

  std::int64_t total_arrivals() const { return total_arrivals_; }
  std::int64_t total_delivered() const { return total_delivered_; }
  std::int64_t sum_delivered_delay() const { return sum_delivered_delay_; }

  bool conserved() const {
    return total_arrivals_ == total_delivered_ + size();
  }

 private:
  std::deque<Packet> packets_;
  std::int64_t total_arrivals_ = 0;
  std::int64_t total_delivered_ = 0;
  std::int64_t sum_delivered_delay_ = 0;
};

/// Bernoulli arrival: with probability `rate` appends one packet stamped
/// `slot`. Returns whether an arrival happened.
inline bool maybe_arrive(PacketQueue& queue, double rate, std::int64_t slot,
                         RandomStream& rng) {
  if (rng.bernoulli(rate)) {
    queue.push_arrival(slot);
    return true;
  }
  return false;
}

inline std::int64_t queue_len(const PacketQueue& queue) { return queue.size(); }

}  // namespace tddsim
