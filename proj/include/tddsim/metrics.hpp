#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tddsim {

// Per-direction outcome of a single realization.  Fields are null when the
// realization produced no usable sample (e.g. no UE saw an arrival in the
// measurement window), and nulls stay null through aggregation.
struct DirectionMetrics {
  std::optional<double> mean_throughput;
  std::optional<double> mean_delay;
  std::optional<double> pr_empty_queue;
  int n_ues_counted = 0;          // UEs entering the throughput mean
  std::int64_t n_delivered = 0;   // packets delivered inside the window
};

struct RealizationMetrics {
  DirectionMetrics dl;
  DirectionMetrics ul;
  int resample_count = 0;  // topologies rejected for having zero SAPs
};

// Mean and symmetric 95% half-width over realizations; ci95 is null when
// fewer than two non-null samples exist.
struct Aggregate {
  std::optional<double> mean;
  std::optional<double> ci95;
  int n = 0;
};

struct DirectionSummary {
  Aggregate throughput;
  Aggregate delay;
  Aggregate empty_queue;
};

struct ExperimentSummary {
  DirectionSummary dl;
  DirectionSummary ul;
  std::int64_t resampled_topologies = 0;
  int realizations = 0;
};

// Per-UE throughput estimate: packets delivered in the window divided by the
// summed sojourn times of those packets (slots).  A UE with arrivals but no
// deliveries counts as 0; a UE with no arrivals gives no sample.
std::optional<double> ue_throughput(std::int64_t window_arrivals,
                                    std::int64_t delivered,
                                    std::int64_t sum_delay_slots);
std::optional<double> ue_throughput(std::int64_t window_arrivals,
                                    std::span<const std::int64_t> delay_slots);

// Unweighted mean over the non-null entries; null when all entries are null.
std::optional<double> network_mean(
    std::span<const std::optional<double>> values);

// Fraction of true entries; null on an empty trace.
std::optional<double> empty_queue_prob(std::span<const bool> empty_at_slot);

Aggregate aggregate_scalar(std::span<const std::optional<double>> samples);

ExperimentSummary summarize(std::span<const RealizationMetrics> realizations);

}  // namespace tddsim
