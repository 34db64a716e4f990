#include "tddsim/metrics.hpp"

#include <cmath>
#include <numeric>

namespace tddsim {

std::optional<double> ue_throughput(std::int64_t window_arrivals,
                                    std::int64_t delivered,
                                    std::int64_t sum_delay_slots) {
  if (delivered > 0) {
    return static_cast<double>(delivered) /
           static_cast<double>(sum_delay_slots);
  }
  if (window_arrivals > 0) return 0.0;  // backlogged all window
  return std::nullopt;                  // never engaged
}

std::optional<double> ue_throughput(
    std::int64_t window_arrivals, std::span<const std::int64_t> delay_slots) {
  const std::int64_t sum =
      std::accumulate(delay_slots.begin(), delay_slots.end(), std::int64_t{0});
  return ue_throughput(window_arrivals,
                       static_cast<std::int64_t>(delay_slots.size()), sum);
}

std::optional<double> network_mean(
    std::span<const std::optional<double>> values) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::optional<double> empty_queue_prob(std::span<const bool> empty_at_slot) {
  if (empty_at_slot.empty()) return std::nullopt;
  std::int64_t hits = 0;
  for (bool e : empty_at_slot) hits += e ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(empty_at_slot.size());
}

Aggregate aggregate_scalar(std::span<const std::optional<double>> samples) {
  Aggregate out;
  double sum = 0.0;
  for (const auto& s : samples) {
    if (s) {
      sum += *s;
      ++out.n;
    }
  }
  if (out.n == 0) return out;
  const double mean = sum / out.n;
  out.mean = mean;
  if (out.n >= 2) {
    double ss = 0.0;
    for (const auto& s : samples) {
      if (s) {
        const double d = *s - mean;
        ss += d * d;
      }
    }
    const double sd = std::sqrt(ss / (out.n - 1));
    out.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(out.n));
  }
  return out;
}

namespace {

Aggregate aggregate_field(std::span<const RealizationMetrics> rs,
                          std::optional<double> DirectionMetrics::* field,
                          DirectionMetrics RealizationMetrics::* dir) {
  std::vector<std::optional<double>> samples;
  samples.reserve(rs.size());
  for (const auto& r : rs) samples.push_back(r.*dir.*field);
  return aggregate_scalar(samples);
}

}  // namespace

ExperimentSummary summarize(std::span<const RealizationMetrics> realizations) {
  ExperimentSummary out;
  out.realizations = static_cast<int>(realizations.size());
  for (const auto& r : realizations) out.resampled_topologies += r.resample_count;

  using DM = DirectionMetrics;
  using RM = RealizationMetrics;
  out.dl.throughput = aggregate_field(realizations, &DM::mean_throughput, &RM::dl);
  out.dl.delay = aggregate_field(realizations, &DM::mean_delay, &RM::dl);
  out.dl.empty_queue = aggregate_field(realizations, &DM::pr_empty_queue, &RM::dl);
  out.ul.throughput = aggregate_field(realizations, &DM::mean_throughput, &RM::ul);
  out.ul.delay = aggregate_field(realizations, &DM::mean_delay, &RM::ul);
  out.ul.empty_queue = aggregate_field(realizations, &DM::pr_empty_queue, &RM::ul);
  return out;
}

}  // namespace tddsim
