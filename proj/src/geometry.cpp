#include "tddsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tddsim/errors.hpp"

namespace tddsim {

double torus_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                      const Region& region) {
  const double side = region.side_m;
  double dx = std::abs(a.x() - b.x());
  double dy = std::abs(a.y() - b.y());
  if (dx > side - dx) dx = side - dx;
  if (dy > side - dy) dy = side - dy;
  return std::hypot(dx, dy);
}

PointSet sample_ppp(double intensity, const Region& region, NodeKind kind,
                    RandomStream& rng) {
  if (!std::isfinite(intensity) || intensity < 0.0) {
    throw ConfigError("sample_ppp: intensity must be finite and >= 0");
  }
  const double side = region.side_m;
  const std::int64_t n = rng.poisson(intensity * side * side);

  PointSet out;
  out.kind = kind;
  out.positions.resize(n, 2);
  for (std::int64_t i = 0; i < n; ++i) {
    out.positions(i, 0) = side * rng.u01();
    out.positions(i, 1) = side * rng.u01();
  }
  return out;
}

Topology associate(PointSet saps, PointSet ues, int k_s,
                   const Region& region) {
  if (k_s < 1) throw ConfigError("associate: k_s must be >= 1");
  if (saps.size() == 0) throw TopologyError("associate: no SAPs in region");

  const Eigen::Index n_sap = saps.size();
  const Eigen::Index n_ue = ues.size();

  Topology topo;
  topo.saps = std::move(saps);
  topo.ues = std::move(ues);
  topo.tagged_sap.assign(static_cast<std::size_t>(n_ue), Topology::kUnserved);
  topo.served.resize(static_cast<std::size_t>(n_sap));
  topo.n_candidates.assign(static_cast<std::size_t>(n_sap), 0);

  // Nearest SAP per UE; ties go to the smaller SAP index.
  std::vector<double> ue_dist(static_cast<std::size_t>(n_ue));
  std::vector<std::vector<std::int32_t>> candidates(
      static_cast<std::size_t>(n_sap));
  for (Eigen::Index u = 0; u < n_ue; ++u) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_s = 0;
    const Eigen::Vector2d pu = topo.ues.at(u);
    for (Eigen::Index s = 0; s < n_sap; ++s) {
      const double d = torus_distance(pu, topo.saps.at(s), region);
      if (d < best) {
        best = d;
        best_s = s;
      }
    }
    ue_dist[static_cast<std::size_t>(u)] = best;
    candidates[static_cast<std::size_t>(best_s)].push_back(
        static_cast<std::int32_t>(u));
  }

  for (Eigen::Index s = 0; s < n_sap; ++s) {
    auto& cand = candidates[static_cast<std::size_t>(s)];
    topo.n_candidates[static_cast<std::size_t>(s)] =
        static_cast<std::int32_t>(cand.size());
    if (static_cast<int>(cand.size()) > k_s) {
      // Keep the k_s nearest; equal distances resolved by smaller UE index.
      std::sort(cand.begin(), cand.end(),
                [&](std::int32_t a, std::int32_t b) {
                  const double da = ue_dist[static_cast<std::size_t>(a)];
                  const double db = ue_dist[static_cast<std::size_t>(b)];
                  if (da != db) return da < db;
                  return a < b;
                });
      cand.resize(static_cast<std::size_t>(k_s));
    }
    std::sort(cand.begin(), cand.end());
    for (std::int32_t u : cand) {
      topo.tagged_sap[static_cast<std::size_t>(u)] =
          static_cast<std::int32_t>(s);
    }
    topo.served[static_cast<std::size_t>(s)] = std::move(cand);
  }
  return topo;
}

}  // namespace tddsim
