#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "tddsim/rng.hpp"

namespace tddsim {

/// Square simulation region with wrap-around (torus) boundaries.
struct Region {
  double side_m = 1600.0;
};

enum class NodeKind { Sap, Ue };

/// A set of planar node positions, one row per node, in meters.
struct PointSet {
  Eigen::Matrix<double, Eigen::Dynamic, 2> positions;
  NodeKind kind = NodeKind::Sap;

  Eigen::Index size() const { return positions.rows(); }
  Eigen::Vector2d at(Eigen::Index i) const {
    return positions.row(i).transpose();
  }
};

/// Sampled layout plus the nearest-SAP association, capped at k_s UEs per SAP.
struct Topology {
  static constexpr std::int32_t kUnserved = -1;

  PointSet saps;
  PointSet ues;
  // Per UE: index of its serving SAP, or kUnserved.
  std::vector<std::int32_t> tagged_sap;
  // Per SAP: served UE indices (ascending), at most k_s of them.
  std::vector<std::vector<std::int32_t>> served;
  // Per SAP: number of UEs whose nearest SAP it is, before the cap.
  std::vector<std::int32_t> n_candidates;

  std::int64_t served_count() const {
    std::int64_t n = 0;
    for (const auto& s : served) n += static_cast<std::int64_t>(s.size());
    return n;
  }
};

/// Torus (wrap-around) Euclidean distance between two points of the region.
double torus_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                      const Region& region);

/// Draws a homogeneous PPP of the given intensity (points per m^2) on the
/// region: Poisson count with mean intensity * side^2, positions i.i.d.
/// uniform. Throws ConfigError on a negative or non-finite intensity.
PointSet sample_ppp(double intensity, const Region& region, NodeKind kind,
                    RandomStream& rng);

/// Associates every UE with its nearest SAP under the torus metric and keeps
/// at most k_s UEs per SAP (the nearest ones; ties broken by smaller index).
/// UEs beyond the cap are marked unserved. Throws TopologyError when saps is
/// empty and ConfigError when k_s < 1.
Topology associate(PointSet saps, PointSet ues, int k_s, const Region& region);

}  // namespace tddsim
