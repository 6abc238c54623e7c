#ifndef AMNN_GATING_HPP
#define AMNN_GATING_HPP

// Fuzzy membership of samples to cluster centers,
//   g[k][i] = exp(-||u_i - z_k||^2 / denom),
// and hard routing of each sample to the subnet of its strongest membership.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "amnn/core.hpp"

namespace amnn {

inline constexpr double kDefaultMembershipDenom = 0.02;

struct MembershipMatrix {
  Matrix<double> g;      // G x N
  Matrix<double> log_g;  // -||u_i - z_k||^2 / denom, kept for underflow-free routing
  double denom = kDefaultMembershipDenom;

  std::size_t centers() const noexcept { return g.rows(); }
  std::size_t samples() const noexcept { return g.cols(); }
};

// Memberships that underflow are clamped to the smallest normal double so
// every entry stays strictly positive.
inline MembershipMatrix fuzzy_membership(const Matrix<double>& features, const Matrix<double>& center_points,
                                         double denom = kDefaultMembershipDenom) {
  require(center_points.rows() >= 1, "fuzzy_membership: no centers");
  require(denom > 0.0 && std::isfinite(denom), "fuzzy_membership: denom must be > 0");
  require(center_points.cols() == features.cols(), "fuzzy_membership: center/feature width mismatch");
  const std::size_t g_count = center_points.rows();
  const std::size_t n = features.rows();
  MembershipMatrix m{Matrix<double>(g_count, n), Matrix<double>(g_count, n), denom};
  for (std::size_t k = 0; k < g_count; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double lg = -squared_distance(features.row(i), center_points.row(k)) / denom;
      m.log_g(k, i) = lg;
      m.g(k, i) = std::max(std::exp(lg), std::numeric_limits<double>::min());
    }
  }
  return m;
}

// Argmax over rows of a G x N membership table; ties go to the lower index.
inline std::vector<std::size_t> route(const Matrix<double>& g) {
  require(g.rows() >= 1, "route: no centers");
  std::vector<std::size_t> out(g.cols(), 0);
  for (std::size_t i = 0; i < g.cols(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < g.rows(); ++k) {
      if (g(k, i) > g(best, i)) best = k;
    }
    out[i] = best;
  }
  return out;
}

inline std::vector<std::size_t> route(const MembershipMatrix& m) { return route(m.log_g); }

inline std::vector<std::size_t> subnet_sizes(std::span<const std::size_t> routes, std::size_t g_count) {
  std::vector<std::size_t> sizes(g_count, 0);
  for (auto r : routes) ++sizes.at(r);
  return sizes;
}

// Centers that attract no sample are dropped; returns the surviving center
// rows and the routing recomputed over them.
struct Routing {
  Matrix<double> centers;
  std::vector<std::size_t> kept;  // indices into the original center list
  std::vector<std::size_t> routes;
};

inline Routing route_with_pruning(const Matrix<double>& features, const Matrix<double>& center_points,
                                  double denom = kDefaultMembershipDenom) {
  require(features.rows() >= 1, "route_with_pruning: no samples");
  Routing r{center_points, {}, route(fuzzy_membership(features, center_points, denom))};
  for (std::size_t k = 0; k < center_points.rows(); ++k) r.kept.push_back(k);
  for (;;) {
    const auto sizes = subnet_sizes(r.routes, r.centers.rows());
    std::vector<std::size_t> alive;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      if (sizes[k] > 0) alive.push_back(k);
    }
    if (alive.size() == r.centers.rows()) return r;
    std::vector<std::size_t> kept;
    for (auto k : alive) kept.push_back(r.kept[k]);
    r.centers = r.centers.select_rows(alive);
    r.kept = std::move(kept);
    r.routes = route(fuzzy_membership(features, r.centers, denom));
  }
}

}  // namespace amnn

#endif
