#ifndef AMNN_CLUSTERING_HPP
#define AMNN_CLUSTERING_HPP

// Density-peak clustering.
//
//   alpha_i = sum_{j != i} exp(-(d_ij / cutoff)^2)          local density
//   beta_i  = min { d_ij : j denser than i }                 delta distance
//   gamma_i = alpha_i * beta_i                               center score
//
// "j denser than i" means alpha_j > alpha_i, or alpha_j == alpha_i and j < i,
// so exactly one point (the first index of maximal density) has no denser
// neighbor; its beta is its largest distance to any other point.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "amnn/core.hpp"

namespace amnn {

struct DistanceMatrix {
  Matrix<double> d;
  std::optional<double> cutoff;

  std::size_t size() const noexcept { return d.rows(); }
};

struct DensityProfile {
  std::vector<double> alpha;
  std::vector<double> beta;
  // Nearest denser neighbor; nullopt only for the density maximum.
  std::vector<std::optional<std::size_t>> nearest_denser;
};

struct ClusterModel {
  std::vector<std::size_t> centers;
  std::vector<std::size_t> assignments;

  std::size_t cluster_count() const noexcept { return centers.size(); }
};

struct CenterPolicy {
  enum class Kind { fixed, automatic };
  Kind kind = Kind::automatic;
  std::size_t count = 1;   // fixed
  double threshold = 3.0;  // automatic: gamma > mean + threshold * std

  static CenterPolicy fixed(std::size_t g) { return {Kind::fixed, g, 3.0}; }
  static CenterPolicy automatic(double c = 3.0) { return {Kind::automatic, 1, c}; }
};

inline DistanceMatrix pairwise_distances(const Matrix<double>& features) {
  const std::size_t n = features.rows();
  require(n >= 2, "pairwise_distances: need at least two points");
  DistanceMatrix dm{Matrix<double>(n, n, 0.0), std::nullopt};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::sqrt(squared_distance(features.row(i), features.row(j)));
      dm.d(i, j) = v;
      dm.d(j, i) = v;
    }
  }
  return dm;
}

// Boundary of the largest 2% of pairwise distances: the value at 1-based
// position ceil(0.98 * M) of the M ascending off-diagonal distances.
inline double cutoff_distance(const DistanceMatrix& dm) {
  const std::size_t n = dm.size();
  std::vector<double> values;
  values.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) values.push_back(dm.d(i, j));
  }
  require(!values.empty(), "cutoff_distance: need at least two points");
  const std::size_t m = values.size();
  const std::size_t position = (98 * m + 99) / 100;  // ceil(0.98 m) without floating error
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(position - 1);
  std::nth_element(values.begin(), nth, values.end());
  double cutoff = *nth;
  if (cutoff <= 0.0) {
    // Duplicate-heavy data: fall back to the smallest positive distance.
    double smallest = std::numeric_limits<double>::infinity();
    for (double v : values) {
      if (v > 0.0) smallest = std::min(smallest, v);
    }
    require(std::isfinite(smallest), "cutoff_distance: degenerate: zero spread");
    cutoff = smallest;
  }
  return cutoff;
}

inline DistanceMatrix& with_cutoff(DistanceMatrix& dm) {
  dm.cutoff = cutoff_distance(dm);
  return dm;
}

inline std::vector<double> local_density(const DistanceMatrix& dm) {
  require(dm.cutoff.has_value(), "local_density: cutoff distance not set");
  const double lz = *dm.cutoff;
  require(lz > 0.0, "local_density: cutoff distance must be > 0");
  const std::size_t n = dm.size();
  std::vector<double> alpha(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double r = dm.d(i, j) / lz;
      sum += std::exp(-r * r);
    }
    alpha[i] = sum;
  }
  return alpha;
}

// Indices sorted by decreasing density, ties by increasing index.
inline std::vector<std::size_t> density_order(std::span<const double> alpha) {
  std::vector<std::size_t> order(alpha.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return alpha[a] > alpha[b]; });
  return order;
}

inline DensityProfile delta_distance(const DistanceMatrix& dm, std::span<const double> alpha) {
  const std::size_t n = dm.size();
  require(alpha.size() == n, "delta_distance: alpha length mismatch");
  DensityProfile p;
  p.alpha.assign(alpha.begin(), alpha.end());
  p.beta.assign(n, 0.0);
  p.nearest_denser.assign(n, std::nullopt);
  const auto order = density_order(alpha);
  for (std::size_t rank = 0; rank < n; ++rank) {
    const std::size_t i = order[rank];
    if (rank == 0) {
      double far = 0.0;
      for (std::size_t j = 0; j < n; ++j) far = std::max(far, dm.d(i, j));
      p.beta[i] = far;
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = order[0];
    for (std::size_t r = 0; r < rank; ++r) {
      const std::size_t j = order[r];
      const double v = dm.d(i, j);
      if (v < best || (v == best && j < arg)) {
        best = v;
        arg = j;
      }
    }
    p.beta[i] = best;
    p.nearest_denser[i] = arg;
  }
  return p;
}

inline std::vector<double> center_scores(std::span<const double> alpha, std::span<const double> beta) {
  require(alpha.size() == beta.size(), "center_scores: length mismatch");
  std::vector<double> gamma(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) gamma[i] = alpha[i] * beta[i];
  return gamma;
}

// Centers are returned in decreasing gamma order (ties by lower index).
inline std::vector<std::size_t> select_centers(std::span<const double> alpha, std::span<const double> beta,
                                               const CenterPolicy& policy) {
  const auto gamma = center_scores(alpha, beta);
  const std::size_t n = gamma.size();
  require(n >= 1, "select_centers: empty input");
  std::vector<std::size_t> ranked(n);
  std::iota(ranked.begin(), ranked.end(), 0);
  std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) { return gamma[a] > gamma[b]; });

  if (policy.kind == CenterPolicy::Kind::fixed) {
    require(policy.count >= 1 && policy.count <= n, "select_centers: fixed center count must be in 1..N");
    ranked.resize(policy.count);
    return ranked;
  }

  const double mean = std::accumulate(gamma.begin(), gamma.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double g : gamma) var += (g - mean) * (g - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  const double cut = mean + policy.threshold * sd;
  std::vector<std::size_t> centers;
  for (auto i : ranked) {
    if (gamma[i] > cut) centers.push_back(i);
  }
  if (centers.empty()) centers.push_back(ranked.front());
  return centers;
}

// Each center owns its cluster; every other point inherits the cluster of its
// nearest denser neighbor, visiting points in decreasing density. A
// non-center without a denser neighbor joins its nearest center.
inline std::vector<std::size_t> assign_points(const DistanceMatrix& dm, const DensityProfile& profile,
                                              std::span<const std::size_t> centers) {
  const std::size_t n = dm.size();
  require(!centers.empty(), "assign_points: no centers");
  constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> cluster(n, unset);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    require(centers[k] < n, "assign_points: center index out of range");
    cluster[centers[k]] = k;
  }
  for (std::size_t i : density_order(profile.alpha)) {
    if (cluster[i] != unset) continue;
    if (profile.nearest_denser[i]) {
      cluster[i] = cluster[*profile.nearest_denser[i]];
    } else {
      std::size_t best = 0;
      for (std::size_t k = 1; k < centers.size(); ++k) {
        if (dm.d(i, centers[k]) < dm.d(i, centers[best])) best = k;
      }
      cluster[i] = best;
    }
  }
  return cluster;
}

struct DensityPeaks {
  DistanceMatrix distances;
  DensityProfile profile;
  ClusterModel model;
};

inline DensityPeaks cluster_density_peaks(const Matrix<double>& features, const CenterPolicy& policy) {
  DensityPeaks out;
  out.distances = pairwise_distances(features);
  with_cutoff(out.distances);
  out.profile = delta_distance(out.distances, local_density(out.distances));
  out.model.centers = select_centers(out.profile.alpha, out.profile.beta, policy);
  out.model.assignments = assign_points(out.distances, out.profile, out.model.centers);
  return out;
}

// Decision graph as CSV: index,alpha,beta,gamma,is_center.
inline void write_decision_graph(const DensityProfile& profile, std::span<const std::size_t> centers,
                                 const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "write_decision_graph: cannot open '" + path + "'");
  std::vector<char> is_center(profile.alpha.size(), 0);
  for (auto c : centers) is_center.at(c) = 1;
  out << "index,alpha,beta,gamma,is_center\n";
  for (std::size_t i = 0; i < profile.alpha.size(); ++i) {
    out << i << ',' << format_double(profile.alpha[i]) << ',' << format_double(profile.beta[i]) << ','
        << format_double(profile.alpha[i] * profile.beta[i]) << ',' << int(is_center[i]) << '\n';
  }
  require(out.good(), "write_decision_graph: write failed for '" + path + "'");
}

}  // namespace amnn

#endif
