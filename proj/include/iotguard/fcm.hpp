#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "iotguard/matrix.hpp"
#include "iotguard/rng.hpp"
#include "iotguard/types.hpp"

namespace iotguard {

struct FcmConfig {
  double m = 2.0;        // fuzziness index, > 1
  int max_iters = 300;   // 3000 inside select_c
  double tol = 1e-8;     // convergence threshold on |delta J_m|
  int restarts = 10;     // random initializations, lowest J_m wins
  std::uint64_t seed = 0;
};

struct ClusterQuality {
  double wcsd = 0.0;
  double fpc = 0.0;
  double mean_silhouette = 0.0;
};

/// A fitted fuzzy C-means model. `memberships` is c x n with columns summing
/// to 1; `centers` is c x h. `labels` is filled by label_clusters once the
/// semi-supervised step has run.
struct ClusterModel {
  int c = 0;
  double m = 2.0;
  Matrix centers;      // c x h
  Matrix memberships;  // c x n
  double objective = 0.0;
  std::vector<TrafficClass> labels;  // per cluster, empty until labeled
  ClusterQuality quality;

  // Fit diagnostics (not serialized): objective after each iteration and the
  // largest |column sum - 1| seen over all iterations.
  std::vector<double> objective_trace;
  double max_membership_sum_error = 0.0;

  /// argmax membership per point; ties go to the lowest cluster index.
  std::vector<int> hard_assignment() const;
};

/// Random membership matrix, uniform over the simplex per column
/// (normalized unit-exponential draws).
Matrix initial_membership(int c, std::size_t n, Rng& rng);

/// Single alternating-optimization run from a given initial membership.
/// Each iteration recomputes centers from memberships, then memberships
/// from centers; points coinciding with a center get crisp membership in
/// the lowest such cluster. Stops when |delta J_m| < tol or at max_iters.
ClusterModel fcm_fit_from(const Matrix& data, Matrix initial, const FcmConfig& config);

/// Best of `restarts` seeded runs by lowest J_m (ties: earliest restart).
ClusterModel fcm_fit(const Matrix& data, int c, const FcmConfig& config);

/// Within-cluster sum of distances over hard assignments: for each cluster,
/// the coordinate-wise absolute differences between members and the cluster
/// center, summed over all coordinates.
double wcsd(const ClusterModel& model, const Matrix& data);

/// Fuzzy partition coefficient (1/n) * sum of squared memberships: 1 for a
/// crisp partition, 1/c for a maximally fuzzy one.
double fpc(const ClusterModel& model);

struct SilhouetteResult {
  std::vector<double> values;
  double mean = 0.0;
};

/// Silhouette s(x) = (b - a) / max(a, b) with Euclidean distances; a is the
/// mean intra-cluster distance excluding x, b the smallest mean distance to
/// another cluster. Singleton-cluster points and degenerate a = b = 0 points
/// score 0. Fewer than 2 non-empty clusters is a ParameterError.
SilhouetteResult silhouette(const Matrix& data, const std::vector<int>& hard_labels);

struct CandidateScore {
  int c = 0;
  double objective = 0.0;
  double wcsd = 0.0;
  double fpc = 0.0;
  double mean_silhouette = 0.0;
};

struct Selection {
  int best_c = 0;
  std::vector<CandidateScore> table;
  ClusterModel best_model;  // the winning candidate's fit, unlabeled
};

/// Fits every candidate cluster count (max_iters raised to
/// select_max_iters) and records WCSD, FPC and mean silhouette. The winner
/// maximizes mean silhouette, with ties broken by minimum WCSD and then by
/// the smallest c. Candidates must lie in [2, n-1].
Selection select_c(const Matrix& data, const std::vector<int>& candidates,
                   const FcmConfig& config, int select_max_iters = 3000);

/// Labels each cluster by the majority ground-truth class of its hard
/// members (ties: lowest class code). A cluster without hard members falls
/// back to the class with the largest summed membership.
void label_clusters(ClusterModel& model, const std::vector<TrafficClass>& labels);

}  // namespace iotguard
