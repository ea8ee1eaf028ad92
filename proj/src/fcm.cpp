#include "iotguard/fcm.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "iotguard/errors.hpp"

namespace iotguard {

std::vector<int> ClusterModel::hard_assignment() const {
  std::vector<int> assignment(memberships.cols(), 0);
  for (std::size_t j = 0; j < memberships.cols(); ++j) {
    int best = 0;
    double best_mu = memberships(0, j);
    for (int i = 1; i < c; ++i) {
      const double mu = memberships(static_cast<std::size_t>(i), j);
      if (mu > best_mu) {
        best_mu = mu;
        best = i;
      }
    }
    assignment[j] = best;
  }
  return assignment;
}

Matrix initial_membership(int c, std::size_t n, Rng& rng) {
  if (c < 1) throw ParameterError("cluster count must be >= 1");
  Matrix mu(static_cast<std::size_t>(c), n);
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (int i = 0; i < c; ++i) {
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      const double g = -std::log(u);  // Exp(1): uniform over the simplex
      mu(static_cast<std::size_t>(i), j) = g;
      sum += g;
    }
    for (int i = 0; i < c; ++i) mu(static_cast<std::size_t>(i), j) /= sum;
  }
  return mu;
}

namespace {

void validate_data(const Matrix& data) {
  if (data.rows() == 0 || data.cols() == 0) throw DataError("empty data matrix");
  for (const double v : data.data())
    if (!std::isfinite(v)) throw DataError("data matrix contains non-finite values");
}

void validate_config(const FcmConfig& config) {
  if (config.m <= 1.0) throw ParameterError("fuzziness index m must be > 1");
  if (config.tol <= 0.0) throw ParameterError("convergence tolerance must be > 0");
  if (config.max_iters < 1) throw ParameterError("max_iters must be >= 1");
  if (config.restarts < 1) throw ParameterError("restarts must be >= 1");
}

}  // namespace

ClusterModel fcm_fit_from(const Matrix& data, Matrix initial, const FcmConfig& config) {
  validate_data(data);
  validate_config(config);
  const std::size_t n = data.rows();
  const std::size_t h = data.cols();
  if (initial.cols() != n) throw ParameterError("initial membership has wrong column count");
  const int c = static_cast<int>(initial.rows());
  if (c < 1 || static_cast<std::size_t>(c) > n)
    throw ParameterError("cluster count must satisfy 1 <= c <= n");

  ClusterModel model;
  model.c = c;
  model.m = config.m;
  model.memberships = std::move(initial);
  model.centers = Matrix(static_cast<std::size_t>(c), h);

  const double exponent = 2.0 / (config.m - 1.0);
  const bool m_is_two = config.m == 2.0;
  const auto mu_pow_m = [&](double mu) { return m_is_two ? mu * mu : std::pow(mu, config.m); };
  std::vector<double> dist(static_cast<std::size_t>(c));
  std::vector<double> inv(static_cast<std::size_t>(c));
  std::vector<double> weight_sum(static_cast<std::size_t>(c));
  double prev_objective = std::numeric_limits<double>::quiet_NaN();

  for (int iter = 0; iter < config.max_iters; ++iter) {
    // centers from the current memberships
    std::fill(weight_sum.begin(), weight_sum.end(), 0.0);
    Matrix next_centers(static_cast<std::size_t>(c), h);
    for (std::size_t j = 0; j < n; ++j) {
      const auto x = data.row(j);
      for (int i = 0; i < c; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        const double w = mu_pow_m(model.memberships(ii, j));
        weight_sum[ii] += w;
        for (std::size_t k = 0; k < h; ++k) next_centers(ii, k) += w * x[k];
      }
    }
    for (int i = 0; i < c; ++i) {
      const std::size_t ii = static_cast<std::size_t>(i);
      if (weight_sum[ii] > 0.0) {
        for (std::size_t k = 0; k < h; ++k)
          model.centers(ii, k) = next_centers(ii, k) / weight_sum[ii];
      }
      // a cluster with zero total weight keeps its previous center
    }

    // memberships from the new centers, objective on the fly
    double objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto x = data.row(j);
      int zero_at = -1;
      for (int i = 0; i < c; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        dist[ii] = squared_euclidean(model.centers.row(ii), x);
        if (dist[ii] == 0.0 && zero_at < 0) zero_at = i;
      }
      if (zero_at >= 0) {
        // point sits exactly on a center: crisp membership there
        for (int i = 0; i < c; ++i)
          model.memberships(static_cast<std::size_t>(i), j) = i == zero_at ? 1.0 : 0.0;
      } else {
        double inv_sum = 0.0;
        for (int i = 0; i < c; ++i) {
          const std::size_t ii = static_cast<std::size_t>(i);
          // (1 / d_ij^2)^(1/(m-1)), written via the squared distance
          inv[ii] = m_is_two ? 1.0 / dist[ii] : std::pow(dist[ii], -exponent / 2.0);
          inv_sum += inv[ii];
        }
        double row_sum = 0.0;
        for (int i = 0; i < c; ++i) {
          const std::size_t ii = static_cast<std::size_t>(i);
          const double mu = inv[ii] / inv_sum;
          model.memberships(ii, j) = mu;
          row_sum += mu;
        }
        model.max_membership_sum_error =
            std::max(model.max_membership_sum_error, std::abs(row_sum - 1.0));
      }
      for (int i = 0; i < c; ++i) {
        const std::size_t ii = static_cast<std::size_t>(i);
        objective += mu_pow_m(model.memberships(ii, j)) * dist[ii];
      }
    }

    model.objective = objective;
    model.objective_trace.push_back(objective);
    if (iter > 0 && std::abs(objective - prev_objective) < config.tol) break;
    prev_objective = objective;
  }
  return model;
}

ClusterModel fcm_fit(const Matrix& data, int c, const FcmConfig& config) {
  validate_data(data);
  validate_config(config);
  if (c < 1 || static_cast<std::size_t>(c) > data.rows())
    throw ParameterError("cluster count must satisfy 1 <= c <= n");

  ClusterModel best;
  bool have_best = false;
  for (int r = 0; r < config.restarts; ++r) {
    Rng rng(Rng::derive(config.seed, static_cast<std::uint64_t>(r)));
    auto model = fcm_fit_from(data, initial_membership(c, data.rows(), rng), config);
    if (!have_best || model.objective < best.objective) {
      best = std::move(model);
      have_best = true;
    }
  }
  return best;
}

double wcsd(const ClusterModel& model, const Matrix& data) {
  const auto hard = model.hard_assignment();
  double total = 0.0;
  for (std::size_t j = 0; j < data.rows(); ++j) {
    const auto center = model.centers.row(static_cast<std::size_t>(hard[j]));
    const auto x = data.row(j);
    for (std::size_t k = 0; k < data.cols(); ++k) total += std::abs(center[k] - x[k]);
  }
  return total;
}

double fpc(const ClusterModel& model) {
  const std::size_t n = model.memberships.cols();
  if (n == 0) throw DataError("fpc of an empty model");
  double sum = 0.0;
  for (const double mu : model.memberships.data()) sum += mu * mu;
  return sum / static_cast<double>(n);
}

SilhouetteResult silhouette(const Matrix& data, const std::vector<int>& hard_labels) {
  if (hard_labels.size() != data.rows())
    throw ParameterError("labels/row count mismatch");
  const std::size_t n = data.rows();

  int max_label = -1;
  for (const int l : hard_labels) max_label = std::max(max_label, l);
  const std::size_t groups = static_cast<std::size_t>(max_label + 1);
  std::vector<std::size_t> sizes(groups, 0);
  for (const int l : hard_labels) {
    if (l < 0) throw ParameterError("negative cluster label");
    ++sizes[static_cast<std::size_t>(l)];
  }
  std::size_t non_empty = 0;
  for (const auto s : sizes)
    if (s > 0) ++non_empty;
  if (non_empty < 2)
    throw ParameterError("silhouette needs at least 2 non-empty clusters");

  SilhouetteResult result;
  result.values.resize(n, 0.0);
  std::vector<double> mean_dist(groups);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      if (t == j) continue;
      mean_dist[static_cast<std::size_t>(hard_labels[t])] +=
          euclidean(data.row(j), data.row(t));
    }
    const std::size_t own = static_cast<std::size_t>(hard_labels[j]);
    if (sizes[own] <= 1) {
      result.values[j] = 0.0;  // singleton convention
      continue;
    }
    const double a = mean_dist[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < groups; ++g) {
      if (g == own || sizes[g] == 0) continue;
      b = std::min(b, mean_dist[g] / static_cast<double>(sizes[g]));
    }
    const double denom = std::max(a, b);
    result.values[j] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  double sum = 0.0;
  for (const double s : result.values) sum += s;
  result.mean = sum / static_cast<double>(n);
  return result;
}

Selection select_c(const Matrix& data, const std::vector<int>& candidates,
                   const FcmConfig& config, int select_max_iters) {
  validate_data(data);
  if (candidates.empty()) throw ParameterError("candidate range is empty");
  for (const int c : candidates) {
    if (c < 2 || static_cast<std::size_t>(c) + 1 > data.rows())
      throw ParameterError("candidate cluster counts must lie in [2, n-1]");
  }

  FcmConfig run_config = config;
  run_config.max_iters = select_max_iters;

  struct Scored {
    CandidateScore score;
    ClusterModel model;
  };
  const auto score_candidate = [&](int c) {
    FcmConfig candidate_config = run_config;
    candidate_config.seed = Rng::derive(config.seed, 1000 + static_cast<std::uint64_t>(c));
    Scored result;
    result.model = fcm_fit(data, c, candidate_config);
    result.score.c = c;
    result.score.objective = result.model.objective;
    result.score.wcsd = wcsd(result.model, data);
    result.score.fpc = fpc(result.model);
    // a degenerate fit can leave fewer than 2 non-empty hard clusters; score
    // it with the worst possible silhouette instead of failing the sweep
    try {
      result.score.mean_silhouette = silhouette(data, result.model.hard_assignment()).mean;
    } catch (const ParameterError&) {
      result.score.mean_silhouette = -1.0;
    }
    return result;
  };

  std::vector<Scored> scored(candidates.size());
  {
    std::vector<std::future<Scored>> futures;
    futures.reserve(candidates.size());
    for (const int c : candidates)
      futures.push_back(std::async(std::launch::async, score_candidate, c));
    for (std::size_t i = 0; i < futures.size(); ++i) scored[i] = futures[i].get();
  }

  Selection selection;
  selection.table.reserve(candidates.size());
  for (const auto& s : scored) selection.table.push_back(s.score);

  // maximum mean silhouette; ties by minimum WCSD, then smallest c
  std::size_t best = 0;
  for (std::size_t i = 1; i < scored.size(); ++i) {
    const auto& score = scored[i].score;
    const auto& incumbent = scored[best].score;
    if (score.mean_silhouette > incumbent.mean_silhouette ||
        (score.mean_silhouette == incumbent.mean_silhouette &&
         (score.wcsd < incumbent.wcsd ||
          (score.wcsd == incumbent.wcsd && score.c < incumbent.c)))) {
      best = i;
    }
  }
  selection.best_c = scored[best].score.c;
  selection.best_model = std::move(scored[best].model);
  return selection;
}

void label_clusters(ClusterModel& model, const std::vector<TrafficClass>& labels) {
  if (labels.size() != model.memberships.cols())
    throw ParameterError("labels/point count mismatch");
  const auto hard = model.hard_assignment();
  model.labels.assign(static_cast<std::size_t>(model.c), TrafficClass::Normal);
  for (int i = 0; i < model.c; ++i) {
    std::array<long, kClassCount> votes{};
    long members = 0;
    for (std::size_t j = 0; j < hard.size(); ++j) {
      if (hard[j] == i) {
        ++votes[static_cast<std::size_t>(class_code(labels[j]))];
        ++members;
      }
    }
    int winner = 0;
    if (members > 0) {
      for (int k = 1; k < kClassCount; ++k)
        if (votes[static_cast<std::size_t>(k)] > votes[static_cast<std::size_t>(winner)])
          winner = k;
    } else {
      // no hard members: fall back to the largest summed soft membership
      std::array<double, kClassCount> mass{};
      for (std::size_t j = 0; j < hard.size(); ++j)
        mass[static_cast<std::size_t>(class_code(labels[j]))] +=
            model.memberships(static_cast<std::size_t>(i), j);
      for (int k = 1; k < kClassCount; ++k)
        if (mass[static_cast<std::size_t>(k)] > mass[static_cast<std::size_t>(winner)])
          winner = k;
    }
    model.labels[static_cast<std::size_t>(i)] = class_from_code(winner);
  }
}

}  // namespace iotguard
