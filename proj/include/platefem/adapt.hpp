#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "platefem/assembly.hpp"
#include "platefem/estimator.hpp"
#include "platefem/model.hpp"

namespace platefem {

struct MarkingParams {
  double theta = 0.5;

  MarkingParams() = default;
  explicit MarkingParams(double t) : theta(t) {
    if (!(theta > 0.0 && theta < 1.0))
      throw std::invalid_argument("marking: theta must lie in the open interval (0,1)");
  }
};

/// Maximum-criterion marking: K is marked iff eta_K >= theta * max eta.
/// Ties at the threshold are marked; at least one element always is.
inline std::vector<int> mark(const std::vector<double>& eta_K, MarkingParams params) {
  if (eta_K.empty()) throw std::invalid_argument("mark: no elements");
  double max_eta = 0.0;
  for (double v : eta_K) max_eta = std::max(max_eta, v);
  const double threshold = params.theta * max_eta;
  std::vector<int> marked;
  for (std::size_t i = 0; i < eta_K.size(); ++i)
    if (eta_K[i] >= threshold) marked.push_back(static_cast<int>(i));
  return marked;
}

inline std::vector<int> mark(const std::vector<double>& eta_K, double theta) {
  return mark(eta_K, MarkingParams(theta));
}

struct ConvergenceRecord {
  int step = 0;
  long ndofs = 0;
  int nelems = 0;
  double eta = 0.0;
  std::optional<double> energy_error;
};

enum class RefinementStrategy { uniform, adaptive };

inline const char* to_string(RefinementStrategy s) {
  return s == RefinementStrategy::uniform ? "uniform" : "adaptive";
}

struct StudyConfig {
  RefinementStrategy strategy = RefinementStrategy::uniform;
  MarkingParams marking{};
  long max_dofs = 3000;
  int max_steps = 64;

  void validate() const {
    if (max_dofs <= 0) throw std::invalid_argument("study: max_dofs must be positive");
    if (max_steps <= 0) throw std::invalid_argument("study: max_steps must be positive");
  }
};

/// Optional per-step callback; receives the solved problem state so callers
/// can export fields without re-solving.
using StepObserver = std::function<void(int step, const PlateProblem&, const Solution&,
                                        const EstimatorReport&)>;
/// Optional energy-error metric recorded alongside eta (point-load oracle).
using ErrorMetric = std::function<double(const Solution&)>;

struct StudyResult {
  std::vector<ConvergenceRecord> records;
  std::string error;  // nonempty when the study aborted with partial records
  bool ok() const { return error.empty(); }
};

/// Solve-estimate-mark-refine loop. The initial mesh is always recorded;
/// refinement continues while the next mesh stays within max_dofs. Solver or
/// estimator failures abort the loop and return the partial records together
/// with the error text.
inline StudyResult run_study(const PlateProblem& problem, const StudyConfig& config,
                             const ErrorMetric& metric = {}, const StepObserver& observer = {}) {
  config.validate();
  StudyResult result;
  std::shared_ptr<const Mesh> mesh = problem.mesh;
  for (int step = 0; step < config.max_steps; ++step) {
    try {
      const PlateProblem p(mesh, problem.material, problem.loads, problem.allow_unconstrained);
      const Solution sol = solve(p);
      const EstimatorReport rep = global_estimate(sol, p);
      ConvergenceRecord rec;
      rec.step = step;
      rec.ndofs = mesh_statistics(*mesh).N;
      rec.nelems = mesh->n_triangles();
      rec.eta = rep.eta;
      if (metric) rec.energy_error = metric(sol);
      result.records.push_back(rec);
      if (observer) observer(step, p, sol, rep);

      Mesh next = config.strategy == RefinementStrategy::uniform
                      ? refine_uniform_red(*mesh)
                      : refine_marked(*mesh, mark(rep.eta_K, config.marking));
      if (mesh_statistics(next).N > config.max_dofs) break;
      mesh = std::make_shared<const Mesh>(std::move(next));
    } catch (const std::exception& e) {
      result.error = e.what();
      if (result.records.empty()) throw;
      break;
    }
  }
  return result;
}

/// Least-squares slope of log(value) against log(N) over the last `window`
/// intervals (window + 1 records).
inline double rate_estimate(const std::vector<std::pair<double, double>>& points, int window) {
  if (points.size() < 2) throw std::invalid_argument("rate_estimate: need at least two records");
  if (window < 1) throw std::invalid_argument("rate_estimate: window must be >= 1");
  const int n = std::min<int>(window + 1, static_cast<int>(points.size()));
  const int begin = static_cast<int>(points.size()) - n;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = begin; i < static_cast<int>(points.size()); ++i) {
    if (!(points[i].first > 0.0 && points[i].second > 0.0))
      throw std::invalid_argument("rate_estimate: records must be positive");
    const double x = std::log(points[i].first);
    const double y = std::log(points[i].second);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / denom;
}

inline double eta_rate(const std::vector<ConvergenceRecord>& records, int window = 2) {
  std::vector<std::pair<double, double>> pts;
  for (const ConvergenceRecord& r : records)
    pts.emplace_back(static_cast<double>(r.ndofs), r.eta);
  return rate_estimate(pts, window);
}

inline double energy_rate(const std::vector<ConvergenceRecord>& records, int window = 2) {
  std::vector<std::pair<double, double>> pts;
  for (const ConvergenceRecord& r : records)
    if (r.energy_error) pts.emplace_back(static_cast<double>(r.ndofs), *r.energy_error);
  return rate_estimate(pts, window);
}

}  // namespace platefem
