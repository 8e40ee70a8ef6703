#include "frechet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace frechet {

void SolverConfig::validate() const {
  if (max_iterations < 0) throw ArgumentError("max_iterations must be non-negative");
  if (!(gradient_tolerance > 0.0)) throw ArgumentError("gradient_tolerance must be positive");
  if (memory_pairs < 1) throw ArgumentError("memory_pairs must be positive");
  if (max_line_search_steps < 1) throw ArgumentError("max_line_search_steps must be positive");
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw ArgumentError("need 0 < c1 < c2 < 1");
}

namespace {

constexpr double kMinStepLength = 1e-10;
constexpr double kRefineSlack = 1e-3;
// Relative size of rounding noise in objective values; below it Armijo is uninformative.
constexpr double kValueNoise = 1e-12;

struct Point {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd g;
};

struct CurvaturePair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

class Evaluator {
 public:
  Evaluator(const ValueFn& value, const GradientFn& grad, Eigen::Index rows, Eigen::Index cols)
      : value_(value), grad_(grad), rows_(rows), cols_(cols) {}

  Point at(const Eigen::VectorXd& x, const Eigen::VectorXd& last_good) const {
    const DualVariables a = Eigen::Map<const DualVariables>(x.data(), rows_, cols_);
    Point p{x, value_(a), Eigen::VectorXd()};
    const DualVariables g = grad_(a);
    if (g.rows() != rows_ || g.cols() != cols_) {
      throw ArgumentError("gradient shape differs from the dual variables");
    }
    p.g = Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
    if (!std::isfinite(p.f) || !p.g.allFinite()) {
      throw NumericalError("non-finite objective or gradient", last_good);
    }
    return p;
  }

 private:
  const ValueFn& value_;
  const GradientFn& grad_;
  Eigen::Index rows_;
  Eigen::Index cols_;
};

// Minimizer of the cubic through (lo, f_lo, d_lo) and (hi, f_hi, d_hi), kept
// inside the bracket; bisects when the cubic is unusable.
double interpolate(double lo, double f_lo, double d_lo, double hi, double f_hi, double d_hi) {
  const double left = std::min(lo, hi);
  const double right = std::max(lo, hi);
  const double width = right - left;
  const double d1 = d_lo + d_hi - 3.0 * (f_lo - f_hi) / (lo - hi);
  const double disc = d1 * d1 - d_lo * d_hi;
  double alpha = 0.5 * (lo + hi);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), hi - lo);
    const double denom = d_hi - d_lo + 2.0 * d2;
    if (denom != 0.0) {
      const double candidate = hi - (hi - lo) * (d_hi + d2 - d1) / denom;
      if (std::isfinite(candidate)) alpha = candidate;
    }
  }
  const double margin = 0.05 * width;
  return std::clamp(alpha, left + margin, right - margin);
}

struct LineSearchResult {
  bool ok = false;
  Point point;
};

class LineSearch {
 public:
  LineSearch(const Evaluator& eval, const SolverConfig& cfg, const Point& start,
             const Eigen::VectorXd& dir)
      : eval_(eval), cfg_(cfg), start_(start), dir_(dir), slope0_(start.g.dot(dir)) {}

  LineSearchResult run(double alpha) {
    double prev_alpha = 0.0;
    Point prev = start_;
    double prev_slope = slope0_;
    for (int i = 0; i < cfg_.max_line_search_steps; ++i) {
      Point cur = trial(alpha);
      const double slope = cur.g.dot(dir_);
      if (approximate_wolfe(alpha, cur.f, slope)) return refine(alpha, std::move(cur), slope);
      if (!armijo(alpha, cur.f) || (i > 0 && cur.f >= prev.f)) {
        return zoom(prev_alpha, prev, prev_slope, alpha, cur, slope);
      }
      if (std::abs(slope) <= -cfg_.c2 * slope0_) return refine(alpha, std::move(cur), slope);
      if (slope >= 0.0) return zoom(alpha, cur, slope, prev_alpha, prev, prev_slope);
      prev_alpha = alpha;
      prev = std::move(cur);
      prev_slope = slope;
      alpha *= 2.0;
    }
    // Ran out of expansion steps while still descending: accept the farthest point.
    return {prev_alpha > 0.0, std::move(prev)};
  }

 private:
  Point trial(double alpha) {
    ++evaluations_;
    return eval_.at(start_.x + alpha * dir_, start_.x);
  }

  // One secant step on the directional derivative. Exact on quadratics, which
  // gives conjugate-gradient-like finite termination there.
  LineSearchResult refine(double alpha, Point cur, double slope) {
    if (std::abs(slope) <= kRefineSlack * -slope0_ || evaluations_ >= cfg_.max_line_search_steps) {
      return {true, std::move(cur)};
    }
    const double denom = slope0_ - slope;
    if (!(denom < 0.0)) return {true, std::move(cur)};
    const double step = alpha * slope0_ / denom;
    if (!std::isfinite(step) || step <= 0.0) return {true, std::move(cur)};
    Point better = trial(step);
    const double s = better.g.dot(dir_);
    if (armijo(step, better.f) && better.f <= cur.f && std::abs(s) <= -cfg_.c2 * slope0_) {
      return {true, std::move(better)};
    }
    return {true, std::move(cur)};
  }

  // Near the optimum value differences drown in rounding; accept on the
  // curvature condition alone as long as f has not risen beyond the noise.
  bool approximate_wolfe(double alpha, double f, double slope) const {
    const double noise = kValueNoise * std::max(1.0, std::abs(start_.f));
    return -alpha * slope0_ <= 100.0 * noise && f <= start_.f + noise &&
           std::abs(slope) <= -cfg_.c2 * slope0_;
  }

  bool armijo(double alpha, double f) const {
    return f <= start_.f + cfg_.c1 * alpha * slope0_;
  }

  // lo always satisfies sufficient decrease and has the lowest value seen.
  LineSearchResult zoom(double lo, Point p_lo, double s_lo, double hi, Point p_hi, double s_hi) {
    const double dir_norm = dir_.lpNorm<Eigen::Infinity>();
    while (evaluations_ < cfg_.max_line_search_steps) {
      if (std::abs(hi - lo) * dir_norm < kMinStepLength) break;
      const double alpha = interpolate(lo, p_lo.f, s_lo, hi, p_hi.f, s_hi);
      Point cur = trial(alpha);
      const double slope = cur.g.dot(dir_);
      if (approximate_wolfe(alpha, cur.f, slope)) return refine(alpha, std::move(cur), slope);
      if (!armijo(alpha, cur.f) || cur.f >= p_lo.f) {
        hi = alpha;
        p_hi = std::move(cur);
        s_hi = slope;
        continue;
      }
      if (std::abs(slope) <= -cfg_.c2 * slope0_) return refine(alpha, std::move(cur), slope);
      if (slope * (hi - lo) >= 0.0) {
        hi = lo;
        p_hi = p_lo;
        s_hi = s_lo;
      }
      lo = alpha;
      p_lo = std::move(cur);
      s_lo = slope;
    }
    // Curvature condition not met: keep the best sufficient-decrease point, if any.
    return {lo > 0.0, std::move(p_lo)};
  }

  const Evaluator& eval_;
  const SolverConfig& cfg_;
  const Point& start_;
  const Eigen::VectorXd& dir_;
  double slope0_;
  int evaluations_ = 0;
};

Eigen::VectorXd two_loop(const std::deque<CurvaturePair>& memory, const Eigen::VectorXd& g) {
  Eigen::VectorXd q = g;
  std::vector<double> alphas(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    alphas[k] = memory[k].rho * memory[k].s.dot(q);
    q -= alphas[k] * memory[k].y;
  }
  const auto& last = memory.back();
  q *= last.s.dot(last.y) / last.y.squaredNorm();
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const double beta = memory[k].rho * memory[k].y.dot(q);
    q += (alphas[k] - beta) * memory[k].s;
  }
  return -q;
}

}  // namespace

std::pair<DualVariables, SolveReport> minimize(const ValueFn& value, const GradientFn& grad,
                                               const DualVariables& a0, const SolverConfig& cfg) {
  cfg.validate();
  if (!a0.allFinite()) throw ArgumentError("initial dual variables must be finite");
  const Eigen::Index rows = a0.rows();
  const Eigen::Index cols = a0.cols();
  const Evaluator eval(value, grad, rows, cols);

  const Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(a0.data(), a0.size());
  Point cur = eval.at(x0, x0);
  std::deque<CurvaturePair> memory;

  SolveReport report;
  int iter = 0;
  for (; iter < cfg.max_iterations; ++iter) {
    const double gnorm = cur.g.lpNorm<Eigen::Infinity>();
    if (gnorm <= cfg.gradient_tolerance) break;

    Eigen::VectorXd dir;
    double alpha = 1.0;
    if (!memory.empty()) dir = two_loop(memory, cur.g);
    if (memory.empty() || !(dir.dot(cur.g) < 0.0)) {
      memory.clear();
      dir = -cur.g;
      alpha = std::min(1.0, 1.0 / gnorm);
    }

    LineSearch search(eval, cfg, cur, dir);
    LineSearchResult step = search.run(alpha);
    if (!step.ok) break;  // stagnation

    Eigen::VectorXd s = step.point.x - cur.x;
    Eigen::VectorXd y = step.point.g - cur.g;
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm() && sy > 0.0) {
      memory.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(memory.size()) > cfg.memory_pairs) memory.pop_front();
    }
    cur = std::move(step.point);
  }

  DualVariables a = Eigen::Map<const DualVariables>(cur.x.data(), rows, cols);
  report.iterations = iter;
  report.final_gradient_norm = cur.g.size() > 0 ? cur.g.lpNorm<Eigen::Infinity>() : 0.0;
  report.converged = report.final_gradient_norm <= cfg.gradient_tolerance;
  report.penalty_residual = penalty_residual(a);
  report.optimizer_sup_norm = a.size() > 0 ? a.lpNorm<Eigen::Infinity>() : 0.0;
  report.final_value = cur.f;
  return {std::move(a), report};
}

}  // namespace frechet
