#include "lcrf/lbfgs.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace lcrf {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct Correction {
  std::vector<double> s;  // x_{k+1} - x_k
  std::vector<double> y;  // g_{k+1} - g_k
  double rho = 0.0;       // 1 / (y . s)
};

// Two-loop recursion: direction = -H * g.
std::vector<double> search_direction(const std::deque<Correction>& history,
                                     std::span<const double> gradient) {
  const std::size_t n = gradient.size();
  std::vector<double> q(gradient.begin(), gradient.end());
  std::vector<double> alpha(history.size());
  for (std::size_t k = history.size(); k-- > 0;) {
    const Correction& c = history[k];
    alpha[k] = c.rho * dot(c.s, q);
    for (std::size_t i = 0; i < n; ++i) q[i] -= alpha[k] * c.y[i];
  }
  if (!history.empty()) {
    const Correction& last = history.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t k = 0; k < history.size(); ++k) {
    const Correction& c = history[k];
    const double beta = c.rho * dot(c.y, q);
    for (std::size_t i = 0; i < n; ++i) q[i] += c.s[i] * (alpha[k] - beta);
  }
  for (double& v : q) v = -v;
  return q;
}

}  // namespace

LbfgsResult minimize_lbfgs(const GradientFunction& f, std::vector<double>& x,
                           const LbfgsOptions& options) {
  constexpr double kArmijo = 1e-4;
  const std::size_t n = x.size();
  std::vector<double> gradient(n);
  double value = f(x, gradient);

  LbfgsResult result;
  result.value = value;
  result.gradient_max_norm = max_abs(gradient);
  if (result.gradient_max_norm <= options.gradient_tol) {
    result.converged = true;
    return result;
  }

  std::deque<Correction> history;
  std::vector<double> next_x(n), next_gradient(n);
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    std::vector<double> direction = search_direction(history, gradient);
    double slope = dot(direction, gradient);
    if (slope >= 0.0) {
      // Not a descent direction; fall back to steepest descent.
      history.clear();
      for (std::size_t i = 0; i < n; ++i) direction[i] = -gradient[i];
      slope = dot(direction, gradient);
    }
    double step = history.empty() ? 1.0 / std::max(1.0, std::sqrt(dot(gradient, gradient))) : 1.0;

    bool accepted = false;
    double next_value = value;
    for (int trial = 0; trial < options.max_line_search; ++trial) {
      for (std::size_t i = 0; i < n; ++i) next_x[i] = x[i] + step * direction[i];
      next_value = f(next_x, next_gradient);
      if (std::isfinite(next_value) && next_value <= value + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    result.iterations = iter;
    if (!accepted) break;

    Correction c;
    c.s.resize(n);
    c.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      c.s[i] = next_x[i] - x[i];
      c.y[i] = next_gradient[i] - gradient[i];
    }
    const double ys = dot(c.y, c.s);
    if (ys > 1e-12) {
      c.rho = 1.0 / ys;
      history.push_back(std::move(c));
      if (static_cast<int>(history.size()) > options.history) history.pop_front();
    }

    const double change = std::abs(value - next_value) / std::max(1.0, std::abs(next_value));
    x.swap(next_x);
    gradient.swap(next_gradient);
    value = next_value;
    result.value = value;
    result.gradient_max_norm = max_abs(gradient);
    if (result.gradient_max_norm <= options.gradient_tol || change < options.relative_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace lcrf
