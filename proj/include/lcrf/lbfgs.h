// Limited-memory BFGS with a backtracking (Armijo) line search.

#ifndef LCRF_LBFGS_H_
#define LCRF_LBFGS_H_

#include <functional>
#include <span>
#include <vector>

namespace lcrf {

struct LbfgsOptions {
  int history = 10;
  int max_iterations = 200;
  // Stop when |f_prev - f| / max(1, |f|) falls below this.
  double relative_tol = 1e-6;
  // Stop when max |g_i| falls below this.
  double gradient_tol = 1e-8;
  int max_line_search = 40;
};

struct LbfgsResult {
  int iterations = 0;
  double value = 0.0;
  double gradient_max_norm = 0.0;
  bool converged = false;
};

// Evaluates f(x), writing the gradient into `gradient`.
using GradientFunction = std::function<double(std::span<const double> x, std::span<double> gradient)>;

// Minimizes f starting from x, updating x in place. Stops early (not
// converged) if the line search cannot make progress.
LbfgsResult minimize_lbfgs(const GradientFunction& f, std::vector<double>& x,
                           const LbfgsOptions& options);

}  // namespace lcrf

#endif  // LCRF_LBFGS_H_
