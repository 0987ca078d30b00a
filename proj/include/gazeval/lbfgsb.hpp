#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace gazeval {

/// Stopping rules and limits. Defaults follow the usual L-BFGS-B settings:
/// stop when the relative reduction
///   (f_k - f_{k+1}) / max(|f_k|, |f_{k+1}|, 1) <= ftol
/// or when the largest projected-gradient component is <= pgtol.
struct LbfgsbOptions {
    int memory = 10;
    double ftol = 1e-7;
    double pgtol = 1e-5;
    std::size_t max_evaluations = 15000;
    std::size_t max_iterations = 15000;
    int max_line_search = 20;
};

/// Box-constrained objective. `evaluations` counts every function value the
/// objective has computed, including those spent on gradients.
class BoxObjective {
public:
    virtual ~BoxObjective() = default;
    virtual double value(const Eigen::VectorXd& x) = 0;
    virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x, double fx) = 0;
    virtual std::size_t evaluations() const = 0;
};

enum class StopReason { Ftol, Pgtol, MaxIterations, MaxEvaluations, LineSearchFailure };

std::string_view to_string(StopReason r) noexcept;

struct IterationRecord {
    std::size_t iteration = 0;
    double objective = 0.0;
    double projected_gradient = 0.0;
};

struct LbfgsbResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    StopReason reason = StopReason::MaxIterations;
    /// Entry 0 is the starting point; one entry per accepted iterate after.
    std::vector<IterationRecord> trace;
};

/// Infinity norm of the projected gradient.
double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper);

/// Limited-memory BFGS with box constraints (generalized Cauchy point,
/// primal subspace minimization, backtracking Armijo line search). The
/// start point is projected into the box. A failed line search first resets
/// the curvature memory; a second failure stops with LineSearchFailure and
/// the best point found so far. Throws NonFiniteObjective.
LbfgsbResult minimize_lbfgsb(BoxObjective& objective, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const LbfgsbOptions& options = {},
                             const std::function<void(const IterationRecord&)>& on_iterate = {});

}  // namespace gazeval
