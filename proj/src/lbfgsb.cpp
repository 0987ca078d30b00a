#include "gazeval/lbfgsb.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <utility>

#include "gazeval/error.hpp"

namespace gazeval {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(StopReason r) noexcept {
    switch (r) {
        case StopReason::Ftol: return "ftol";
        case StopReason::Pgtol: return "pgtol";
        case StopReason::MaxIterations: return "maxiter";
        case StopReason::MaxEvaluations: return "maxfun";
        case StopReason::LineSearchFailure: return "line_search_failure";
    }
    return "unknown";
}

double projected_gradient_norm(const VectorXd& x, const VectorXd& g, const VectorXd& lower, const VectorXd& upper) {
    double norm = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double gi = g[i];
        if (gi < 0.0) {
            gi = std::max(x[i] - upper[i], gi);
        } else {
            gi = std::min(x[i] - lower[i], gi);
        }
        norm = std::max(norm, std::abs(gi));
    }
    return norm;
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kArmijo = 1e-4;

// Compact representation B = theta I - W M W^T of the limited-memory BFGS
// matrix, W = [Y, theta S].
class CurvatureMemory {
public:
    CurvatureMemory(Eigen::Index n, int capacity) : n_(n), capacity_(capacity) { rebuild(); }

    double theta() const { return theta_; }
    const MatrixXd& W() const { return w_; }
    const MatrixXd& M() const { return m_; }
    bool empty() const { return s_.empty(); }

    void clear() {
        s_.clear();
        y_.clear();
        theta_ = 1.0;
        rebuild();
    }

    // Returns false (and skips the pair) when the curvature condition fails.
    bool push(VectorXd s, VectorXd y) {
        const double sy = s.dot(y);
        const double yy = y.squaredNorm();
        if (!(sy > kEps * yy)) return false;
        if (static_cast<int>(s_.size()) == capacity_) {
            s_.pop_front();
            y_.pop_front();
        }
        s_.push_back(std::move(s));
        y_.push_back(std::move(y));
        theta_ = yy / sy;
        rebuild();
        return true;
    }

private:
    void rebuild() {
        const auto k = static_cast<Eigen::Index>(s_.size());
        w_.resize(n_, 2 * k);
        m_.resize(2 * k, 2 * k);
        if (k == 0) return;
        MatrixXd S(n_, k), Y(n_, k);
        for (Eigen::Index j = 0; j < k; ++j) {
            S.col(j) = s_[static_cast<std::size_t>(j)];
            Y.col(j) = y_[static_cast<std::size_t>(j)];
        }
        w_ << Y, theta_ * S;
        const MatrixXd SY = S.transpose() * Y;
        MatrixXd L = MatrixXd::Zero(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j < i; ++j) L(i, j) = SY(i, j);
        }
        MatrixXd K(2 * k, 2 * k);
        K.topLeftCorner(k, k) = MatrixXd((-SY.diagonal()).asDiagonal());
        K.topRightCorner(k, k) = L.transpose();
        K.bottomLeftCorner(k, k) = L;
        K.bottomRightCorner(k, k) = theta_ * (S.transpose() * S);
        m_ = K.fullPivLu().inverse();
    }

    Eigen::Index n_;
    int capacity_;
    std::deque<VectorXd> s_, y_;
    double theta_ = 1.0;
    MatrixXd w_, m_;
};

struct CauchyPoint {
    VectorXd x;
    VectorXd c;  // W^T (x_cp - x)
};

// Minimizes the quadratic model along the projected steepest-descent path.
CauchyPoint generalized_cauchy_point(const VectorXd& x, const VectorXd& g, const VectorXd& lower,
                                     const VectorXd& upper, const CurvatureMemory& mem) {
    const Eigen::Index n = x.size();
    const MatrixXd& W = mem.W();
    const MatrixXd& M = mem.M();
    const double theta = mem.theta();

    VectorXd d = VectorXd::Zero(n);
    std::vector<std::pair<double, Eigen::Index>> breaks;
    for (Eigen::Index i = 0; i < n; ++i) {
        double t = kInf;
        if (g[i] < 0.0) {
            t = (x[i] - upper[i]) / g[i];
        } else if (g[i] > 0.0) {
            t = (x[i] - lower[i]) / g[i];
        }
        if (t > 0.0) {
            d[i] = -g[i];
            if (std::isfinite(t)) breaks.emplace_back(t, i);
        }
    }
    std::sort(breaks.begin(), breaks.end());

    CauchyPoint cp{x, VectorXd::Zero(W.cols())};
    if (d.squaredNorm() == 0.0) return cp;

    VectorXd p = W.transpose() * d;
    double fp = -d.squaredNorm();
    const double fpp0 = -theta * fp;
    double fpp = fpp0 - p.dot(M * p);
    fpp = std::max(kEps * fpp0, fpp);
    double dt_min = -fp / fpp;
    double t_old = 0.0;

    for (const auto& [t, i] : breaks) {
        const double dt = t - t_old;
        if (dt_min < dt) break;
        cp.x[i] = d[i] > 0.0 ? upper[i] : lower[i];
        const double zb = cp.x[i] - x[i];
        cp.c += dt * p;
        const double gb = g[i];
        const VectorXd wb = W.row(i).transpose();
        fp += dt * fpp + gb * gb + theta * gb * zb - gb * wb.dot(M * cp.c);
        fpp -= theta * gb * gb + 2.0 * gb * wb.dot(M * p) + gb * gb * wb.dot(M * wb);
        fpp = std::max(kEps * fpp0, fpp);
        p += gb * wb;
        d[i] = 0.0;
        dt_min = -fp / fpp;
        t_old = t;
    }
    dt_min = std::max(dt_min, 0.0);
    t_old += dt_min;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (d[i] != 0.0) cp.x[i] = x[i] + t_old * d[i];
    }
    cp.x = cp.x.cwiseMax(lower).cwiseMin(upper);
    cp.c += dt_min * p;
    return cp;
}

// Minimizes the model over the variables left free at the Cauchy point.
VectorXd subspace_minimum(const VectorXd& x, const VectorXd& g, const VectorXd& lower, const VectorXd& upper,
                          const CauchyPoint& cp, const CurvatureMemory& mem) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (cp.x[i] > lower[i] && cp.x[i] < upper[i]) free.push_back(i);
    }
    if (free.empty()) return cp.x;

    const MatrixXd& W = mem.W();
    const MatrixXd& M = mem.M();
    const double theta = mem.theta();
    const auto nf = static_cast<Eigen::Index>(free.size());
    const Eigen::Index k2 = W.cols();

    VectorXd r = g + theta * (cp.x - x);
    if (k2 > 0) r -= W * (M * cp.c);

    VectorXd rf(nf);
    MatrixXd wz(nf, k2);
    for (Eigen::Index a = 0; a < nf; ++a) {
        rf[a] = r[free[static_cast<std::size_t>(a)]];
        if (k2 > 0) wz.row(a) = W.row(free[static_cast<std::size_t>(a)]);
    }

    VectorXd du = -rf / theta;
    if (k2 > 0) {
        VectorXd v = M * (wz.transpose() * rf);
        const MatrixXd N = MatrixXd::Identity(k2, k2) - (M * (wz.transpose() * wz)) / theta;
        v = N.fullPivLu().solve(v);
        du -= (wz * v) / (theta * theta);
    }

    VectorXd xbar = cp.x;
    for (Eigen::Index a = 0; a < nf; ++a) xbar[free[static_cast<std::size_t>(a)]] += du[a];
    xbar = xbar.cwiseMax(lower).cwiseMin(upper);
    if (g.dot(xbar - x) < 0.0) return xbar;

    // Projection destroyed descent: fall back to the truncated step.
    double alpha = 1.0;
    for (Eigen::Index a = 0; a < nf; ++a) {
        const Eigen::Index i = free[static_cast<std::size_t>(a)];
        if (du[a] > 0.0) {
            alpha = std::min(alpha, (upper[i] - cp.x[i]) / du[a]);
        } else if (du[a] < 0.0) {
            alpha = std::min(alpha, (lower[i] - cp.x[i]) / du[a]);
        }
    }
    xbar = cp.x;
    for (Eigen::Index a = 0; a < nf; ++a) xbar[free[static_cast<std::size_t>(a)]] += alpha * du[a];
    xbar = xbar.cwiseMax(lower).cwiseMin(upper);
    return g.dot(xbar - x) < 0.0 ? xbar : cp.x;
}

double max_feasible_step(const VectorXd& x, const VectorXd& d, const VectorXd& lower, const VectorXd& upper) {
    double step = kInf;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (d[i] > 0.0) {
            step = std::min(step, (upper[i] - x[i]) / d[i]);
        } else if (d[i] < 0.0) {
            step = std::min(step, (lower[i] - x[i]) / d[i]);
        }
    }
    return step;
}

void require_finite(double f) {
    if (!std::isfinite(f)) throw Error(ErrorCode::NonFiniteObjective, "objective is not finite");
}

void require_finite(const VectorXd& g) {
    if (!g.allFinite()) throw Error(ErrorCode::NonFiniteObjective, "gradient is not finite");
}

}  // namespace

LbfgsbResult minimize_lbfgsb(BoxObjective& objective, VectorXd x0, const VectorXd& lower, const VectorXd& upper,
                             const LbfgsbOptions& options,
                             const std::function<void(const IterationRecord&)>& on_iterate) {
    const Eigen::Index n = x0.size();
    if (lower.size() != n || upper.size() != n || (lower.array() > upper.array()).any()) {
        throw Error(ErrorCode::SchemaViolation, "inconsistent bounds");
    }

    LbfgsbResult result;
    VectorXd x = x0.cwiseMax(lower).cwiseMin(upper);
    double f = objective.value(x);
    require_finite(f);
    VectorXd g = objective.gradient(x, f);
    require_finite(g);

    const auto record = [&](std::size_t iteration, double pg) {
        IterationRecord rec{iteration, f, pg};
        result.trace.push_back(rec);
        if (on_iterate) on_iterate(rec);
    };
    const auto finish = [&](StopReason reason) {
        result.x = x;
        result.objective = f;
        result.evaluations = objective.evaluations();
        result.reason = reason;
        return result;
    };

    double pg = projected_gradient_norm(x, g, lower, upper);
    record(0, pg);
    if (pg <= options.pgtol) return finish(StopReason::Pgtol);

    CurvatureMemory mem(n, options.memory);
    bool just_reset = false;
    while (true) {
        if (result.iterations >= options.max_iterations) return finish(StopReason::MaxIterations);
        if (objective.evaluations() >= options.max_evaluations) return finish(StopReason::MaxEvaluations);

        const CauchyPoint cp = generalized_cauchy_point(x, g, lower, upper, mem);
        const VectorXd xbar = subspace_minimum(x, g, lower, upper, cp, mem);
        const VectorXd d = xbar - x;
        const double gd = g.dot(d);

        bool accepted = false;
        double f_new = f;
        VectorXd x_new = x;
        if (gd < 0.0) {
            const double step_max = max_feasible_step(x, d, lower, upper);
            double step = mem.empty() ? std::min(1.0 / d.norm(), step_max) : 1.0;
            for (int ls = 0; ls < options.max_line_search; ++ls) {
                if (objective.evaluations() >= options.max_evaluations) return finish(StopReason::MaxEvaluations);
                x_new = (x + step * d).cwiseMax(lower).cwiseMin(upper);
                f_new = objective.value(x_new);
                if (std::isfinite(f_new) && f_new <= f + kArmijo * step * gd) {
                    accepted = true;
                    break;
                }
                double next = 0.5 * step;
                if (std::isfinite(f_new)) {
                    const double denom = 2.0 * (f_new - f - gd * step);
                    if (denom > 0.0) next = std::clamp(-gd * step * step / denom, 0.1 * step, 0.5 * step);
                }
                step = next;
            }
        }

        if (!accepted) {
            if (mem.empty() || just_reset) return finish(StopReason::LineSearchFailure);
            mem.clear();
            just_reset = true;
            continue;
        }
        just_reset = false;

        VectorXd g_new = objective.gradient(x_new, f_new);
        require_finite(g_new);
        mem.push(x_new - x, g_new - g);

        const double f_old = f;
        x = std::move(x_new);
        f = f_new;
        g = std::move(g_new);
        ++result.iterations;
        pg = projected_gradient_norm(x, g, lower, upper);
        record(result.iterations, pg);

        if (pg <= options.pgtol) return finish(StopReason::Pgtol);
        const double scale = std::max({std::abs(f_old), std::abs(f), 1.0});
        if ((f_old - f) / scale <= options.ftol) return finish(StopReason::Ftol);
    }
}

}  // namespace gazeval
