#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gazeval/dataset.hpp"
#include "gazeval/lbfgsb.hpp"
#include "gazeval/params.hpp"

namespace gazeval {

/// One next-fixation prediction problem drawn from a recorded scanpath.
struct TrainingSample {
    std::size_t image = 0;              // index into Dataset::images
    std::vector<PixelCoord> history;    // x_0 .. x_t
    PixelCoord target;                  // x_{t+1}
    std::size_t ordinal_position = 0;   // 1-based position of the target
};

struct Interval {
    double lower;
    double upper;
};

struct FitBounds {
    Interval w1{-100.0, 100.0};
    Interval w2{-100.0, 100.0};
    Interval sigma{0.5, 500.0};
    Interval phi{-100.0, 100.0};
};

struct FitConfig {
    std::size_t sample_count = 10000;
    std::uint64_t seed = 0;
    /// Targets are drawn from these ordinal positions (inclusive).
    std::size_t min_position = 3;
    std::size_t max_position = 11;
    /// true: fit w1, w2, sigma and every phi. false: fit w1, w2, sigma with
    /// the phis of `init` held fixed.
    bool free_phis = true;
    ModelParams init = default_init();
    FitBounds bounds;
    LbfgsbOptions optimizer;
    double gradient_step = 1e-8;
    std::size_t threads = 0;

    static ModelParams default_init();
};

/// Reads optimizer and sampling settings; unspecified fields keep defaults.
FitConfig fit_config_from_json(const nlohmann::json& j, FitConfig base = {});
nlohmann::json to_json(const FitConfig& c);

struct FitResult {
    ModelParams params;
    ModelParams init;
    std::vector<std::pair<std::size_t, double>> objective_trace;  // (iteration, objective)
    std::size_t evaluations = 0;
    std::size_t iterations = 0;
    StopReason converged_by = StopReason::MaxIterations;
    double initial_objective = 0.0;
    double final_objective = 0.0;
    std::size_t sample_count = 0;
};

nlohmann::json to_json(const FitResult& r);

/// Eligible targets (ordinal position within [min_position, max_position])
/// drawn uniformly without replacement, shuffled deterministically by seed.
/// Takes all of them when fewer than sample_count exist. Throws EmptyDataset.
std::vector<TrainingSample> sample_training_set(const Dataset& dataset, const FitConfig& config);

/// Parameter vector layout: [w1, w2, sigma] followed by the phis when they
/// are free. Everything else comes from the template.
class ParamCodec {
public:
    ParamCodec(ModelParams templ, bool free_phis);

    std::size_t size() const noexcept { return free_phis_ ? 3 + templ_.phis.size() : 3; }
    Eigen::VectorXd encode(const ModelParams& p) const;
    /// Throws DecodeError on a size mismatch or non-positive sigma.
    ModelParams decode(const Eigen::VectorXd& theta) const;
    std::pair<Eigen::VectorXd, Eigen::VectorXd> bounds(const FitBounds& b) const;
    const ModelParams& templ() const noexcept { return templ_; }

private:
    ModelParams templ_;
    bool free_phis_;
};

/// Negated mean one-step NSS of the value maps at the sample targets,
/// computed map by map. Samples whose value map is constant count as 0.
double objective(const ModelParams& params, std::span<const TrainingSample> samples, const Dataset& dataset,
                 const CostProfile& profile, std::size_t threads = 1);

/// Same quantity as `objective`, evaluated from per-sample statistics. The
/// cost map of a sample does not depend on the parameters, so it is computed
/// once; Gaussian terms are separable, so moments involving them cost one
/// pass per fixation. Statistics for recently used sigmas are kept.
class NssObjective {
public:
    NssObjective(std::span<const TrainingSample> samples, const Dataset& dataset, const CostProfile& profile,
                 std::size_t threads = 0);

    double operator()(const ModelParams& params);
    std::size_t size() const noexcept { return samples_.size(); }

private:
    struct SampleData {
        std::size_t image;
        std::size_t target;  // row-major pixel index
        std::vector<PixelCoord> history;
        std::vector<double> cost_centered;
        double s_t, c_t;     // centered saliency / cost at the target
        double css, csc, ccc;
    };
    struct ImageStats {
        Dims dims;
        std::vector<double> s_centered;
    };
    // Sigma-dependent moments for one sample, fixation index i (0..t).
    struct GaussianMoments {
        std::vector<double> at_target;  // g_i(target) - mean(g_i)
        std::vector<double> cov_s;      // cov(S, g_i)
        std::vector<double> cov_c;      // cov(C, g_i)
        std::vector<double> cov_g;      // cov(g_i, g_j), row-major (t+1)^2
    };
    using SigmaEntry = std::pair<double, std::vector<GaussianMoments>>;

    const std::vector<GaussianMoments>& moments_for(double sigma);
    GaussianMoments compute_moments(const SampleData& s, double sigma) const;

    std::vector<ImageStats> images_;
    std::vector<SampleData> samples_;
    std::size_t threads_;
    std::list<SigmaEntry> cache_;
};

/// Forward differences (f(theta + eps e_i) - f(theta)) / eps, switching to a
/// backward difference where the forward step would cross `upper`.
/// Throws NonFiniteObjective.
Eigen::VectorXd finite_diff_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& theta, double f_theta, double eps,
                                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

/// Runs the bounded quasi-Newton minimization of `f` from `init` with
/// finite-difference gradients, under the codec's layout and the config's
/// bounds and optimizer settings.
FitResult fit_objective(const std::function<double(const ModelParams&)>& f, const ParamCodec& codec,
                        const FitConfig& config,
                        const std::function<void(const Eigen::VectorXd&, double)>& on_evaluate = {});

/// Fits the value-map parameters to maximize mean one-step NSS.
FitResult fit(const Dataset& dataset, const CostProfile& profile, const FitConfig& config);
FitResult fit(const DatasetManifest& manifest, const CostProfile& profile, const FitConfig& config);

}  // namespace gazeval
