#include "gazeval/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gazeval/cost.hpp"
#include "gazeval/error.hpp"
#include "gazeval/exploration.hpp"
#include "gazeval/metrics.hpp"
#include "gazeval/parallel.hpp"
#include "gazeval/value_engine.hpp"

namespace gazeval {

using Eigen::VectorXd;
using nlohmann::json;

ModelParams FitConfig::default_init() {
    ModelParams p;
    p.w1 = 0.1;
    p.w2 = 0.5;
    p.sigma = 20.0;
    p.phis.assign(10, 1.0);
    return p;
}

namespace {

Interval interval_from_json(const json& j, Interval fallback) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw Error(ErrorCode::SchemaViolation, "bounds must be [lower, upper] pairs");
    }
    Interval out{j[0].get<double>(), j[1].get<double>()};
    if (!(out.lower <= out.upper)) throw Error(ErrorCode::SchemaViolation, "bound lower edge exceeds upper edge");
    (void)fallback;
    return out;
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::SchemaViolation, std::string("bad value for '") + key + "'");
    }
}

}  // namespace

FitConfig fit_config_from_json(const json& j, FitConfig c) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "fit config must be an object");
    static const char* known[] = {"sample_count", "seed",   "min_position", "max_position", "free_phis",
                                  "init",         "bounds", "m_cor",        "ftol",         "pgtol",
                                  "eps",          "maxfun", "maxiter",      "maxls",        "threads"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw Error(ErrorCode::SchemaViolation, "unknown fit config field '" + key + "'");
        }
    }
    read_if(j, "sample_count", c.sample_count);
    read_if(j, "seed", c.seed);
    read_if(j, "min_position", c.min_position);
    read_if(j, "max_position", c.max_position);
    read_if(j, "free_phis", c.free_phis);
    read_if(j, "m_cor", c.optimizer.memory);
    read_if(j, "ftol", c.optimizer.ftol);
    read_if(j, "pgtol", c.optimizer.pgtol);
    read_if(j, "eps", c.gradient_step);
    read_if(j, "maxfun", c.optimizer.max_evaluations);
    read_if(j, "maxiter", c.optimizer.max_iterations);
    read_if(j, "maxls", c.optimizer.max_line_search);
    read_if(j, "threads", c.threads);
    if (j.contains("init")) c.init = params_from_json(j["init"]);
    if (j.contains("bounds")) {
        const auto& b = j["bounds"];
        if (!b.is_object()) throw Error(ErrorCode::SchemaViolation, "bounds must be an object");
        if (b.contains("w1")) c.bounds.w1 = interval_from_json(b["w1"], c.bounds.w1);
        if (b.contains("w2")) c.bounds.w2 = interval_from_json(b["w2"], c.bounds.w2);
        if (b.contains("sigma")) c.bounds.sigma = interval_from_json(b["sigma"], c.bounds.sigma);
        if (b.contains("phi")) c.bounds.phi = interval_from_json(b["phi"], c.bounds.phi);
    }
    if (!(c.bounds.sigma.lower > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "sigma lower bound must be > 0");
    if (c.optimizer.memory < 1 || c.optimizer.max_line_search < 1 || !(c.gradient_step > 0.0)) {
        throw Error(ErrorCode::SchemaViolation, "m_cor, maxls and eps must be positive");
    }
    if (c.min_position < 1 || c.min_position > c.max_position) {
        throw Error(ErrorCode::SchemaViolation, "invalid target position range");
    }
    return c;
}

json to_json(const FitConfig& c) {
    const auto pair = [](Interval i) { return json::array({i.lower, i.upper}); };
    return {{"sample_count", c.sample_count},
            {"seed", c.seed},
            {"min_position", c.min_position},
            {"max_position", c.max_position},
            {"free_phis", c.free_phis},
            {"init", to_json(c.init)},
            {"bounds",
             {{"w1", pair(c.bounds.w1)}, {"w2", pair(c.bounds.w2)}, {"sigma", pair(c.bounds.sigma)},
              {"phi", pair(c.bounds.phi)}}},
            {"m_cor", c.optimizer.memory},
            {"ftol", c.optimizer.ftol},
            {"pgtol", c.optimizer.pgtol},
            {"eps", c.gradient_step},
            {"maxfun", c.optimizer.max_evaluations},
            {"maxiter", c.optimizer.max_iterations},
            {"maxls", c.optimizer.max_line_search}};
}

json to_json(const FitResult& r) {
    json trace = json::array();
    for (const auto& [it, f] : r.objective_trace) trace.push_back(json::array({it, f}));
    return {{"params", to_json(r.params)},
            {"init", to_json(r.init)},
            {"objective_trace", std::move(trace)},
            {"evaluations", r.evaluations},
            {"iterations", r.iterations},
            {"converged_by", std::string(to_string(r.converged_by))},
            {"initial_objective", r.initial_objective},
            {"final_objective", r.final_objective},
            {"sample_count", r.sample_count}};
}

std::vector<TrainingSample> sample_training_set(const Dataset& dataset, const FitConfig& config) {
    std::vector<TrainingSample> eligible;
    for (std::size_t img = 0; img < dataset.images.size(); ++img) {
        for (const auto& sp : dataset.images[img].scanpaths) {
            const std::size_t last = std::min(config.max_position, sp.points.size());
            for (std::size_t pos = config.min_position; pos <= last; ++pos) {
                TrainingSample s;
                s.image = img;
                s.history.assign(sp.points.begin(), sp.points.begin() + static_cast<std::ptrdiff_t>(pos - 1));
                s.target = sp.points[pos - 1];
                s.ordinal_position = pos;
                eligible.push_back(std::move(s));
            }
        }
    }
    if (eligible.empty()) throw Error(ErrorCode::EmptyDataset, "no fixations in the eligible position range");
    std::mt19937_64 rng(config.seed);
    std::shuffle(eligible.begin(), eligible.end(), rng);
    if (eligible.size() > config.sample_count) eligible.resize(config.sample_count);
    return eligible;
}

ParamCodec::ParamCodec(ModelParams templ, bool free_phis) : templ_(std::move(templ)), free_phis_(free_phis) {
    templ_.validate();
}

VectorXd ParamCodec::encode(const ModelParams& p) const {
    VectorXd theta(static_cast<Eigen::Index>(size()));
    theta[0] = p.w1;
    theta[1] = p.w2;
    theta[2] = p.sigma;
    if (free_phis_) {
        if (p.phis.size() != templ_.phis.size()) throw Error(ErrorCode::DecodeError, "phi count differs from template");
        for (std::size_t k = 0; k < p.phis.size(); ++k) theta[static_cast<Eigen::Index>(3 + k)] = p.phis[k];
    }
    return theta;
}

ModelParams ParamCodec::decode(const VectorXd& theta) const {
    if (static_cast<std::size_t>(theta.size()) != size()) throw Error(ErrorCode::DecodeError, "parameter vector size");
    if (!theta.allFinite()) throw Error(ErrorCode::DecodeError, "non-finite parameter");
    if (!(theta[2] > 0.0)) throw Error(ErrorCode::DecodeError, "sigma must be > 0");
    ModelParams p = templ_;
    p.w1 = theta[0];
    p.w2 = theta[1];
    p.sigma = theta[2];
    if (free_phis_) {
        for (std::size_t k = 0; k < p.phis.size(); ++k) p.phis[k] = theta[static_cast<Eigen::Index>(3 + k)];
    }
    return p;
}

std::pair<VectorXd, VectorXd> ParamCodec::bounds(const FitBounds& b) const {
    const auto n = static_cast<Eigen::Index>(size());
    VectorXd lo(n), hi(n);
    lo[0] = b.w1.lower, hi[0] = b.w1.upper;
    lo[1] = b.w2.lower, hi[1] = b.w2.upper;
    lo[2] = b.sigma.lower, hi[2] = b.sigma.upper;
    for (Eigen::Index k = 3; k < n; ++k) lo[k] = b.phi.lower, hi[k] = b.phi.upper;
    return {lo, hi};
}

double objective(const ModelParams& params, std::span<const TrainingSample> samples, const Dataset& dataset,
                 const CostProfile& profile, std::size_t threads) {
    if (samples.empty()) throw Error(ErrorCode::EmptyDataset, "no training samples");
    params.validate();
    std::vector<double> nss(samples.size(), 0.0);
    parallel_for(samples.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const auto& s = samples[k];
            const PredictionContext ctx{dataset.images[s.image].saliency, s.history, params, profile};
            try {
                nss[k] = nss_at(value_map(ctx), s.target);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ConstantMap) throw;
                nss[k] = 0.0;
            }
        }
    });
    double sum = 0.0;
    for (double v : nss) sum += v;
    return -sum / static_cast<double>(samples.size());
}

NssObjective::NssObjective(std::span<const TrainingSample> samples, const Dataset& dataset,
                           const CostProfile& profile, std::size_t threads)
    : threads_(threads) {
    if (samples.empty()) throw Error(ErrorCode::EmptyDataset, "no training samples");
    images_.resize(dataset.images.size());
    for (std::size_t i = 0; i < dataset.images.size(); ++i) {
        const Grid& s = *dataset.images[i].saliency;
        const double mu = s.mean();
        images_[i].dims = s.dims();
        images_[i].s_centered.reserve(s.size());
        for (double v : s.values()) images_[i].s_centered.push_back(v - mu);
    }

    samples_.resize(samples.size());
    parallel_for(samples.size(), threads_, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const TrainingSample& src = samples[k];
            SampleData& d = samples_[k];
            const ImageStats& img = images_[src.image];
            d.image = src.image;
            d.history = src.history;
            d.target = fixation_pixel(img.dims, src.target);
            const double n = static_cast<double>(img.dims.size());

            d.cost_centered.assign(img.dims.size(), 0.0);
            if (!src.history.empty()) {
                const PixelCoord cur = src.history.back();
                const PixelCoord prev =
                    src.history.size() >= 2 ? src.history[src.history.size() - 2] : center_prior(img.dims);
                const Grid c = cost_map(img.dims, prev, cur, profile);
                const double mu = c.mean();
                for (std::size_t p = 0; p < c.size(); ++p) d.cost_centered[p] = c.values()[p] - mu;
            }
            d.s_t = img.s_centered[d.target];
            d.c_t = d.cost_centered[d.target];
            double css = 0.0, csc = 0.0, ccc = 0.0;
            for (std::size_t p = 0; p < d.cost_centered.size(); ++p) {
                const double sv = img.s_centered[p], cv = d.cost_centered[p];
                css += sv * sv;
                csc += sv * cv;
                ccc += cv * cv;
            }
            d.css = css / n;
            d.csc = csc / n;
            d.ccc = ccc / n;
        }
    });
}

NssObjective::GaussianMoments NssObjective::compute_moments(const SampleData& s, double sigma) const {
    const ImageStats& img = images_[s.image];
    const std::size_t w = img.dims.width, h = img.dims.height;
    const double n = static_cast<double>(img.dims.size());
    const std::size_t m = s.history.size();
    const double norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
    const double k = -0.5 / (sigma * sigma);
    const std::size_t tx = s.target % w, ty = s.target / w;

    std::vector<std::vector<double>> gx(m, std::vector<double>(w)), gy(m, std::vector<double>(h));
    std::vector<double> sum_x(m, 0.0), sum_y(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t x = 0; x < w; ++x) {
            const double d = static_cast<double>(x) - s.history[i].x;
            gx[i][x] = std::exp(k * d * d);
            sum_x[i] += gx[i][x];
        }
        for (std::size_t y = 0; y < h; ++y) {
            const double d = static_cast<double>(y) - s.history[i].y;
            gy[i][y] = std::exp(k * d * d);
            sum_y[i] += gy[i][y];
        }
    }

    GaussianMoments out;
    out.at_target.resize(m);
    out.cov_s.resize(m);
    out.cov_c.resize(m);
    out.cov_g.resize(m * m);
    std::vector<double> mean(m);
    for (std::size_t i = 0; i < m; ++i) {
        mean[i] = norm * sum_x[i] * sum_y[i] / n;
        out.at_target[i] = norm * (gy[i][ty] * gx[i][tx]) - mean[i];
        double ps = 0.0, pc = 0.0;
        for (std::size_t y = 0; y < h; ++y) {
            const double* srow = img.s_centered.data() + y * w;
            const double* crow = s.cost_centered.data() + y * w;
            double rs = 0.0, rc = 0.0;
            for (std::size_t x = 0; x < w; ++x) {
                rs += srow[x] * gx[i][x];
                rc += crow[x] * gx[i][x];
            }
            ps += gy[i][y] * rs;
            pc += gy[i][y] * rc;
        }
        out.cov_s[i] = norm * ps / n;
        out.cov_c[i] = norm * pc / n;
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            double dx = 0.0, dy = 0.0;
            for (std::size_t x = 0; x < w; ++x) dx += gx[i][x] * gx[j][x];
            for (std::size_t y = 0; y < h; ++y) dy += gy[i][y] * gy[j][y];
            const double c = norm * norm * dx * dy / n - mean[i] * mean[j];
            out.cov_g[i * m + j] = c;
            out.cov_g[j * m + i] = c;
        }
    }
    return out;
}

const std::vector<NssObjective::GaussianMoments>& NssObjective::moments_for(double sigma) {
    for (auto it = cache_.begin(); it != cache_.end(); ++it) {
        if (it->first == sigma) {
            cache_.splice(cache_.begin(), cache_, it);
            return cache_.front().second;
        }
    }
    std::vector<GaussianMoments> moments(samples_.size());
    parallel_for(samples_.size(), threads_, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) moments[k] = compute_moments(samples_[k], sigma);
    });
    cache_.emplace_front(sigma, std::move(moments));
    constexpr std::size_t kCacheSize = 4;
    if (cache_.size() > kCacheSize) cache_.pop_back();
    return cache_.front().second;
}

double NssObjective::operator()(const ModelParams& params) {
    params.validate();
    const auto& moments = moments_for(params.sigma);
    const ExplorationParams ep = ExplorationParams::from(params);
    const double w0 = params.w0, w1 = params.w1, w2 = params.w2;

    double sum = 0.0;
    std::vector<double> a;
    for (std::size_t k = 0; k < samples_.size(); ++k) {
        const SampleData& s = samples_[k];
        const std::size_t m = s.history.size();
        double num, var;
        if (m == 0) {
            num = s.s_t;
            var = s.css;
        } else {
            const GaussianMoments& g = moments[k];
            a.resize(m);
            for (std::size_t i = 0; i < m; ++i) a[i] = w2 * phi_weight(ep, i, m - 1);
            num = w0 * s.s_t + w1 * s.c_t;
            var = w0 * w0 * s.css + 2.0 * w0 * w1 * s.csc + w1 * w1 * s.ccc;
            for (std::size_t i = 0; i < m; ++i) {
                num += a[i] * g.at_target[i];
                var += 2.0 * a[i] * (w0 * g.cov_s[i] + w1 * g.cov_c[i]);
                double row = 0.0;
                for (std::size_t j = 0; j < m; ++j) row += g.cov_g[i * m + j] * a[j];
                var += a[i] * row;
            }
        }
        if (var > 0.0) sum += num / std::sqrt(var);
    }
    return -sum / static_cast<double>(samples_.size());
}

VectorXd finite_diff_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& theta,
                              double f_theta, double eps, const VectorXd& lower, const VectorXd& upper) {
    if (!std::isfinite(f_theta)) throw Error(ErrorCode::NonFiniteObjective, "objective at theta");
    VectorXd grad(theta.size());
    VectorXd probe = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const bool backward = theta[i] + eps > upper[i] && theta[i] - eps >= lower[i];
        const double h = backward ? -eps : eps;
        probe[i] = theta[i] + h;
        const double fi = f(probe);
        probe[i] = theta[i];
        if (!std::isfinite(fi)) throw Error(ErrorCode::NonFiniteObjective, "objective at a perturbed point");
        grad[i] = (fi - f_theta) / h;
    }
    return grad;
}

namespace {

class CountingObjective final : public BoxObjective {
public:
    CountingObjective(const std::function<double(const ModelParams&)>& f, const ParamCodec& codec, VectorXd lower,
                      VectorXd upper, double eps, const std::function<void(const VectorXd&, double)>& on_evaluate)
        : f_(f), codec_(codec), lower_(std::move(lower)), upper_(std::move(upper)), eps_(eps),
          on_evaluate_(on_evaluate) {}

    double value(const VectorXd& x) override {
        ++count_;
        const double v = f_(codec_.decode(x));
        if (on_evaluate_) on_evaluate_(x, v);
        return v;
    }

    VectorXd gradient(const VectorXd& x, double fx) override {
        return finite_diff_gradient([this](const VectorXd& p) { return value(p); }, x, fx, eps_, lower_, upper_);
    }

    std::size_t evaluations() const override { return count_; }

private:
    const std::function<double(const ModelParams&)>& f_;
    const ParamCodec& codec_;
    VectorXd lower_, upper_;
    double eps_;
    const std::function<void(const VectorXd&, double)>& on_evaluate_;
    std::size_t count_ = 0;
};

}  // namespace

FitResult fit_objective(const std::function<double(const ModelParams&)>& f, const ParamCodec& codec,
                        const FitConfig& config, const std::function<void(const VectorXd&, double)>& on_evaluate) {
    const auto [lower, upper] = codec.bounds(config.bounds);
    CountingObjective obj(f, codec, lower, upper, config.gradient_step, on_evaluate);
    const LbfgsbResult r = minimize_lbfgsb(obj, codec.encode(config.init), lower, upper, config.optimizer);

    FitResult out;
    out.params = codec.decode(r.x);
    out.params.w0 = 1.0;
    out.init = config.init;
    for (const auto& rec : r.trace) out.objective_trace.emplace_back(rec.iteration, rec.objective);
    out.evaluations = r.evaluations;
    out.iterations = r.iterations;
    out.converged_by = r.reason;
    out.initial_objective = r.trace.front().objective;
    out.final_objective = r.objective;
    return out;
}

FitResult fit(const Dataset& dataset, const CostProfile& profile, const FitConfig& config) {
    profile.validate();
    if (!(config.bounds.sigma.lower > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "sigma lower bound must be > 0");
    const auto samples = sample_training_set(dataset, config);
    NssObjective nss(samples, dataset, profile, config.threads);
    const ParamCodec codec(config.init, config.free_phis);
    FitResult out = fit_objective([&nss](const ModelParams& p) { return nss(p); }, codec, config);
    out.sample_count = samples.size();
    return out;
}

FitResult fit(const DatasetManifest& manifest, const CostProfile& profile, const FitConfig& config) {
    return fit(load_dataset(manifest), profile, config);
}

}  // namespace gazeval
