#include <doctest.h>

#include <cmath>
#include <random>

#include "gazeval/cost.hpp"
#include "gazeval/error.hpp"
#include "gazeval/fitting.hpp"
#include "gazeval/lbfgsb.hpp"
#include "gazeval/metrics.hpp"
#include "gazeval/reference_params.hpp"
#include "gazeval/synthetic.hpp"
#include "oracles.hpp"

using namespace gazeval;
using Eigen::VectorXd;

namespace {

class Quadratic : public BoxObjective {
public:
    Quadratic(VectorXd center, VectorXd curvature) : c_(std::move(center)), k_(std::move(curvature)) {}
    double value(const VectorXd& x) override {
        ++n_;
        return 0.5 * (k_.array() * (x - c_).array().square()).sum();
    }
    VectorXd gradient(const VectorXd& x, double) override { return (k_.array() * (x - c_).array()).matrix(); }
    std::size_t evaluations() const override { return n_; }

private:
    VectorXd c_, k_;
    std::size_t n_ = 0;
};

class Rosenbrock : public BoxObjective {
public:
    double value(const VectorXd& x) override {
        ++n_;
        double f = 0.0;
        for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
            f += 100.0 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1.0 - x[i], 2);
        }
        return f;
    }
    VectorXd gradient(const VectorXd& x, double) override {
        VectorXd g = VectorXd::Zero(x.size());
        for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
            const double t = x[i + 1] - x[i] * x[i];
            g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
            g[i + 1] += 200.0 * t;
        }
        return g;
    }
    std::size_t evaluations() const override { return n_; }

private:
    std::size_t n_ = 0;
};

void check_trace(const LbfgsbResult& r) {
    for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].objective <= r.trace[k - 1].objective);
}

Dataset tiny_synthetic(std::uint64_t seed, std::size_t images = 6) {
    SyntheticConfig sc;
    sc.images = images;
    sc.scanpaths_per_image = 3;
    sc.length = 6;
    sc.dims = {16, 12};
    sc.seed = seed;
    return generate_synthetic(sc, find_reference("deepgaze2_individual").params, default_cost_profile());
}

}  // namespace

TEST_CASE("lbfgsb on quadratics") {
    SUBCASE("interior minimizer") {
        Quadratic q(VectorXd::LinSpaced(5, -1.0, 3.0), VectorXd::LinSpaced(5, 1.0, 50.0));
        const LbfgsbResult r = minimize_lbfgsb(q, VectorXd::Constant(5, 10.0), VectorXd::Constant(5, -20.0),
                                               VectorXd::Constant(5, 20.0));
        CHECK((r.x - VectorXd::LinSpaced(5, -1.0, 3.0)).lpNorm<Eigen::Infinity>() <= 1e-5);
        CHECK(r.iterations <= 50);
        check_trace(r);
    }
    SUBCASE("minimizer outside the box lands on the bound") {
        VectorXd c(3);
        c << 5.0, -5.0, 0.5;
        Quadratic q(c, VectorXd::Ones(3));
        const LbfgsbResult r = minimize_lbfgsb(q, VectorXd::Zero(3), VectorXd::Constant(3, -1.0), VectorXd::Constant(3, 1.0));
        CHECK(r.x[0] == 1.0);
        CHECK(r.x[1] == -1.0);
        CHECK(r.x[2] == doctest::Approx(0.5).epsilon(1e-8));
        CHECK(r.reason == StopReason::Pgtol);
    }
    SUBCASE("start outside the box is projected") {
        Quadratic q(VectorXd::Zero(2), VectorXd::Ones(2));
        const LbfgsbResult r = minimize_lbfgsb(q, VectorXd::Constant(2, 100.0), VectorXd::Constant(2, 1.0),
                                               VectorXd::Constant(2, 2.0));
        CHECK(r.x == VectorXd::Constant(2, 1.0));
    }
}

TEST_CASE("lbfgsb on bounded Rosenbrock") {
    Rosenbrock f;
    LbfgsbOptions opt;
    opt.ftol = 1e-14;
    const LbfgsbResult r = minimize_lbfgsb(f, VectorXd::Constant(4, -1.2), VectorXd::Constant(4, -2.0),
                                           VectorXd::Constant(4, 2.0), opt);
    CHECK((r.x - VectorXd::Ones(4)).lpNorm<Eigen::Infinity>() <= 1e-4);
    check_trace(r);

    Rosenbrock g;
    const LbfgsbResult b = minimize_lbfgsb(g, VectorXd::Constant(2, -1.2), VectorXd::Constant(2, -2.0),
                                           VectorXd::Constant(2, 0.5), opt);
    // constrained optimum: x0 = 0.5 on the bound, x1 = 0.25
    CHECK(b.x[0] == 0.5);
    CHECK(b.x[1] == doctest::Approx(0.25).epsilon(1e-5));
}

TEST_CASE("lbfgsb stopping limits") {
    Rosenbrock f;
    LbfgsbOptions opt;
    opt.max_iterations = 3;
    const LbfgsbResult r = minimize_lbfgsb(f, VectorXd::Constant(2, -1.2), VectorXd::Constant(2, -5.0),
                                           VectorXd::Constant(2, 5.0), opt);
    CHECK(r.reason == StopReason::MaxIterations);
    CHECK(r.iterations == 3);
    Rosenbrock g;
    opt.max_iterations = 1000;
    opt.max_evaluations = 10;
    const LbfgsbResult e = minimize_lbfgsb(g, VectorXd::Constant(2, -1.2), VectorXd::Constant(2, -5.0),
                                           VectorXd::Constant(2, 5.0), opt);
    CHECK(e.reason == StopReason::MaxEvaluations);
}

TEST_CASE("finite differences") {
    const VectorXd lo = VectorXd::Constant(3, -10), hi = VectorXd::Constant(3, 10);
    SUBCASE("linear function gives its coefficients") {
        const VectorXd c = (VectorXd(3) << 3.0, -2.0, 0.5).finished();
        auto f = [&](const VectorXd& x) { return c.dot(x); };
        const double eps = std::ldexp(1.0, -20);
        const VectorXd g = finite_diff_gradient(f, VectorXd::Zero(3), 0.0, eps, lo, hi);
        CHECK(g == c);
    }
    SUBCASE("square") {
        auto f = [](const VectorXd& x) { return x[0] * x[0]; };
        const VectorXd x = VectorXd::Ones(1);
        const VectorXd g = finite_diff_gradient(f, x, 1.0, 1e-8, VectorXd::Constant(1, -5), VectorXd::Constant(1, 5));
        CHECK(std::abs(g[0] - 2.0) <= 1e-6);
    }
    SUBCASE("backward step at the upper bound") {
        auto f = [](const VectorXd& x) {
            CHECK(x[0] <= 1.0);
            return x[0] * x[0];
        };
        const VectorXd x = VectorXd::Ones(1);
        const VectorXd g = finite_diff_gradient(f, x, 1.0, 1e-8, VectorXd::Constant(1, -5), VectorXd::Constant(1, 1));
        CHECK(std::abs(g[0] - 2.0) <= 1e-6);
    }
    SUBCASE("non-finite values") {
        auto f = [](const VectorXd&) { return NAN; };
        CHECK_THROWS_AS(finite_diff_gradient(f, VectorXd::Zero(1), 0.0, 1e-8, VectorXd::Constant(1, -1), VectorXd::Constant(1, 1)),
                        Error);
    }
}

TEST_CASE("parameter codec") {
    const ModelParams dg = find_reference("deepgaze2_individual").params;
    const ParamCodec free(dg, true), fixed(dg, false);
    CHECK(free.size() == 13);
    CHECK(fixed.size() == 3);
    CHECK(free.decode(free.encode(dg)) == dg);
    CHECK(fixed.decode(fixed.encode(dg)) == dg);
    VectorXd bad = fixed.encode(dg);
    bad[2] = 0.0;
    CHECK_THROWS_AS(fixed.decode(bad), Error);
    CHECK_THROWS_AS(free.decode(fixed.encode(dg)), Error);
}

TEST_CASE("training set sampling") {
    Dataset ds;
    auto sal = std::make_shared<const Grid>(Grid(Dims{10, 10}, 1.0));
    ImageData img{"a", sal, {}};
    // 1000 scanpaths of 12 fixations: 9 eligible targets each at positions 3..11
    std::mt19937_64 rng(1);
    for (int s = 0; s < 1000; ++s) {
        Scanpath sp{"a", "s" + std::to_string(s), {}};
        for (int k = 0; k < 12; ++k) sp.points.push_back(oracle::random_pixel({10, 10}, rng));
        img.scanpaths.push_back(sp);
    }
    img.scanpaths.push_back({"a", "short", {{1, 1}, {2, 2}}});
    ds.images.push_back(img);

    FitConfig cfg;
    cfg.sample_count = 9000;
    cfg.seed = 3;
    const auto a = sample_training_set(ds, cfg);
    const auto b = sample_training_set(ds, cfg);
    CHECK(a.size() == 9000);
    bool same = true;
    for (std::size_t k = 0; k < a.size(); ++k) {
        same = same && a[k].target == b[k].target && a[k].history == b[k].history;
        CHECK(a[k].ordinal_position >= 3);
        CHECK(a[k].ordinal_position <= 11);
        CHECK(a[k].history.size() == a[k].ordinal_position - 1);
    }
    CHECK(same);
    cfg.seed = 4;
    const auto c = sample_training_set(ds, cfg);
    bool reordered = false;
    for (std::size_t k = 0; k < a.size(); ++k) reordered = reordered || !(a[k].target == c[k].target);
    CHECK(reordered);
    cfg.sample_count = 100;
    CHECK(sample_training_set(ds, cfg).size() == 100);

    Dataset short_only;
    short_only.images.push_back({"b", sal, {{"b", "s", {{1, 1}, {2, 2}}}}});
    CHECK_THROWS_AS(sample_training_set(short_only, FitConfig{}), Error);
}

TEST_CASE("objective") {
    const Dataset ds = tiny_synthetic(5);
    FitConfig cfg;
    cfg.min_position = 2;
    cfg.max_position = 6;
    const auto samples = sample_training_set(ds, cfg);
    const CostProfile prof = default_cost_profile();
    ModelParams p = find_reference("deepgaze2_individual").params;

    SUBCASE("zero weights reduce to the saliency NSS") {
        double base = 0.0;
        for (const auto& s : samples) base += nss_at(*ds.images[s.image].saliency, s.target);
        base /= static_cast<double>(samples.size());
        p.w1 = p.w2 = 0.0;
        CHECK(objective(p, samples, ds, prof) == doctest::Approx(-base).epsilon(1e-14));
        p.sigma = 3.0;
        p.phis.assign(10, -4.0);
        CHECK(objective(p, samples, ds, prof) == doctest::Approx(-base).epsilon(1e-14));
    }
    SUBCASE("duplicating every sample leaves it unchanged") {
        auto doubled = samples;
        doubled.insert(doubled.end(), samples.begin(), samples.end());
        CHECK(objective(p, doubled, ds, prof) == doctest::Approx(objective(p, samples, ds, prof)).epsilon(1e-14));
    }
    SUBCASE("deterministic") {
        CHECK(objective(p, samples, ds, prof, 1) == objective(p, samples, ds, prof, 1));
        NssObjective fast(samples, ds, prof, 2);
        CHECK(fast(p) == fast(p));
    }
    SUBCASE("cached route agrees with the direct route") {
        NssObjective fast(samples, ds, prof, 1);
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> u(-3, 3), us(0.7, 40);
        for (int rep = 0; rep < 20; ++rep) {
            ModelParams q = p;
            q.w1 = u(rng);
            q.w2 = u(rng);
            q.sigma = rep < 10 ? us(rng) : 5.0;  // repeated sigma exercises the cache
            for (double& v : q.phis) v = u(rng);
            q.phi_indexing = rep % 3 == 0 ? PhiIndexing::Absolute : PhiIndexing::Lag;
            CHECK(std::abs(fast(q) - objective(q, samples, ds, prof)) <= 1e-10);
        }
    }
    SUBCASE("two hand-built samples") {
        Dataset hand;
        Grid s1(Dims{4, 4}), s2(Dims{4, 4});
        for (std::size_t k = 0; k < 16; ++k) {
            s1.values()[k] = static_cast<double>((k * 7) % 5);
            s2.values()[k] = static_cast<double>(k % 3) + 0.25 * static_cast<double>(k / 4);
        }
        hand.images.push_back({"a", std::make_shared<const Grid>(s1), {}});
        hand.images.push_back({"b", std::make_shared<const Grid>(s2), {}});
        const std::vector<TrainingSample> two{{0, {{0, 0}, {3, 1}}, {2, 2}, 3}, {1, {{1, 3}, {1, 0}, {3, 3}}, {0, 2}, 4}};
        ModelParams q;
        q.w1 = 0.4;
        q.w2 = -1.3;
        q.sigma = 1.5;
        q.phis = {2.0, -1.0, 0.5};
        CostProfile cp;
        cp.pixels_per_degree = 1.0;
        cp.amplitude_bin_edges = {0, 1, 2, 4};
        cp.amplitude_values = {0.0, -0.5, -1.25};
        cp.psi1 = -0.2;
        cp.psi2 = 0.1;
        double expect = 0.0;
        for (const auto& s : two) {
            expect += oracle::nss(oracle::value_map(*hand.images[s.image].saliency, s.history, q, cp), s.target);
        }
        expect = -expect / 2.0;
        CHECK(std::abs(objective(q, two, hand, cp) - expect) <= 1e-10);
        NssObjective fast(two, hand, cp, 1);
        CHECK(std::abs(fast(q) - expect) <= 1e-10);
    }
    SUBCASE("forward differences agree with central differences") {
        NssObjective fast(samples, ds, prof, 1);
        const ParamCodec codec(p, true);
        auto f = [&](const VectorXd& t) { return fast(codec.decode(t)); };
        const auto [lo, hi] = codec.bounds(FitBounds{});
        const VectorXd theta = codec.encode(p);
        const VectorXd g = finite_diff_gradient(f, theta, f(theta), 1e-8, lo, hi);
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            VectorXd a = theta, b = theta;
            a[i] += 1e-5;
            b[i] -= 1e-5;
            const double central = (f(a) - f(b)) / 2e-5;
            CHECK(std::abs(g[i] - central) <= 1e-2 * std::max(std::abs(central), 1e-6));
        }
    }
}

TEST_CASE("fit driver") {
    SUBCASE("already at the minimum of a quadratic in w1") {
        FitConfig cfg;
        cfg.init.w1 = 0.3;
        const ParamCodec codec(cfg.init, true);
        const FitResult r = fit_objective([](const ModelParams& p) { return (p.w1 - 0.3) * (p.w1 - 0.3); }, codec, cfg);
        CHECK(r.iterations <= 2);
        CHECK(std::abs(r.params.w1 - 0.3) <= 1e-6);
    }
    SUBCASE("separable quadratic in w1, w2, sigma with every evaluation inside the box") {
        FitConfig cfg;
        cfg.free_phis = false;
        const ParamCodec codec(cfg.init, false);
        const auto [lo, hi] = codec.bounds(cfg.bounds);
        auto f = [](const ModelParams& p) {
            return 2.0 * std::pow(p.w1 - 0.7, 2) + 0.5 * std::pow(p.w2 + 1.2, 2) + 0.01 * std::pow(p.sigma - 12.0, 2);
        };
        bool inside = true;
        const FitResult r = fit_objective(f, codec, cfg, [&](const VectorXd& t, double) {
            inside = inside && (t.array() >= lo.array()).all() && (t.array() <= hi.array()).all();
        });
        CHECK(inside);
        CHECK(std::abs(r.params.w1 - 0.7) <= 1e-5);
        CHECK(std::abs(r.params.w2 + 1.2) <= 1e-5);
        CHECK(std::abs(r.params.sigma - 12.0) <= 1e-3);
        CHECK(r.params.phis == cfg.init.phis);
        for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
            CHECK(r.objective_trace[k].second <= r.objective_trace[k - 1].second);
        }
    }
    SUBCASE("fixed phis fit on synthetic data") {
        const Dataset ds = tiny_synthetic(9, 4);
        FitConfig cfg;
        cfg.free_phis = false;
        cfg.init.phis = find_reference("deepgaze2_shared").params.phis;
        cfg.threads = 1;
        const FitResult r = fit(ds, default_cost_profile(), cfg);
        CHECK(r.params.phis == cfg.init.phis);
        CHECK(r.final_objective <= r.initial_objective);
        CHECK(r.sample_count == 4 * 3 * 4);
    }
}
