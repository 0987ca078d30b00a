// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failures.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "gazeval/cost.hpp"
#include "gazeval/eval.hpp"
#include "gazeval/exploration.hpp"
#include "gazeval/fitting.hpp"
#include "gazeval/metrics.hpp"
#include "gazeval/raster.hpp"
#include "gazeval/reference_params.hpp"
#include "gazeval/synthetic.hpp"
#include "gazeval/value_engine.hpp"
#include "oracles.hpp"

using namespace gazeval;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void metric_oracles() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    double worst_nss = 0.0, worst_auc = 0.0;
    for (int k = 0; k < 200; ++k) {
        const Grid g = oracle::random_grid({16, 16}, rng, k % 2 ? 5 : 0);
        const PixelCoord f = oracle::random_pixel({16, 16}, rng);
        worst_nss = std::max(worst_nss, std::abs(nss_at(g, f) - oracle::nss(g, f)));
        worst_auc = std::max(worst_auc, std::abs(auc_at(g, f) - oracle::auc_sweep(g, f)));
    }
    const double dt = seconds_since(t0);
    report("metric-oracle-equivalence", worst_nss <= 1e-12 && worst_auc <= 1e-9 && dt < 5.0,
           fmt("200 grids (100 with ties): max |nss-oracle| %.2e (<=1e-12), max |auc-oracle| %.2e (<=1e-9), %.2fs (<5s)",
               worst_nss, worst_auc, dt));
}

void value_map_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(202);
    const ModelParams dg = find_reference("deepgaze2_individual").params;
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const Dims d{8, 8};
        auto s = std::make_shared<const Grid>(oracle::random_grid(d, rng));
        std::vector<PixelCoord> h;
        for (int i = 0; i < 3; ++i) h.push_back(oracle::random_pixel(d, rng));
        const PredictionContext ctx{s, h, dg, oracle::random_profile(rng)};
        const Grid v = value_map(ctx), o = oracle::value_map(*s, h, dg, ctx.profile);
        for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(v.values()[i] - o.values()[i]));
    }
    const double dt = seconds_since(t0);
    report("value-map-oracle", worst <= 1e-10 && dt < 5.0,
           fmt("50 contexts 8x8, 3 fixations, random profiles: max diff %.2e (<=1e-10), %.2fs (<5s)", worst, dt));
}

void geometry_suite() {
    using std::numbers::pi;
    int bad = 0, total = 0;
    auto expect = [&](double got, double want) {
        ++total;
        if (got != want) ++bad;
    };
    expect(amplitude({0, 0}, {3, 4}), 5.0);
    expect(amplitude({7, 7}, {7, 7}), 0.0);
    expect(amplitude({1, 1}, {2, 3}), std::sqrt(5.0));
    expect(relative_angle({0, 0}, {1, 0}, {2, 0}), 0.0);
    expect(relative_angle({0, 0}, {1, 0}, {0, 0}), pi);
    expect(relative_angle({0, 0}, {1, 0}, {1, 1}), pi / 2);
    expect(absolute_angle({0, 0}, {5, 0}), 0.0);
    expect(absolute_angle({0, 0}, {-3, 0}), pi);
    expect(absolute_angle({0, 0}, {0, 5}), pi / 2);
    expect(absolute_angle({0, 0}, {0, -5}), pi / 2);

    // collinear and nearly collinear configurations whose normalized dot
    // product rounds to 1 + 1e-16 or -1 - 1e-16 under naive evaluation
    int nonfinite = 0, adversarial = 0;
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(-1e3, 1e3), us(1e-3, 1e8);
    for (int k = 0; k < 10000; ++k) {
        const PixelCoord a{u(rng), u(rng)};
        const double dx = u(rng), dy = u(rng), s1 = us(rng), s2 = (k % 2 ? 1 : -1) * us(rng);
        const PixelCoord b{a.x + s1 * dx, a.y + s1 * dy};
        const PixelCoord c{b.x + s2 * dx * (1 + 1e-16), b.y + s2 * dy};
        const double ax = b.x - a.x, ay = b.y - a.y, bx = c.x - b.x, by = c.y - b.y;
        const double naive = (ax * bx + ay * by) / (std::hypot(ax, ay) * std::hypot(bx, by));
        if (std::abs(naive) > 1.0) ++adversarial;
        const double r = relative_angle(a, b, c), t = absolute_angle(b, c);
        if (!std::isfinite(r) || r < 0 || r > pi || !std::isfinite(t) || t < 0 || t > pi) ++nonfinite;
    }
    report("geometry-suite", bad == 0 && nonfinite == 0,
           fmt("%d/%d exact examples, %d/10000 collinear cases non-finite or out of [0,pi] (%d had |naive cos|>1)",
               total - bad, total, nonfinite, adversarial));
}

void gaussian_normalization() {
    const Grid g = gaussian_at({64, 64}, {32, 32}, 2.0);
    double sum = 0.0;
    for (double v : g.values()) sum += v;

    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> ua(0.1, 10.0), us(0.5, 8.0), uphi(-3.0, 3.0);
    double worst_add = 0.0, worst_scale = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Dims d{24, 20};
        std::vector<PixelCoord> h1, h2;
        for (int i = 0; i < 3; ++i) h1.push_back(oracle::random_pixel(d, rng));
        for (int i = 0; i < 2; ++i) h2.push_back(oracle::random_pixel(d, rng));
        auto h12 = h1;
        h12.insert(h12.end(), h2.begin(), h2.end());
        const double sigma = us(rng);
        const ExplorationParams c{{uphi(rng)}, sigma, PhiIndexing::Lag};
        const Grid a = exploration_map(d, h1, c), b = exploration_map(d, h2, c), ab = exploration_map(d, h12, c);
        ExplorationParams varied{{}, sigma, k % 2 ? PhiIndexing::Lag : PhiIndexing::Absolute};
        for (int i = 0; i < 5; ++i) varied.phis.push_back(uphi(rng));
        const double s = ua(rng);
        ExplorationParams scaled = varied;
        for (double& v : scaled.phis) v *= s;
        const Grid base = exploration_map(d, h12, varied), sc = exploration_map(d, h12, scaled);
        for (std::size_t i = 0; i < ab.size(); ++i) {
            worst_add = std::max(worst_add, std::abs(ab.values()[i] - a.values()[i] - b.values()[i]));
            worst_scale = std::max(worst_scale, std::abs(sc.values()[i] - s * base.values()[i]));
        }
    }
    report("gaussian-normalization",
           sum >= 0.995 && sum <= 1.0001 && worst_add <= 1e-12 && worst_scale <= 1e-12,
           fmt("sigma=2 sum %.12f in [0.995,1.0001]; 100 instances: additivity %.2e, scaling %.2e (<=1e-12)", sum,
               worst_add, worst_scale));
}

void param_io() {
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "gazeval_acceptance_params";
    std::filesystem::create_directories(dir);
    int rows = 0, exact = 0;
    for (const auto* set : {&individual_fits(), &shared_phi_fits()}) {
        for (const auto& m : *set) {
            ++rows;
            const auto path = dir / (m.id + ".json");
            save_params(m.params, path);
            const ModelParams back = load_params(path);
            bool same = back.phis.size() == m.params.phis.size() &&
                        std::bit_cast<std::uint64_t>(back.w1) == std::bit_cast<std::uint64_t>(m.params.w1) &&
                        std::bit_cast<std::uint64_t>(back.w2) == std::bit_cast<std::uint64_t>(m.params.w2) &&
                        std::bit_cast<std::uint64_t>(back.sigma) == std::bit_cast<std::uint64_t>(m.params.sigma);
            for (std::size_t k = 0; same && k < back.phis.size(); ++k) {
                same = std::bit_cast<std::uint64_t>(back.phis[k]) == std::bit_cast<std::uint64_t>(m.params.phis[k]);
            }
            if (same) ++exact;
        }
    }
    std::filesystem::remove_all(dir);
    report("parameter-io-fidelity", rows == 9 && exact == rows,
           fmt("%d/%d table rows (4 individual, 5 shared-phi) bit-identical after 17-digit JSON round trip", exact, rows));
}

void optimizer_sanity() {
    FitConfig cfg;
    cfg.free_phis = false;
    const ParamCodec codec(cfg.init, false);
    const auto [lo, hi] = codec.bounds(cfg.bounds);
    const double w1s = 1.25, w2s = -0.5, ss = 17.0;
    auto f = [&](const ModelParams& p) {
        return 2.0 * std::pow(p.w1 - w1s, 2) + 1.0 * std::pow(p.w2 - w2s, 2) + 0.5 * std::pow(p.sigma - ss, 2);
    };
    bool inside = true;
    const FitResult r = fit_objective(f, codec, cfg, [&](const Eigen::VectorXd& t, double) {
        inside = inside && (t.array() >= lo.array()).all() && (t.array() <= hi.array()).all();
    });
    bool monotone = true;
    for (std::size_t k = 1; k < r.objective_trace.size(); ++k) {
        monotone = monotone && r.objective_trace[k].second <= r.objective_trace[k - 1].second;
    }
    const double err = std::max({std::abs(r.params.w1 - w1s), std::abs(r.params.w2 - w2s), std::abs(r.params.sigma - ss)});
    report("optimizer-sanity", err <= 1e-5 && r.iterations <= 50 && monotone && inside,
           fmt("max |theta-theta*| %.2e (<=1e-5), %zu iterations (<=50), stop=%s, monotone=%d, in-bounds=%d", err,
               r.iterations, std::string(to_string(r.converged_by)).c_str(), monotone, inside));
}

struct SyntheticRun {
    Dataset train, test;
    ModelParams truth;
    double train_seconds = 0.0;  // generating the training set
};

SyntheticRun make_synthetic() {
    SyntheticRun s;
    s.truth = find_reference("deepgaze2_individual").params;
    SyntheticConfig sc;  // 200 images x 10 scanpaths x 8 fixations on 64x48
    sc.seed = 7;
    const auto t0 = Clock::now();
    s.train = generate_synthetic(sc, s.truth, default_cost_profile());
    s.train_seconds = seconds_since(t0);
    sc.seed = 8;
    s.test = generate_synthetic(sc, s.truth, default_cost_profile());
    return s;
}

void synthetic_recovery(const SyntheticRun& s) {
    const auto t0 = Clock::now();
    FitConfig cfg;
    cfg.threads = 1;
    cfg.seed = 7;
    const FitResult fitted = fit(s.train, default_cost_profile(), cfg);
    const auto samples = sample_training_set(s.train, cfg);
    NssObjective nss(samples, s.train, default_cost_profile(), 1);
    const double obj_truth = nss(s.truth);
    const double fit_seconds = seconds_since(t0);

    EvalOptions o;
    o.threads = 1;
    const EvalReport held = evaluate(s.test, fitted.params, default_cost_profile(), o);
    bool all_positive = true;
    std::string deltas;
    for (const auto& p : held.per_position) {
        if (p.position < 2 || p.position > 8) continue;
        all_positive = all_positive && p.delta_nss > 0.0;
        deltas += fmt(" %zu:%+.3f", p.position, p.delta_nss);
    }
    const double total = s.train_seconds + fit_seconds;
    const bool a = fitted.final_objective <= obj_truth + 0.02;
    const bool b = held.mean_nss - held.baseline_nss >= 0.1;
    report("synthetic-recovery", a && b && all_positive && total < 600.0,
           fmt("2000 scanpaths x 8 on 64x48; (a) fitted obj %.4f <= obj(theta*) %.4f + 0.02: %d; (b) held-out NSS %.4f - "
               "baseline %.4f = %.4f (>=0.1): %d; (c) per-position deltas%s: %d; fit w1=%.3f w2=%.3f sigma=%.3f; %.1fs "
               "single-threaded (<600s)",
               fitted.final_objective, obj_truth, a, held.mean_nss, held.baseline_nss, held.mean_nss - held.baseline_nss, b,
               deltas.c_str(), all_positive, fitted.params.w1, fitted.params.w2, fitted.params.sigma, total));
}

void nstep_degradation(const SyntheticRun& s) {
    double nss[3];
    for (std::size_t n = 1; n <= 3; ++n) {
        EvalOptions o;
        o.step_n = n;
        o.mode = NStepMode::Truncate;
        nss[n - 1] = evaluate(s.test, s.truth, default_cost_profile(), o).mean_nss;
    }
    report("n-step-degradation", nss[0] >= nss[1] && nss[1] >= nss[2],
           fmt("truncate, generating params: mean NSS n=1 %.4f, n=2 %.4f, n=3 %.4f (non-increasing)", nss[0], nss[1], nss[2]));
}

void determinism(const SyntheticRun& s) {
    EvalOptions o;
    o.dataset_id = "synthetic";
    o.model_id = "dg2";
    const std::string a = report_text(evaluate(s.test, s.truth, default_cost_profile(), o));
    o.threads = 1;
    const std::string b = report_text(evaluate(s.test, s.truth, default_cost_profile(), o));

    std::mt19937 rng(505);
    std::vector<double> vals;
    while (vals.size() < 100000) {
        const float f = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
        if (std::isfinite(f)) vals.push_back(f);
    }
    const Grid g(Dims{400, 250}, vals);
    const Grid back = decode_raster(encode_raster(g));
    std::size_t mismatched = 0;
    for (std::size_t k = 0; k < vals.size(); ++k) {
        if (std::bit_cast<std::uint64_t>(back.values()[k]) != std::bit_cast<std::uint64_t>(vals[k])) ++mismatched;
    }
    report("determinism", a == b && mismatched == 0,
           fmt("eval reports byte-identical across runs/thread counts: %d (%zu bytes); raster 1e5 values, %zu mismatched",
               a == b, a.size(), mismatched));
}

void performance(const SyntheticRun& s) {
    std::mt19937_64 rng(606);
    const Dims d{128, 128};
    std::vector<PixelCoord> h;
    for (int i = 0; i < 10; ++i) h.push_back(oracle::random_pixel(d, rng));
    const PredictionContext ctx{std::make_shared<const Grid>(oracle::random_grid(d, rng)), h,
                                find_reference("deepgaze2_individual").params, default_cost_profile()};
    double worst_ms = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        const auto t0 = Clock::now();
        const Grid v = value_map(ctx);
        worst_ms = std::max(worst_ms, 1e3 * seconds_since(t0));
        if (v.empty()) std::abort();
    }
    const auto t0 = Clock::now();
    const EvalReport r = evaluate(s.test, s.truth, default_cost_profile(), EvalOptions{});
    const double eval_s = seconds_since(t0);
    report("performance", worst_ms < 50.0 && eval_s < 60.0,
           fmt("value_map 128x128 with 10 fixations: worst of 5 %.2f ms (<50 ms); eval over %zu scanpaths (%zu targets): %.2fs (<60s)",
               worst_ms, s.test.scanpath_count(), r.sample_count, eval_s));
}

}  // namespace

int main() {
    metric_oracles();
    value_map_oracle();
    geometry_suite();
    gaussian_normalization();
    param_io();
    optimizer_sanity();
    const SyntheticRun s = make_synthetic();
    synthetic_recovery(s);
    nstep_degradation(s);
    determinism(s);
    performance(s);
    std::printf("%d failure(s)\n", failures);
    return failures;
}
