// gazeval: command-line front end for conversion, prediction, evaluation,
// fitting and the explorer service.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "gazeval/cost.hpp"
#include "gazeval/error.hpp"
#include "gazeval/eval.hpp"
#include "gazeval/fitting.hpp"
#include "gazeval/raster.hpp"
#include "gazeval/reference_params.hpp"
#include "gazeval/scanpath.hpp"
#include "gazeval/service.hpp"
#include "gazeval/synthetic.hpp"
#include "gazeval/value_engine.hpp"

namespace fs = std::filesystem;
using namespace gazeval;
using nlohmann::json;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kNumeric = 3;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("gazeval");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("GAZEVAL_LOG")) {
        spdlog::set_level(spdlog::level::from_str(env));
    }
}

CostProfile profile_or_default(const std::string& path) {
    return path.empty() ? default_cost_profile() : load_profile(path);
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        write_text_file(out_path, text);
    }
}

std::vector<double> phis_from_file(const fs::path& path) {
    const json j = read_json_file(path);
    if (j.is_array()) return j.get<std::vector<double>>();
    if (j.is_object() && j.contains("phis")) return j.at("phis").get<std::vector<double>>();
    throw Error(ErrorCode::SchemaViolation, path.string() + ": expected a phi array or params with phis");
}

struct ConvertArgs {
    std::string in, out;
    std::size_t downscale = 1;
};

int run_convert(const ConvertArgs& a) {
    Grid g = load_map(a.in);
    if (a.downscale > 1) g = downscale_bilinear(g, a.downscale);
    write_raster(g, fs::path(a.out));
    spdlog::info("wrote {} ({}x{})", a.out, g.width(), g.height());
    return 0;
}

struct PredictArgs {
    std::string saliency, scanpath, params, profile, out, image, subject;
    std::size_t downscale = 1;
    bool print_prediction = false;
};

int run_predict(const PredictArgs& a) {
    PredictionContext ctx;
    ctx.saliency = std::make_shared<const Grid>(load_map(a.saliency));
    ctx.params = load_params(a.params);
    ctx.profile = profile_or_default(a.profile);
    if (!a.scanpath.empty()) {
        std::vector<Scanpath> all = parse_scanpaths(fs::path(a.scanpath));
        std::erase_if(all, [&](const Scanpath& s) {
            return (!a.image.empty() && s.image_id != a.image) || (!a.subject.empty() && s.subject_id != a.subject);
        });
        if (all.size() != 1) {
            throw Error(ErrorCode::SchemaViolation,
                        "scanpath file must select exactly one scanpath (use --image/--subject); matched " +
                            std::to_string(all.size()));
        }
        ctx.history = to_working(all.front(), a.downscale, ctx.dims()).points;
    }
    const Grid v = value_map(ctx);
    if (!a.out.empty()) write_raster(v, fs::path(a.out));
    if (a.print_prediction || a.out.empty()) {
        const PixelCoord p = argmax(v);
        std::cout << dump_json(json{{"x", p.x}, {"y", p.y}}, -1) << "\n";
    }
    return 0;
}

struct EvalArgs {
    std::string manifest, params, profile, report, mode = "truncate", dataset_id, model_id, csv;
    std::size_t steps = 1, threads = 0;
    std::uint64_t seed = 0;
    bool strict = false;
};

int run_eval(const EvalArgs& a) {
    const Dataset ds = load_dataset(load_manifest(a.manifest), a.strict);
    EvalOptions o;
    o.step_n = a.steps;
    o.mode = parse_nstep_mode(a.mode);
    o.threads = a.threads;
    o.dataset_id = a.dataset_id.empty() ? fs::path(a.manifest).stem().string() : a.dataset_id;
    o.model_id = a.model_id.empty() ? fs::path(a.params).stem().string() : a.model_id;
    if (a.steps > 3) spdlog::warn("step count {} is outside the evaluated range 1..3; report flagged experimental", a.steps);
    const EvalReport r = evaluate(ds, load_params(a.params), profile_or_default(a.profile), o);
    emit(report_text(r), a.report);
    if (!a.csv.empty()) {
        std::ofstream out(a.csv, std::ios::binary);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + a.csv);
        write_breakdown_csv(r, out);
    }
    spdlog::info("mean NSS {:.4f} (baseline {:.4f}) over {} targets, {} excluded", r.mean_nss, r.baseline_nss,
                 r.sample_count, r.excluded);
    return 0;
}

struct FitArgs {
    std::string manifest, profile, config, init, fixed_phis, out, trace;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
};

int run_fit(const FitArgs& a) {
    FitConfig cfg = a.config.empty() ? FitConfig{} : fit_config_from_json(read_json_file(a.config));
    if (a.samples) cfg.sample_count = *a.samples;
    if (a.seed) cfg.seed = *a.seed;
    if (a.threads) cfg.threads = a.threads;
    if (!a.init.empty()) cfg.init = load_params(a.init);
    if (!a.fixed_phis.empty()) {
        cfg.init.phis = phis_from_file(a.fixed_phis);
        cfg.free_phis = false;
    }
    const FitResult r = fit(load_dataset(load_manifest(a.manifest)), profile_or_default(a.profile), cfg);
    spdlog::info("fit stopped by {} after {} iterations, {} evaluations; objective {:.6f} -> {:.6f}",
                 to_string(r.converged_by), r.iterations, r.evaluations, r.initial_objective, r.final_objective);
    emit(dump_json(to_json(r.params)) + "\n", a.out);
    if (!a.trace.empty()) write_text_file(a.trace, dump_json(to_json(r)) + "\n");
    return 0;
}

struct BreakdownArgs {
    std::string report, against, out;
};

int run_breakdown(const BreakdownArgs& a) {
    const EvalReport r = report_from_json(read_json_file(a.report));
    std::ostringstream text;
    if (a.against.empty()) {
        write_breakdown_csv(r, text);
    } else {
        const DeltaTable d = compare(r, report_from_json(read_json_file(a.against)));
        text << "position,delta_nss\n";
        char buf[64];
        for (const auto& [pos, delta] : d.per_position) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", pos, delta);
            text << buf;
        }
        std::snprintf(buf, sizeof buf, "all,%.17g\n", d.nss);
        text << buf;
    }
    emit(text.str(), a.out);
    return 0;
}

struct ServeArgs {
    std::string host = "127.0.0.1", profile;
    int port = 8080;
    std::size_t idle_minutes = 30;
};

int run_serve(const ServeArgs& a) {
    ServiceConfig cfg;
    cfg.idle_timeout = std::chrono::minutes(a.idle_minutes);
    cfg.default_profile = profile_or_default(a.profile);
    SessionService service(cfg);
    spdlog::warn("listening on http://{}:{}", a.host, a.port);
    if (!serve_http(service, a.host, a.port)) {
        spdlog::error("cannot bind {}:{}", a.host, a.port);
        return kData;
    }
    return 0;
}

struct SynthArgs {
    std::string out_dir, params = "deepgaze2_individual", profile;
    SyntheticConfig cfg;
};

int run_synth(SynthArgs a) {
    const ModelParams p = fs::exists(a.params) ? load_params(a.params) : find_reference(a.params).params;
    const Dataset ds = generate_synthetic(a.cfg, p, profile_or_default(a.profile));
    const fs::path manifest = write_dataset(ds, a.out_dir);
    std::cout << manifest.string() << "\n";
    return 0;
}

struct AverageArgs {
    std::vector<std::string> params;
    std::vector<double> weights;
    std::string out;
};

int run_average(const AverageArgs& a) {
    std::vector<ModelParams> models;
    for (const auto& p : a.params) models.push_back(load_params(p));
    emit(dump_json(json(average_phis(models, a.weights))) + "\n", a.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Dynamic saliency value-map model: evaluation, fitting and exploration"};
    app.require_subcommand(1);
    app.fallthrough();
    std::size_t global_threads = 0;
    app.add_option("--threads", global_threads, "Worker threads (0 = all cores)");

    ConvertArgs conv;
    auto* c = app.add_subcommand("convert", "Import a PGM or SMR map and write SMR");
    c->add_option("--in", conv.in, "Input map (.pgm or .smr)")->required()->check(CLI::ExistingFile);
    c->add_option("--out", conv.out, "Output SMR path")->required();
    c->add_option("--downscale", conv.downscale, "Bilinear downscale factor")->check(CLI::PositiveNumber);

    PredictArgs pred;
    auto* p = app.add_subcommand("predict", "Value map and greedy next fixation for a scanpath prefix");
    p->add_option("--saliency", pred.saliency, "Saliency map at working resolution")->required()->check(CLI::ExistingFile);
    p->add_option("--scanpath", pred.scanpath, "Scanpath CSV holding the prefix")->check(CLI::ExistingFile);
    p->add_option("--image", pred.image, "Select scanpath by image id");
    p->add_option("--subject", pred.subject, "Select scanpath by subject id");
    p->add_option("--downscale", pred.downscale, "Divide scanpath coordinates by this factor")->check(CLI::PositiveNumber);
    p->add_option("--params", pred.params, "Params JSON")->required()->check(CLI::ExistingFile);
    p->add_option("--profile", pred.profile, "Cost profile JSON")->check(CLI::ExistingFile);
    p->add_option("--out", pred.out, "Write the value map (SMR)");
    p->add_flag("--print-prediction", pred.print_prediction, "Print the predicted coordinate as JSON");

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Score a dataset and write the report");
    e->add_option("--manifest", ev.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    e->add_option("--params", ev.params, "Params JSON")->required()->check(CLI::ExistingFile);
    e->add_option("--profile", ev.profile, "Cost profile JSON")->check(CLI::ExistingFile);
    e->add_option("--steps", ev.steps, "Steps ahead (1..3; more is experimental)")->check(CLI::PositiveNumber);
    e->add_option("--mode", ev.mode, "n-step mode")->check(CLI::IsMember({"truncate", "rollout"}));
    e->add_option("--report", ev.report, "Report JSON path (default stdout)");
    e->add_option("--csv", ev.csv, "Also write the per-position CSV");
    e->add_option("--dataset-id", ev.dataset_id, "Dataset id in the report");
    e->add_option("--model-id", ev.model_id, "Model id in the report");
    e->add_option("--seed", ev.seed, "Accepted for reproducible pipelines; evaluation is deterministic");
    e->add_flag("--strict", ev.strict, "Reject out-of-bounds fixations instead of clamping");

    FitArgs ft;
    auto* f = app.add_subcommand("fit", "Fit parameters by maximizing one-step NSS");
    f->add_option("--manifest", ft.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    f->add_option("--profile", ft.profile, "Cost profile JSON")->check(CLI::ExistingFile);
    f->add_option("--config", ft.config, "Fit config JSON")->check(CLI::ExistingFile);
    f->add_option("--init", ft.init, "Initial params JSON")->check(CLI::ExistingFile);
    f->add_option("--samples", ft.samples, "Training targets drawn")->check(CLI::PositiveNumber);
    f->add_option("--seed", ft.seed, "Sampling seed");
    f->add_option("--fixed-phis", ft.fixed_phis, "Hold phis fixed (JSON array or params file)")->check(CLI::ExistingFile);
    f->add_option("--out", ft.out, "Fitted params JSON (default stdout)");
    f->add_option("--trace", ft.trace, "Write the full fit result with objective trace");

    BreakdownArgs br;
    auto* b = app.add_subcommand("breakdown", "Per-position CSV from a report, or deltas between two reports");
    b->add_option("--report", br.report, "Report JSON")->required()->check(CLI::ExistingFile);
    b->add_option("--against", br.against, "Second report; output is report - against")->check(CLI::ExistingFile);
    b->add_option("--out", br.out, "CSV path (default stdout)");

    ServeArgs sv;
    auto* s = app.add_subcommand("serve", "Run the explorer session service");
    s->add_option("--host", sv.host, "Bind address");
    s->add_option("--port", sv.port, "Port")->check(CLI::Range(1, 65535));
    s->add_option("--profile", sv.profile, "Default cost profile JSON")->check(CLI::ExistingFile);
    s->add_option("--idle-timeout", sv.idle_minutes, "Session idle timeout in minutes");

    SynthArgs sy;
    auto* y = app.add_subcommand("synth", "Write a dataset sampled from the model itself");
    y->add_option("--out-dir", sy.out_dir, "Output directory")->required();
    y->add_option("--params", sy.params, "Params JSON or reference id");
    y->add_option("--profile", sy.profile, "Cost profile JSON")->check(CLI::ExistingFile);
    y->add_option("--images", sy.cfg.images, "Images");
    y->add_option("--per-image", sy.cfg.scanpaths_per_image, "Scanpaths per image");
    y->add_option("--length", sy.cfg.length, "Fixations per scanpath");
    y->add_option("--width", sy.cfg.dims.width, "Grid width");
    y->add_option("--height", sy.cfg.dims.height, "Grid height");
    y->add_option("--beta", sy.cfg.beta, "Softmax inverse temperature");
    y->add_option("--seed", sy.cfg.seed, "Seed");

    AverageArgs av;
    auto* a = app.add_subcommand("average-phis", "Elementwise mean of the phi vectors of several params files");
    a->add_option("params", av.params, "Params JSON files")->required()->check(CLI::ExistingFile);
    a->add_option("--weights", av.weights, "One weight per file");
    a->add_option("--out", av.out, "Output JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? 0 : kUsage;
    }

    ev.threads = global_threads;
    ft.threads = global_threads;
    try {
        if (*c) return run_convert(conv);
        if (*p) return run_predict(pred);
        if (*e) return run_eval(ev);
        if (*f) return run_fit(ft);
        if (*b) return run_breakdown(br);
        if (*s) return run_serve(sv);
        if (*y) return run_synth(sy);
        if (*a) return run_average(av);
    } catch (const Error& err) {
        spdlog::error("{}", err.what());
        return is_numeric(err.code()) ? kNumeric : kData;
    } catch (const std::exception& err) {
        spdlog::error("{}", err.what());
        return kData;
    }
    return kUsage;
}
