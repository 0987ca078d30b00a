#include "gazeval/value_engine.hpp"

#include <array>

#include "gazeval/cost.hpp"
#include "gazeval/error.hpp"
#include "gazeval/exploration.hpp"

namespace gazeval {

PixelCoord center_prior(Dims dims) noexcept {
    return {(static_cast<double>(dims.width) - 1.0) / 2.0, (static_cast<double>(dims.height) - 1.0) / 2.0};
}

ValueMaps compute_maps(const PredictionContext& ctx) {
    const Grid& s = *ctx.saliency;
    const Dims dims = s.dims();
    if (ctx.history.empty()) return {Grid(dims), Grid(dims), s};
    for (const auto& p : ctx.history) {
        if (!contains(dims, p)) throw Error(ErrorCode::OutOfBoundsFixation, "history point outside the saliency map");
    }
    const PixelCoord cur = ctx.history.back();
    const PixelCoord prev = ctx.history.size() >= 2 ? ctx.history[ctx.history.size() - 2] : center_prior(dims);

    ValueMaps maps{cost_map(dims, prev, cur, ctx.profile),
                   exploration_map(dims, ctx.history, ExplorationParams::from(ctx.params)), Grid()};
    const std::array<Term, 3> terms{
        Term{ctx.params.w0, &s}, Term{ctx.params.w1, &maps.cost}, Term{ctx.params.w2, &maps.exploration}};
    maps.value = lincomb(terms);
    return maps;
}

Grid value_map(const PredictionContext& ctx) {
    if (ctx.history.empty()) return *ctx.saliency;
    return std::move(compute_maps(ctx).value);
}

PixelCoord predict_next(const PredictionContext& ctx) { return argmax(value_map(ctx)); }

std::string_view to_string(NStepMode mode) noexcept { return mode == NStepMode::Truncate ? "truncate" : "rollout"; }

NStepMode parse_nstep_mode(std::string_view text) {
    if (text == "truncate") return NStepMode::Truncate;
    if (text == "rollout") return NStepMode::Rollout;
    throw Error(ErrorCode::SchemaViolation, "mode must be \"truncate\" or \"rollout\"");
}

PredictionContext nstep_context(std::span<const PixelCoord> scanpath, std::size_t target_index, std::size_t n,
                                NStepMode mode, const PredictionContext& base) {
    if (n == 0) throw Error(ErrorCode::InsufficientHistory, "n must be >= 1");
    if (target_index == 0 || target_index > scanpath.size()) {
        throw Error(ErrorCode::InsufficientHistory, "target index outside the scanpath");
    }
    if (target_index < n) throw Error(ErrorCode::InsufficientHistory, "target precedes the n-step horizon");

    PredictionContext ctx = base;
    ctx.history.assign(scanpath.begin(), scanpath.begin() + static_cast<std::ptrdiff_t>(target_index - n));
    if (mode == NStepMode::Rollout) {
        for (std::size_t step = 1; step < n; ++step) ctx.history.push_back(predict_next(ctx));
    }
    return ctx;
}

}  // namespace gazeval
