#include "gazeval/synthetic.hpp"

#include <cmath>
#include <fstream>

#include "gazeval/error.hpp"
#include "gazeval/raster.hpp"
#include "gazeval/value_engine.hpp"

namespace gazeval {

namespace fs = std::filesystem;

Grid random_blob_saliency(Dims dims, std::mt19937_64& rng, std::size_t blobs) {
    std::uniform_real_distribution<double> ux(0.0, static_cast<double>(dims.width - 1));
    std::uniform_real_distribution<double> uy(0.0, static_cast<double>(dims.height - 1));
    const double scale = static_cast<double>(std::min(dims.width, dims.height));
    std::uniform_real_distribution<double> usig(0.06 * scale, 0.2 * scale);
    std::uniform_real_distribution<double> uamp(0.3, 1.0);

    Grid g(dims, 0.02);
    for (std::size_t b = 0; b < blobs; ++b) {
        const double cx = ux(rng), cy = uy(rng), s = usig(rng), a = uamp(rng);
        for (std::size_t y = 0; y < dims.height; ++y) {
            for (std::size_t x = 0; x < dims.width; ++x) {
                const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
                g(x, y) += a * std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
            }
        }
    }
    double total = 0.0;
    for (double v : g.values()) total += v;
    for (double& v : g.values()) v /= total;
    return g;
}

namespace {

PixelCoord sample_pixel(const Grid& v, double beta, std::mt19937_64& rng) {
    const auto [mean, sd] = mean_std(v);
    std::vector<double> w(v.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        w[k] = sd > 0.0 ? std::exp(beta * (v.values()[k] - mean) / sd) : 1.0;
    }
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    const std::size_t k = pick(rng);
    return {static_cast<double>(k % v.width()), static_cast<double>(k / v.width())};
}

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& config, const ModelParams& params, const CostProfile& profile) {
    params.validate();
    profile.validate();
    if (config.dims.size() == 0) throw Error(ErrorCode::ZeroDimension, "synthetic grid has zero size");
    std::mt19937_64 rng(config.seed);
    Dataset ds;
    for (std::size_t i = 0; i < config.images; ++i) {
        ImageData img;
        char id[32];
        std::snprintf(id, sizeof id, "img%04zu", i);
        img.image_id = id;
        img.saliency = std::make_shared<const Grid>(random_blob_saliency(config.dims, rng, config.blobs));
        for (std::size_t s = 0; s < config.scanpaths_per_image; ++s) {
            char sid[32];
            std::snprintf(sid, sizeof sid, "s%02zu", s);
            PredictionContext ctx{img.saliency, {}, params, profile};
            for (std::size_t k = 0; k < config.length; ++k) {
                ctx.history.push_back(sample_pixel(value_map(ctx), config.beta, rng));
            }
            img.scanpaths.push_back({img.image_id, sid, std::move(ctx.history)});
        }
        ds.images.push_back(std::move(img));
    }
    return ds;
}

fs::path write_dataset(const Dataset& dataset, const fs::path& dir) {
    fs::create_directories(dir / "maps");
    DatasetManifest m;
    m.downscale_factor = 1;
    std::vector<Scanpath> all;
    for (const auto& img : dataset.images) {
        const fs::path rel = fs::path("maps") / (img.image_id + ".smr");
        write_raster(*img.saliency, dir / rel);
        m.entries.push_back({img.image_id, rel, img.saliency->width(), img.saliency->height(), "scanpaths.csv"});
        all.insert(all.end(), img.scanpaths.begin(), img.scanpaths.end());
    }
    {
        std::ofstream out(dir / "scanpaths.csv", std::ios::binary);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / "scanpaths.csv").string());
        write_scanpaths(all, out);
    }
    const fs::path manifest = dir / "manifest.json";
    save_manifest(m, manifest);
    return manifest;
}

}  // namespace gazeval
