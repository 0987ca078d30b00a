#include "gazeval/reference_params.hpp"

#include "gazeval/error.hpp"

namespace gazeval {

namespace {

ModelParams make(double w1, double w2, double sigma, std::vector<double> phis) {
    ModelParams p;
    p.w1 = w1;
    p.w2 = w2;
    p.sigma = sigma;
    p.phis = std::move(phis);
    return p;
}

const std::vector<double> kSharedPhis{0.720, 1.095, 0.906, 1.198, 1.633, 1.581, 2.298, 1.737, 2.977, 3.014};

}  // namespace

const std::vector<ReferenceModel>& individual_fits() {
    static const std::vector<ReferenceModel> fits{
        {"deepgaze2_individual", "DeepGaze II",
         make(0.345, 2.893, 34.158, {1.737, 2.087, 2.022, 2.462, 3.319, 3.376, 4.744, 5.219, 5.218, 4.374})},
        {"samresnet_individual", "SAM-ResNet",
         make(0.007, 0.003, 93.337, {0.410, 0.097, 0.031, 0.165, 0.201, 0.237, 0.407, 0.333, 0.952, -2.17})},
        {"emlnet_individual", "EML-NET",
         make(0.095, 0.481, 18.296, {0.155, 0.790, 0.427, 0.748, 1.081, 1.104, 1.449, -0.22, 2.553, 4.523})},
        {"casnet2_individual", "CASNet II",
         make(0.157, 0.851, 22.328, {0.580, 1.408, 1.142, 1.419, 1.930, 1.608, 2.592, 1.616, 3.185, 5.331})},
    };
    return fits;
}

const std::vector<ReferenceModel>& shared_phi_fits() {
    static const std::vector<ReferenceModel> fits{
        {"deepgaze2_shared", "DeepGaze II", make(0.351, 1.989, 33.632, kSharedPhis)},
        {"samresnet_shared", "SAM-ResNet", make(0.110, 0.510, 26.742, kSharedPhis)},
        {"emlnet_shared", "EML-NET", make(0.095, 0.619, 21.553, kSharedPhis)},
        {"casnet2_shared", "CASNet II", make(0.160, 1.134, 25.961, kSharedPhis)},
        {"unisal_shared", "UNISAL", make(0.061, 0.483, 12.643, kSharedPhis)},
    };
    return fits;
}

const ReferenceModel& find_reference(const std::string& id) {
    for (const auto* set : {&individual_fits(), &shared_phi_fits()}) {
        for (const auto& m : *set) {
            if (m.id == id) return m;
        }
    }
    throw Error(ErrorCode::SchemaViolation, "unknown reference model: " + id);
}

std::vector<double> average_phis(std::span<const ModelParams> models, std::span<const double> weights) {
    if (models.empty()) throw Error(ErrorCode::EmptyDataset, "no models to average");
    if (!weights.empty() && weights.size() != models.size()) {
        throw Error(ErrorCode::DimensionMismatch, "one weight per model required");
    }
    const std::size_t k = models.front().phis.size();
    std::vector<double> out(k, 0.0);
    double total = 0.0;
    for (std::size_t m = 0; m < models.size(); ++m) {
        if (models[m].phis.size() != k) throw Error(ErrorCode::DimensionMismatch, "phi vectors differ in length");
        const double w = weights.empty() ? 1.0 : weights[m];
        for (std::size_t i = 0; i < k; ++i) out[i] += w * models[m].phis[i];
        total += w;
    }
    if (!(total > 0.0)) throw Error(ErrorCode::SchemaViolation, "weights must sum to a positive value");
    for (double& v : out) v /= total;
    return out;
}

}  // namespace gazeval
