#pragma once

#include <span>
#include <string>
#include <vector>

#include "gazeval/params.hpp"

namespace gazeval {

struct ReferenceModel {
    std::string id;           // e.g. "deepgaze2_individual"
    std::string saliency_model;
    ModelParams params;
    double sample_weight = 1.0;  // relative size of the fitting set, when known
};

/// Published fits with one phi vector per saliency model.
const std::vector<ReferenceModel>& individual_fits();

/// Published fits with a single phi vector shared across saliency models.
const std::vector<ReferenceModel>& shared_phi_fits();

const ReferenceModel& find_reference(const std::string& id);

/// Elementwise mean of the phi vectors. With weights, a weighted mean.
std::vector<double> average_phis(std::span<const ModelParams> models, std::span<const double> weights = {});

}  // namespace gazeval
