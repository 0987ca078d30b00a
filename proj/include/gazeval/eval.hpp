#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "gazeval/dataset.hpp"
#include "gazeval/metrics.hpp"
#include "gazeval/params.hpp"
#include "gazeval/value_engine.hpp"

namespace gazeval {

struct PositionStats {
    std::size_t position = 0;
    double mean_nss = 0.0;
    double baseline_nss = 0.0;
    double delta_nss = 0.0;  // mean_nss - baseline_nss
    std::size_t count = 0;
};

struct EvalReport {
    std::string dataset_id;
    std::string model_id;
    std::size_t step_n = 1;
    NStepMode mode = NStepMode::Truncate;
    double mean_nss = 0.0;
    double mean_auc = 0.0;
    double baseline_nss = 0.0;
    double baseline_auc = 0.0;
    std::size_t excluded = 0;             // samples with a constant map
    std::vector<PositionStats> per_position;  // positions 1..10 that have samples
    std::size_t sample_count = 0;         // scored samples
    // Sums over positions past 10, kept for the accounting identity.
    double remainder_nss_sum = 0.0;
    std::size_t remainder_count = 0;
    bool experimental = false;            // step_n > 3
    std::string config_fingerprint;
};

struct EvalOptions {
    std::size_t step_n = 1;
    NStepMode mode = NStepMode::Truncate;
    std::string dataset_id = "dataset";
    std::string model_id = "model";
    std::size_t threads = 0;
    std::size_t max_breakdown_position = 10;
    /// Keep individual ScoreSamples in the output vector (if non-null).
    std::vector<ScoreSample>* samples_out = nullptr;
};

/// Scores every eligible target of every scanpath with the n-step value map
/// and with the raw saliency map. With n = 1 every fixation is a target (the
/// first one against pure saliency); with n > 1 targets start at position
/// n + 1. Aggregates are plain means in dataset order. Throws EmptyDataset.
EvalReport evaluate(const Dataset& dataset, const ModelParams& params, const CostProfile& profile,
                    const EvalOptions& options);

/// Digest of map values and fixations, used in report fingerprints.
std::string dataset_digest(const Dataset& dataset);

std::string fingerprint(const ModelParams& params, const CostProfile& profile, const std::string& dataset_digest,
                        std::size_t step_n, NStepMode mode);

nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);
std::string report_text(const EvalReport& r);

/// Per-position CSV: position,mean_nss,baseline_nss,delta_nss,count
void write_breakdown_csv(const EvalReport& r, std::ostream& out);

/// The report's baseline columns presented as model columns.
EvalReport as_baseline(const EvalReport& r);

struct DeltaTable {
    double nss = 0.0;
    double auc = 0.0;
    std::vector<std::pair<std::size_t, double>> per_position;  // (position, delta mean_nss)
};

/// a - b, aggregate and per position. Throws MismatchedConfig unless both
/// reports share dataset, step and mode.
DeltaTable compare(const EvalReport& a, const EvalReport& b);
nlohmann::json to_json(const DeltaTable& d);

}  // namespace gazeval
