#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace gazeval {

/// Which exploration weight a past fixation receives.
///  lag:      phis[k] for the fixation made k steps before the current one
///  absolute: phis[i] for the i-th fixation of the scanpath
enum class PhiIndexing { Lag, Absolute };

std::string_view to_string(PhiIndexing mode) noexcept;
PhiIndexing parse_phi_indexing(std::string_view text);

struct ModelParams {
    double w0 = 1.0;
    double w1 = 0.0;
    double w2 = 0.0;
    double sigma = 1.0;  // Gaussian std in working-resolution pixels
    std::vector<double> phis;
    PhiIndexing phi_indexing = PhiIndexing::Lag;

    /// Throws NonPositiveSigma or SchemaViolation.
    void validate() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Oculomotor preference profile. The amplitude term is a binned table
/// interpolated linearly between bin midpoints; psi1/psi2 weight the
/// relative and absolute saccade angles in radians. Values enter the value
/// map with their stored sign.
struct CostProfile {
    double pixels_per_degree = 1.0;
    std::vector<double> amplitude_bin_edges;
    std::vector<double> amplitude_values;
    double psi1 = 0.0;
    double psi2 = 0.0;

    void validate() const;

    friend bool operator==(const CostProfile&, const CostProfile&) = default;
};

nlohmann::json to_json(const ModelParams& p);
nlohmann::json to_json(const CostProfile& p);

/// Throws SchemaViolation / NonPositiveSigma. Omitted w0 and phi_indexing
/// default to 1.0 and lag.
ModelParams params_from_json(const nlohmann::json& j);
CostProfile profile_from_json(const nlohmann::json& j);

ModelParams load_params(const std::filesystem::path& path);
CostProfile load_profile(const std::filesystem::path& path);
void save_params(const ModelParams& p, const std::filesystem::path& path);
void save_profile(const CostProfile& p, const std::filesystem::path& path);

/// Serializes JSON with every floating-point number written with 17
/// significant digits.
std::string dump_json(const nlohmann::json& j, int indent = 2);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace gazeval
