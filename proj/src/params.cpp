#include "gazeval/params.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gazeval/error.hpp"

namespace gazeval {

using nlohmann::json;

std::string_view to_string(PhiIndexing mode) noexcept {
    return mode == PhiIndexing::Lag ? "lag" : "absolute";
}

PhiIndexing parse_phi_indexing(std::string_view text) {
    if (text == "lag") return PhiIndexing::Lag;
    if (text == "absolute") return PhiIndexing::Absolute;
    throw Error(ErrorCode::SchemaViolation, "phi_indexing must be \"lag\" or \"absolute\"");
}

void ModelParams::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::NonPositiveSigma, "sigma must be > 0");
    if (phis.empty()) throw Error(ErrorCode::SchemaViolation, "phis must not be empty");
    for (double v : {w0, w1, w2}) {
        if (!std::isfinite(v)) throw Error(ErrorCode::SchemaViolation, "weights must be finite");
    }
    for (double v : phis) {
        if (!std::isfinite(v)) throw Error(ErrorCode::SchemaViolation, "phis must be finite");
    }
}

void CostProfile::validate() const {
    if (!(pixels_per_degree > 0.0) || !std::isfinite(pixels_per_degree)) {
        throw Error(ErrorCode::SchemaViolation, "pixels_per_degree must be > 0");
    }
    if (amplitude_values.empty()) throw Error(ErrorCode::SchemaViolation, "amplitude table is empty");
    if (amplitude_bin_edges.size() != amplitude_values.size() + 1) {
        throw Error(ErrorCode::SchemaViolation, "amplitude bin_edges must have one more entry than values");
    }
    for (std::size_t k = 0; k < amplitude_bin_edges.size(); ++k) {
        if (!std::isfinite(amplitude_bin_edges[k])) throw Error(ErrorCode::SchemaViolation, "non-finite bin edge");
        if (k > 0 && !(amplitude_bin_edges[k] > amplitude_bin_edges[k - 1])) {
            throw Error(ErrorCode::SchemaViolation, "bin edges must be strictly ascending");
        }
    }
    for (double v : amplitude_values) {
        if (!std::isfinite(v)) throw Error(ErrorCode::SchemaViolation, "non-finite amplitude value");
    }
    if (!std::isfinite(psi1) || !std::isfinite(psi2)) throw Error(ErrorCode::SchemaViolation, "psi weights must be finite");
}

json to_json(const ModelParams& p) {
    return json{{"w0", p.w0},       {"w1", p.w1},     {"w2", p.w2},
                {"sigma", p.sigma}, {"phis", p.phis}, {"phi_indexing", std::string(to_string(p.phi_indexing))}};
}

json to_json(const CostProfile& p) {
    return json{{"pixels_per_degree", p.pixels_per_degree},
                {"amplitude", {{"bin_edges", p.amplitude_bin_edges}, {"values", p.amplitude_values}}},
                {"psi1", p.psi1},
                {"psi2", p.psi2}};
}

namespace {

double number(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::SchemaViolation, std::string("missing field '") + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number()) throw Error(ErrorCode::SchemaViolation, std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

std::vector<double> number_array(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::SchemaViolation, std::string("missing field '") + key + "'");
    const auto& v = j.at(key);
    if (!v.is_array()) throw Error(ErrorCode::SchemaViolation, std::string("field '") + key + "' must be an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number()) throw Error(ErrorCode::SchemaViolation, std::string("'") + key + "' holds a non-number");
        out.push_back(e.get<double>());
    }
    return out;
}

void reject_unknown(const json& j, std::initializer_list<const char*> known) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw Error(ErrorCode::SchemaViolation, "unknown field '" + key + "'");
    }
}

}  // namespace

ModelParams params_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "params must be a JSON object");
    reject_unknown(j, {"w0", "w1", "w2", "sigma", "phis", "phi_indexing"});
    ModelParams p;
    if (j.contains("w0")) {
        p.w0 = number(j, "w0");
        if (p.w0 != 1.0) throw Error(ErrorCode::SchemaViolation, "w0 is fixed to 1.0");
    }
    p.w1 = number(j, "w1");
    p.w2 = number(j, "w2");
    p.sigma = number(j, "sigma");
    p.phis = number_array(j, "phis");
    if (j.contains("phi_indexing")) {
        if (!j["phi_indexing"].is_string()) throw Error(ErrorCode::SchemaViolation, "phi_indexing must be a string");
        p.phi_indexing = parse_phi_indexing(j["phi_indexing"].get<std::string>());
    }
    p.validate();
    return p;
}

CostProfile profile_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "profile must be a JSON object");
    reject_unknown(j, {"pixels_per_degree", "amplitude", "psi1", "psi2"});
    CostProfile p;
    if (j.contains("pixels_per_degree")) p.pixels_per_degree = number(j, "pixels_per_degree");
    if (!j.contains("amplitude") || !j["amplitude"].is_object()) {
        throw Error(ErrorCode::SchemaViolation, "missing object 'amplitude'");
    }
    p.amplitude_bin_edges = number_array(j["amplitude"], "bin_edges");
    p.amplitude_values = number_array(j["amplitude"], "values");
    p.psi1 = number(j, "psi1");
    p.psi2 = number(j, "psi2");
    p.validate();
    return p;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot create " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

ModelParams load_params(const std::filesystem::path& path) { return params_from_json(read_json_file(path)); }
CostProfile load_profile(const std::filesystem::path& path) { return profile_from_json(read_json_file(path)); }

void save_params(const ModelParams& p, const std::filesystem::path& path) {
    write_text_file(path, dump_json(to_json(p)) + "\n");
}

void save_profile(const CostProfile& p, const std::filesystem::path& path) {
    write_text_file(path, dump_json(to_json(p)) + "\n");
}

namespace {

void dump_impl(const json& j, int indent, int depth, std::string& out) {
    const auto newline = [&](int d) {
        if (indent < 0) return;
        out.push_back('\n');
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
        case json::value_t::number_float: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
            out += buf;
            break;
        }
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                break;
            }
            out.push_back('{');
            bool first = true;
            for (const auto& [key, value] : j.items()) {
                if (!first) out.push_back(',');
                first = false;
                newline(depth + 1);
                out += json(key).dump();
                out += indent < 0 ? ":" : ": ";
                dump_impl(value, indent, depth + 1, out);
            }
            newline(depth);
            out.push_back('}');
            break;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                break;
            }
            out.push_back('[');
            bool first = true;
            for (const auto& value : j) {
                if (!first) out.push_back(',');
                first = false;
                newline(depth + 1);
                dump_impl(value, indent, depth + 1, out);
            }
            newline(depth);
            out.push_back(']');
            break;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

std::string dump_json(const json& j, int indent) {
    std::string out;
    dump_impl(j, indent, 0, out);
    return out;
}

}  // namespace gazeval
