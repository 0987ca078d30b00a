#include "gazeval/eval.hpp"

#include <bit>
#include <cstdio>
#include <map>
#include <ostream>

#include "gazeval/error.hpp"
#include "gazeval/parallel.hpp"

namespace gazeval {

using nlohmann::json;

namespace {

class Fnv1a {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
    }
    void text(const std::string& s) {
        bytes(s.data(), s.size());
        bytes("\0", 1);
    }
    void real(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        bytes(&bits, sizeof bits);
    }
    void count(std::uint64_t v) { bytes(&v, sizeof v); }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
        return buf;
    }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

struct TargetScore {
    std::size_t position = 0;
    bool valid = false;
    double nss = 0.0, auc = 0.0, base_nss = 0.0, base_auc = 0.0;
};

}  // namespace

std::string dataset_digest(const Dataset& dataset) {
    Fnv1a h;
    for (const auto& img : dataset.images) {
        h.text(img.image_id);
        h.count(img.saliency->width());
        h.count(img.saliency->height());
        for (double v : img.saliency->values()) h.real(v);
        for (const auto& sp : img.scanpaths) {
            h.text(sp.subject_id);
            h.count(sp.points.size());
            for (const auto& p : sp.points) {
                h.real(p.x);
                h.real(p.y);
            }
        }
    }
    return h.hex();
}

std::string fingerprint(const ModelParams& params, const CostProfile& profile, const std::string& digest,
                        std::size_t step_n, NStepMode mode) {
    const json j{{"params", to_json(params)},
                 {"profile", to_json(profile)},
                 {"dataset", digest},
                 {"step_n", step_n},
                 {"mode", std::string(to_string(mode))}};
    Fnv1a h;
    h.text(dump_json(j, -1));
    return h.hex();
}

EvalReport evaluate(const Dataset& dataset, const ModelParams& params, const CostProfile& profile,
                    const EvalOptions& options) {
    if (options.step_n == 0) throw Error(ErrorCode::SchemaViolation, "step count must be >= 1");
    params.validate();
    profile.validate();

    struct Job {
        std::size_t image;
        const Scanpath* scanpath;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < dataset.images.size(); ++i) {
        for (const auto& sp : dataset.images[i].scanpaths) jobs.push_back({i, &sp});
    }
    if (jobs.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no scanpaths");

    const std::size_t n = options.step_n;
    const std::size_t first_target = n == 1 ? 1 : n + 1;
    std::vector<std::vector<TargetScore>> scores(jobs.size());
    parallel_for(jobs.size(), options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const ImageData& img = dataset.images[jobs[k].image];
            const auto& points = jobs[k].scanpath->points;
            const PredictionContext base{img.saliency, {}, params, profile};
            for (std::size_t pos = first_target; pos <= points.size(); ++pos) {
                TargetScore ts;
                ts.position = pos;
                const PixelCoord target = points[pos - 1];
                try {
                    const Grid v = value_map(nstep_context(points, pos, n, options.mode, base));
                    ts.nss = nss_at(v, target);
                    ts.auc = auc_at(v, target);
                    ts.base_nss = nss_at(*img.saliency, target);
                    ts.base_auc = auc_at(*img.saliency, target);
                    ts.valid = true;
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::ConstantMap) throw;
                }
                scores[k].push_back(ts);
            }
        }
    });

    EvalReport r;
    r.dataset_id = options.dataset_id;
    r.model_id = options.model_id;
    r.step_n = n;
    r.mode = options.mode;
    r.experimental = n > 3;
    std::map<std::size_t, PositionStats> by_pos;
    double sum_nss = 0.0, sum_auc = 0.0, sum_bnss = 0.0, sum_bauc = 0.0;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        for (const auto& ts : scores[k]) {
            if (!ts.valid) {
                ++r.excluded;
                continue;
            }
            ++r.sample_count;
            sum_nss += ts.nss;
            sum_auc += ts.auc;
            sum_bnss += ts.base_nss;
            sum_bauc += ts.base_auc;
            if (ts.position <= options.max_breakdown_position) {
                auto& ps = by_pos[ts.position];
                ps.position = ts.position;
                ps.mean_nss += ts.nss;
                ps.baseline_nss += ts.base_nss;
                ++ps.count;
            } else {
                r.remainder_nss_sum += ts.nss;
                ++r.remainder_count;
            }
            if (options.samples_out) {
                const auto& sp = *jobs[k].scanpath;
                options.samples_out->push_back({sp.image_id, sp.subject_id, ts.position, ts.nss, ts.auc});
            }
        }
    }
    if (r.sample_count == 0) throw Error(ErrorCode::EmptyDataset, "no scoreable targets");
    const double cnt = static_cast<double>(r.sample_count);
    r.mean_nss = sum_nss / cnt;
    r.mean_auc = sum_auc / cnt;
    r.baseline_nss = sum_bnss / cnt;
    r.baseline_auc = sum_bauc / cnt;
    for (auto& [pos, ps] : by_pos) {
        ps.mean_nss /= static_cast<double>(ps.count);
        ps.baseline_nss /= static_cast<double>(ps.count);
        ps.delta_nss = ps.mean_nss - ps.baseline_nss;
        r.per_position.push_back(ps);
    }
    r.config_fingerprint = fingerprint(params, profile, dataset_digest(dataset), n, options.mode);
    return r;
}

json to_json(const EvalReport& r) {
    json per = json::array();
    for (const auto& p : r.per_position) {
        per.push_back({{"position", p.position},
                       {"mean_nss", p.mean_nss},
                       {"baseline_nss", p.baseline_nss},
                       {"delta_nss", p.delta_nss},
                       {"count", p.count}});
    }
    return {{"dataset_id", r.dataset_id},
            {"model_id", r.model_id},
            {"step_n", r.step_n},
            {"mode", std::string(to_string(r.mode))},
            {"mean_nss", r.mean_nss},
            {"mean_auc", r.mean_auc},
            {"baseline_nss", r.baseline_nss},
            {"baseline_auc", r.baseline_auc},
            {"excluded", r.excluded},
            {"per_position", std::move(per)},
            {"remainder", {{"nss_sum", r.remainder_nss_sum}, {"count", r.remainder_count}}},
            {"sample_count", r.sample_count},
            {"experimental", r.experimental},
            {"config_fingerprint", r.config_fingerprint}};
}

EvalReport report_from_json(const json& j) {
    try {
        EvalReport r;
        r.dataset_id = j.at("dataset_id").get<std::string>();
        r.model_id = j.at("model_id").get<std::string>();
        r.step_n = j.at("step_n").get<std::size_t>();
        r.mode = parse_nstep_mode(j.at("mode").get<std::string>());
        r.mean_nss = j.at("mean_nss").get<double>();
        r.mean_auc = j.at("mean_auc").get<double>();
        r.baseline_nss = j.at("baseline_nss").get<double>();
        r.baseline_auc = j.at("baseline_auc").get<double>();
        r.excluded = j.at("excluded").get<std::size_t>();
        for (const auto& p : j.at("per_position")) {
            PositionStats ps;
            ps.position = p.at("position").get<std::size_t>();
            ps.mean_nss = p.at("mean_nss").get<double>();
            ps.baseline_nss = p.value("baseline_nss", p.at("mean_nss").get<double>() - p.at("delta_nss").get<double>());
            ps.delta_nss = p.at("delta_nss").get<double>();
            ps.count = p.at("count").get<std::size_t>();
            r.per_position.push_back(ps);
        }
        if (j.contains("remainder")) {
            r.remainder_nss_sum = j["remainder"].at("nss_sum").get<double>();
            r.remainder_count = j["remainder"].at("count").get<std::size_t>();
        }
        r.sample_count = j.at("sample_count").get<std::size_t>();
        r.experimental = j.value("experimental", r.step_n > 3);
        r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("report: ") + e.what());
    }
}

std::string report_text(const EvalReport& r) { return dump_json(to_json(r)) + "\n"; }

void write_breakdown_csv(const EvalReport& r, std::ostream& out) {
    out << "position,mean_nss,baseline_nss,delta_nss,count\n";
    char buf[128];
    for (const auto& p : r.per_position) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%zu\n", p.position, p.mean_nss, p.baseline_nss,
                      p.delta_nss, p.count);
        out << buf;
    }
}

EvalReport as_baseline(const EvalReport& r) {
    EvalReport b = r;
    b.model_id = r.model_id + "/baseline";
    b.mean_nss = r.baseline_nss;
    b.mean_auc = r.baseline_auc;
    for (auto& p : b.per_position) {
        p.mean_nss = p.baseline_nss;
        p.delta_nss = 0.0;
    }
    return b;
}

DeltaTable compare(const EvalReport& a, const EvalReport& b) {
    if (a.dataset_id != b.dataset_id || a.step_n != b.step_n || a.mode != b.mode) {
        throw Error(ErrorCode::MismatchedConfig, "reports differ in dataset, step or mode");
    }
    DeltaTable d;
    d.nss = a.mean_nss - b.mean_nss;
    d.auc = a.mean_auc - b.mean_auc;
    for (const auto& pa : a.per_position) {
        for (const auto& pb : b.per_position) {
            if (pa.position == pb.position) d.per_position.emplace_back(pa.position, pa.mean_nss - pb.mean_nss);
        }
    }
    return d;
}

json to_json(const DeltaTable& d) {
    json per = json::array();
    for (const auto& [pos, delta] : d.per_position) per.push_back({{"position", pos}, {"delta_nss", delta}});
    return {{"delta_nss", d.nss}, {"delta_auc", d.auc}, {"per_position", std::move(per)}};
}

}  // namespace gazeval
