#include "gazeval/service.hpp"

#include <cstdio>
#include <random>
#include <vector>

#include <openssl/evp.h>

#include "gazeval/error.hpp"
#include "gazeval/raster.hpp"

namespace gazeval {

using nlohmann::json;

namespace {

struct HttpError {
    int status;
    std::string message;
};

ServiceResponse error_response(int status, const std::string& message) {
    return {status, json{{"error", message}}};
}

std::string decode_base64(const std::string& text) {
    std::string clean;
    for (char ch : text) {
        if (ch != '\n' && ch != '\r' && ch != ' ') clean.push_back(ch);
    }
    if (clean.size() % 4 != 0) throw HttpError{400, "smr_base64 is not valid base64"};
    std::string out(clean.size() / 4 * 3, '\0');
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(clean.data()), static_cast<int>(clean.size()));
    if (n < 0) throw HttpError{400, "smr_base64 is not valid base64"};
    std::size_t pad = 0;
    if (!clean.empty() && clean.back() == '=') ++pad;
    if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

Grid saliency_from_json(const json& j) {
    if (!j.is_object()) throw HttpError{400, "saliency must be an object"};
    if (j.contains("smr_base64")) return decode_raster(decode_base64(j.at("smr_base64").get<std::string>()));
    const auto w = j.at("width").get<std::size_t>();
    const auto h = j.at("height").get<std::size_t>();
    return Grid(Dims{w, h}, j.at("values").get<std::vector<double>>());
}

json map_json(const Grid& g) {
    return {{"width", g.width()}, {"height", g.height()}, {"values", g.values()}, {"min", g.min()}, {"max", g.max()}};
}

PixelCoord fixation_from_json(const json& j) {
    if (!j.is_object() || !j.contains("x") || !j.contains("y")) throw HttpError{400, "fixation needs x and y"};
    for (const auto& [key, _] : j.items()) {
        if (key != "x" && key != "y" && key != "expected_revision") throw HttpError{400, "unknown field: " + key};
    }
    return {j.at("x").get<double>(), j.at("y").get<double>()};
}

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::Io:
            return 500;
        default:
            return 400;
    }
}

std::vector<std::string_view> split_path(std::string_view path) {
    if (auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
    std::vector<std::string_view> parts;
    while (!path.empty()) {
        while (!path.empty() && path.front() == '/') path.remove_prefix(1);
        const auto slash = path.find('/');
        auto part = path.substr(0, slash);
        if (!part.empty()) parts.push_back(part);
        path = slash == std::string_view::npos ? std::string_view{} : path.substr(slash);
    }
    return parts;
}

}  // namespace

SessionService::SessionService(ServiceConfig config)
    : config_(std::move(config)), now_([] { return Clock::now(); }), id_state_(std::random_device{}()) {
    id_state_ = (id_state_ << 32) ^ std::random_device{}();
}

void SessionService::set_clock(std::function<Clock::time_point()> now) { now_ = std::move(now); }

std::int64_t SessionService::now_ticks() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(now_().time_since_epoch()).count();
}

std::string SessionService::new_id() {
    std::lock_guard lock(id_mutex_);
    // splitmix64 step
    std::uint64_t z = (id_state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(z));
    return buf;
}

std::size_t SessionService::session_count() const {
    std::shared_lock lock(sessions_mutex_);
    return sessions_.size();
}

std::size_t SessionService::evict_idle() {
    const auto cutoff = now_ticks() - std::chrono::duration_cast<std::chrono::milliseconds>(config_.idle_timeout).count();
    std::unique_lock lock(sessions_mutex_);
    return std::erase_if(sessions_, [&](const auto& kv) { return kv.second->last_access.load() < cutoff; });
}

std::shared_ptr<SessionService::Session> SessionService::find(const std::string& id) {
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw HttpError{404, "unknown session: " + id};
    it->second->last_access = now_ticks();
    return it->second;
}

void SessionService::refresh(Session& s, const std::string& id) {
    const ValueMaps maps = compute_maps(s.ctx);
    const PixelCoord pred = argmax(maps.value);
    json fixations = json::array();
    for (const auto& p : s.ctx.history) fixations.push_back({{"x", p.x}, {"y", p.y}});
    s.state = {{"id", id},
               {"revision", s.revision},
               {"params", to_json(s.ctx.params)},
               {"fixations", std::move(fixations)},
               {"maps",
                {{"s", map_json(*s.ctx.saliency)},
                 {"c", map_json(maps.cost)},
                 {"e", map_json(maps.exploration)},
                 {"v", map_json(maps.value)}}},
               {"prediction", {{"x", pred.x}, {"y", pred.y}}}};
}

ServiceResponse SessionService::create(const json& body) {
    if (!body.is_object() || !body.contains("saliency") || !body.contains("params")) {
        throw HttpError{400, "body needs saliency and params"};
    }
    for (const auto& [key, _] : body.items()) {
        if (key != "saliency" && key != "params" && key != "profile") throw HttpError{400, "unknown field: " + key};
    }
    auto s = std::make_shared<Session>();
    s->ctx.saliency = std::make_shared<const Grid>(saliency_from_json(body.at("saliency")));
    s->ctx.params = params_from_json(body.at("params"));
    s->ctx.params.validate();
    s->ctx.profile = body.contains("profile") ? profile_from_json(body.at("profile")) : config_.default_profile;
    s->ctx.profile.validate();
    s->revision = 1;
    s->last_access = now_ticks();
    const std::string id = new_id();
    refresh(*s, id);
    {
        std::unique_lock lock(sessions_mutex_);
        sessions_[id] = s;
    }
    return {201, json{{"id", id}, {"revision", s->revision}}};
}

ServiceResponse SessionService::get(const std::string& id) {
    auto s = find(id);
    std::shared_lock lock(s->mutex);
    return {200, s->state};
}

template <typename Fn>
ServiceResponse SessionService::mutate(const std::string& id, const json& body, Fn&& fn) {
    auto s = find(id);
    std::unique_lock lock(s->mutex);
    if (body.is_object() && body.contains("expected_revision")) {
        const auto expected = body.at("expected_revision").get<std::uint64_t>();
        if (expected != s->revision) {
            return {409, json{{"error", "stale revision"}, {"revision", s->revision}}};
        }
    }
    PredictionContext next = s->ctx;
    fn(next);
    Session probe;
    probe.ctx = std::move(next);
    probe.revision = s->revision + 1;
    refresh(probe, id);  // throws before any state changes
    s->ctx = std::move(probe.ctx);
    s->revision = probe.revision;
    s->state = std::move(probe.state);
    return {200, s->state};
}

ServiceResponse SessionService::append(const std::string& id, const json& body) {
    const PixelCoord p = fixation_from_json(body);
    return mutate(id, body, [&](PredictionContext& ctx) {
        if (!contains(ctx.dims(), p)) throw HttpError{400, "fixation outside the map"};
        ctx.history.push_back(p);
    });
}

ServiceResponse SessionService::undo(const std::string& id, const json& body) {
    return mutate(id, body, [&](PredictionContext& ctx) {
        if (ctx.history.empty()) throw HttpError{400, "no fixation to undo"};
        ctx.history.pop_back();
    });
}

ServiceResponse SessionService::patch(const std::string& id, const json& body) {
    if (!body.is_object()) throw HttpError{400, "params patch must be an object"};
    json patch_body = body;
    patch_body.erase("expected_revision");
    return mutate(id, body, [&](PredictionContext& ctx) {
        json merged = to_json(ctx.params);
        merged.update(patch_body);
        ctx.params = params_from_json(merged);
        ctx.params.validate();
    });
}

ServiceResponse SessionService::handle(std::string_view method, std::string_view path, std::string_view body) {
    try {
        json parsed;
        if (!body.empty()) {
            parsed = json::parse(body.begin(), body.end(), nullptr, false);
            if (parsed.is_discarded()) return error_response(400, "malformed JSON body");
        }
        const auto parts = split_path(path);
        if (parts.empty() || parts[0] != "sessions") return error_response(404, "no such route");
        if (parts.size() == 1) {
            if (method != "POST") return error_response(405, "method not allowed");
            evict_idle();
            return create(parsed);
        }
        const std::string id(parts[1]);
        if (parts.size() == 2) {
            if (method != "GET") return error_response(405, "method not allowed");
            return get(id);
        }
        if (parts.size() == 3 && parts[2] == "fixations") {
            if (method != "POST") return error_response(405, "method not allowed");
            return append(id, parsed);
        }
        if (parts.size() == 4 && parts[2] == "fixations" && parts[3] == "last") {
            if (method != "DELETE") return error_response(405, "method not allowed");
            return undo(id, parsed);
        }
        if (parts.size() == 3 && parts[2] == "params") {
            if (method != "PATCH") return error_response(405, "method not allowed");
            return patch(id, parsed);
        }
        return error_response(404, "no such route");
    } catch (const HttpError& e) {
        return error_response(e.status, e.message);
    } catch (const Error& e) {
        return error_response(status_for(e.code()), e.what());
    } catch (const json::exception& e) {
        return error_response(400, e.what());
    }
}

}  // namespace gazeval
