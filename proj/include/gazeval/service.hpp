#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include <json.hpp>

#include "gazeval/cost.hpp"
#include "gazeval/params.hpp"
#include "gazeval/value_engine.hpp"

namespace httplib {
class Server;
}

namespace gazeval {

struct ServiceResponse {
    int status = 200;
    nlohmann::json body;
};

struct ServiceConfig {
    std::chrono::seconds idle_timeout{30 * 60};
    CostProfile default_profile = default_cost_profile();
};

/// In-memory explorer sessions. Every mutation bumps the revision and
/// recomputes the cost, exploration and value maps and the prediction.
///
///   POST   /sessions                    {saliency, params, profile?}
///   GET    /sessions/{id}
///   POST   /sessions/{id}/fixations     {x, y, expected_revision?}
///   DELETE /sessions/{id}/fixations/last
///   PATCH  /sessions/{id}/params        partial params
class SessionService {
public:
    using Clock = std::chrono::steady_clock;

    explicit SessionService(ServiceConfig config = {});

    ServiceResponse handle(std::string_view method, std::string_view path, std::string_view body);

    /// Drops sessions idle for longer than the timeout; returns the count.
    std::size_t evict_idle();
    std::size_t session_count() const;

    /// Replaces the time source (tests).
    void set_clock(std::function<Clock::time_point()> now);

private:
    struct Session {
        mutable std::shared_mutex mutex;
        PredictionContext ctx;
        std::uint64_t revision = 0;
        nlohmann::json state;  // response for the current revision
        std::atomic<std::int64_t> last_access{0};
    };

    ServiceResponse create(const nlohmann::json& body);
    ServiceResponse get(const std::string& id);
    ServiceResponse append(const std::string& id, const nlohmann::json& body);
    ServiceResponse undo(const std::string& id, const nlohmann::json& body);
    ServiceResponse patch(const std::string& id, const nlohmann::json& body);

    std::shared_ptr<Session> find(const std::string& id);
    template <typename Fn>
    ServiceResponse mutate(const std::string& id, const nlohmann::json& body, Fn&& fn);
    static void refresh(Session& s, const std::string& id);
    std::string new_id();
    std::int64_t now_ticks() const;

    ServiceConfig config_;
    std::function<Clock::time_point()> now_;
    mutable std::shared_mutex sessions_mutex_;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
    std::mutex id_mutex_;
    std::uint64_t id_state_;
};

/// Routes every request to `service.handle`.
void bind_http(httplib::Server& server, SessionService& service);

/// Blocks serving HTTP until the process is stopped. Returns false when the
/// address cannot be bound.
bool serve_http(SessionService& service, const std::string& host, int port);

}  // namespace gazeval
