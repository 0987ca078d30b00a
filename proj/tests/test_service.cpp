#include <doctest.h>

#include <httplib.h>
#include <openssl/evp.h>

#include <random>
#include <set>
#include <thread>

#include "gazeval/cost.hpp"
#include "gazeval/raster.hpp"
#include "gazeval/reference_params.hpp"
#include "gazeval/service.hpp"
#include "gazeval/value_engine.hpp"
#include "oracles.hpp"

using namespace gazeval;
using nlohmann::json;

namespace {

json saliency_json(const Grid& g) {
    return {{"width", g.width()}, {"height", g.height()}, {"values", g.values()}};
}

std::string base64(const std::string& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

struct Fixture {
    SessionService service{ServiceConfig{std::chrono::seconds(1800), default_cost_profile()}};
    Grid sal;
    ModelParams params = find_reference("deepgaze2_individual").params;
    std::string id;

    Fixture() {
        std::mt19937_64 rng(1);
        sal = oracle::random_grid({20, 15}, rng);
        const auto r = call("POST", "/sessions", json{{"saliency", saliency_json(sal)}, {"params", to_json(params)}});
        REQUIRE(r.status == 201);
        id = r.body.at("id").get<std::string>();
    }

    ServiceResponse call(const std::string& method, const std::string& path, const json& body = nullptr) {
        return service.handle(method, path, body.is_null() ? "" : body.dump());
    }
    ServiceResponse state() { return call("GET", "/sessions/" + id); }
    ServiceResponse add(double x, double y) { return call("POST", "/sessions/" + id + "/fixations", json{{"x", x}, {"y", y}}); }
};

}  // namespace

TEST_CASE("fresh session returns saliency as the value map") {
    Fixture f;
    const auto s = f.state();
    REQUIRE(s.status == 200);
    CHECK(s.body["revision"] == 1);
    CHECK(s.body["maps"]["v"]["values"] == s.body["maps"]["s"]["values"]);
    CHECK(s.body["maps"]["s"]["values"].get<std::vector<double>>() == std::vector<double>(f.sal.values().begin(), f.sal.values().end()));
    CHECK(s.body["maps"]["v"]["max"] == f.sal.max());
    CHECK(s.body["fixations"].empty());
    const PixelCoord am = argmax(f.sal);
    CHECK(s.body["prediction"]["x"] == am.x);
}

TEST_CASE("appending a fixation matches the library prediction") {
    Fixture f;
    auto r = f.add(4, 9);
    REQUIRE(r.status == 200);
    r = f.add(11, 3);
    CHECK(r.body["revision"] == 3);
    const PredictionContext ctx{std::make_shared<const Grid>(f.sal), {{4, 9}, {11, 3}}, f.params, default_cost_profile()};
    const PixelCoord p = predict_next(ctx);
    CHECK(r.body["prediction"]["x"] == p.x);
    CHECK(r.body["prediction"]["y"] == p.y);
    const Grid v = value_map(ctx);
    CHECK(r.body["maps"]["v"]["values"].get<std::vector<double>>() == std::vector<double>(v.values().begin(), v.values().end()));
    CHECK(f.state().body == r.body);
}

TEST_CASE("undo restores the previous state with a later revision") {
    Fixture f;
    f.add(2, 2);
    const json before = f.state().body;
    f.add(7, 8);
    const auto after = f.call("DELETE", "/sessions/" + f.id + "/fixations/last");
    REQUIRE(after.status == 200);
    CHECK(after.body["revision"] == before["revision"].get<int>() + 2);
    json a = after.body, b = before;
    a.erase("revision");
    b.erase("revision");
    CHECK(a == b);
}

TEST_CASE("params patch") {
    Fixture f;
    f.add(3, 3);
    f.add(15, 10);
    const auto r = f.call("PATCH", "/sessions/" + f.id + "/params", json{{"w1", 0.0}, {"w2", 0.0}});
    REQUIRE(r.status == 200);
    const PixelCoord am = argmax(f.sal);
    CHECK(r.body["prediction"]["x"] == am.x);
    CHECK(r.body["prediction"]["y"] == am.y);
    CHECK(r.body["params"]["sigma"] == f.params.sigma);
    CHECK(f.call("PATCH", "/sessions/" + f.id + "/params", json{{"sigma", -2.0}}).status == 400);
    CHECK(f.call("PATCH", "/sessions/" + f.id + "/params", json{{"bogus", 1}}).status == 400);
    CHECK(f.state().body["revision"] == 4);
}

TEST_CASE("error statuses") {
    Fixture f;
    CHECK(f.call("GET", "/sessions/unknown").status == 404);
    CHECK(f.call("GET", "/elsewhere").status == 404);
    CHECK(f.call("PUT", "/sessions/" + f.id).status == 405);
    CHECK(f.add(20, 3).status == 400);
    CHECK(f.add(-1, 3).status == 400);
    CHECK(f.call("DELETE", "/sessions/" + f.id + "/fixations/last").status == 400);
    CHECK(f.service.handle("POST", "/sessions", "{not json").status == 400);
    CHECK(f.call("POST", "/sessions", json{{"params", to_json(f.params)}}).status == 400);
    CHECK(f.call("POST", "/sessions", json{{"saliency", {{"width", 2}, {"height", 2}, {"values", {1, 2, 3}}}},
                                           {"params", to_json(f.params)}})
              .status == 400);
    CHECK(f.state().body["revision"] == 1);

    SUBCASE("stale revision") {
        CHECK(f.call("POST", "/sessions/" + f.id + "/fixations", json{{"x", 1}, {"y", 1}, {"expected_revision", 1}}).status == 200);
        const auto stale = f.call("POST", "/sessions/" + f.id + "/fixations", json{{"x", 1}, {"y", 1}, {"expected_revision", 1}});
        CHECK(stale.status == 409);
        CHECK(stale.body["revision"] == 2);
    }
}

TEST_CASE("smr_base64 saliency") {
    Fixture f;
    Grid g(Dims{5, 4}, 0.0);
    g(3, 2) = 0.75;
    const auto r = f.call("POST", "/sessions",
                          json{{"saliency", {{"smr_base64", base64(encode_raster(g))}}}, {"params", to_json(f.params)}});
    REQUIRE(r.status == 201);
    const auto s = f.service.handle("GET", "/sessions/" + r.body["id"].get<std::string>(), "");
    CHECK(s.body["maps"]["s"]["width"] == 5);
    CHECK(s.body["prediction"]["x"] == 3.0);
    CHECK(f.call("POST", "/sessions", json{{"saliency", {{"smr_base64", "@@@"}}}, {"params", to_json(f.params)}}).status == 400);
}

TEST_CASE("replaying a mutation log reproduces the payloads") {
    Fixture a, b;
    const std::vector<std::pair<double, double>> log{{1, 1}, {12, 7}, {5, 14}};
    for (auto [x, y] : log) {
        a.add(x, y);
        b.add(x, y);
    }
    a.call("DELETE", "/sessions/" + a.id + "/fixations/last");
    b.call("DELETE", "/sessions/" + b.id + "/fixations/last");
    CHECK(a.state().body["maps"] == b.state().body["maps"]);
}

TEST_CASE("concurrent mutations serialize") {
    Fixture f;
    constexpr int kThreads = 8, kEach = 5;
    std::vector<std::vector<int>> seen(kThreads);
    {
        std::vector<std::jthread> pool;
        for (int t = 0; t < kThreads; ++t) {
            pool.emplace_back([&, t] {
                for (int k = 0; k < kEach; ++k) {
                    const auto r = f.add(t, k);
                    seen[t].push_back(r.body["revision"].get<int>());
                    f.state();
                }
            });
        }
    }
    std::set<int> revisions;
    for (const auto& v : seen) revisions.insert(v.begin(), v.end());
    CHECK(revisions.size() == kThreads * kEach);
    const auto s = f.state();
    CHECK(s.body["revision"] == 1 + kThreads * kEach);
    CHECK(s.body["fixations"].size() == kThreads * kEach);
}

TEST_CASE("idle sessions are evicted") {
    Fixture f;
    auto now = SessionService::Clock::now();
    f.service.set_clock([&] { return now; });
    f.state();
    now += std::chrono::minutes(29);
    CHECK(f.service.evict_idle() == 0);
    now += std::chrono::minutes(2);
    CHECK(f.service.evict_idle() == 1);
    CHECK(f.state().status == 404);
}

TEST_CASE("http binding") {
    SessionService service;
    httplib::Server server;
    bind_http(server, service);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::jthread worker([&] { server.listen_after_bind(); });
    struct StopOnExit {
        httplib::Server& s;
        ~StopOnExit() { s.stop(); }
    } guard{server};
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(10);
    Grid g(Dims{6, 5}, 0.1);
    g(4, 1) = 1.0;
    ModelParams p;
    p.phis = {1.0};
    const auto created = client.Post("/sessions", json{{"saliency", saliency_json(g)}, {"params", to_json(p)}}.dump(),
                                     "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    const std::string id = json::parse(created->body)["id"];
    const auto added = client.Post("/sessions/" + id + "/fixations", R"({"x":1,"y":1})", "application/json");
    REQUIRE(added);
    CHECK(added->status == 200);
    CHECK(json::parse(added->body)["fixations"].size() == 1);
    const auto patched = client.Patch("/sessions/" + id + "/params", R"({"w2":0.5})", "application/json");
    REQUIRE(patched);
    CHECK(json::parse(patched->body)["revision"] == 3);
    const auto undone = client.Delete("/sessions/" + id + "/fixations/last");
    REQUIRE(undone);
    CHECK(undone->status == 200);
    const auto missing = client.Get("/sessions/nope");
    REQUIRE(missing);
    CHECK(missing->status == 404);
}
