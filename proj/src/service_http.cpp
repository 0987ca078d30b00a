#include <httplib.h>

#include "gazeval/service.hpp"

namespace gazeval {

void bind_http(httplib::Server& server, SessionService& service) {
    auto route = [&service](const httplib::Request& req, httplib::Response& res) {
        const ServiceResponse r = service.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(dump_json(r.body, -1), "application/json");
    };
    server.Get(".*", route);
    server.Post(".*", route);
    server.Patch(".*", route);
    server.Delete(".*", route);
}

bool serve_http(SessionService& service, const std::string& host, int port) {
    httplib::Server server;
    bind_http(server, service);
    return server.listen(host, port);
}

}  // namespace gazeval
