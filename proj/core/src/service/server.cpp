#include <prefnav/service/server.hpp>

#include <httplib.h>

namespace prefnav::service {

bool serve(App& app, const std::string& host, int port, const std::function<void(int, StopFn)>& on_ready) {
  httplib::Server server;
  const auto forward = [&app](const httplib::Request& req, httplib::Response& res) {
    Request r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query[k] = v;
    const Response out = app.handle(r);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
    res.set_header("Access-Control-Allow-Origin", "*");
  };
  server.Get(R"(/.*)", forward);
  server.Post(R"(/.*)", forward);
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
    if (bound < 0) return false;
  } else if (!server.bind_to_port(host, port)) {
    return false;
  }
  if (on_ready) on_ready(bound, [&server] { server.stop(); });
  return server.listen_after_bind();
}

}  // namespace prefnav::service
