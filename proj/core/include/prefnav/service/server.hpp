#pragma once

#include <prefnav/service/app.hpp>

#include <functional>

namespace prefnav::service {

/// Stops a running server; safe to call from any thread.
using StopFn = std::function<void()>;

/// Serves `app` over HTTP until stopped. `on_ready` runs once the socket is
/// bound, with the bound port (port 0 picks a free one) and a stop handle.
/// Returns false if binding fails.
bool serve(App& app, const std::string& host, int port, const std::function<void(int, StopFn)>& on_ready = {});

}  // namespace prefnav::service
