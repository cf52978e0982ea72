#pragma once

#include <atomic>
#include <stdexcept>
#include <string>
#include <thread>

#include "httplib.h"
#include "tvws/paws.hpp"

namespace tvws {

/// HTTP front end: POST /paws with the JSON request envelope. Transport
/// errors aside, every request yields HTTP 200 with either a result or an
/// error envelope.
class PawsHttpServer {
public:
    explicit PawsHttpServer(PawsService& service) : service_(service) {
        server_.Post("/paws", [this](const httplib::Request& req, httplib::Response& res) {
            const auto out = service_.handle_envelope_text(req.body);
            res.set_content(out.dump(), "application/json");
        });
    }

    /// Binds the configured port; pass port 0 to pick an ephemeral one.
    /// Returns the bound port.
    int bind(const std::string& host, int port) {
        if (port == 0) {
            bound_port_ = server_.bind_to_any_port(host);
        } else {
            if (!server_.bind_to_port(host, port))
                throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
            bound_port_ = port;
        }
        host_ = host;
        return bound_port_;
    }

    /// Serves on the calling thread until stop() is invoked.
    bool listen_after_bind() { return server_.listen_after_bind(); }

    /// Serves on a background thread; returns once the server is ready.
    void start_background() {
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    void stop() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    ~PawsHttpServer() { stop(); }

    int port() const { return bound_port_; }
    const std::string& host() const { return host_; }

private:
    PawsService& service_;
    httplib::Server server_;
    std::thread thread_;
    std::string host_ = "127.0.0.1";
    int bound_port_ = 0;
};

}  // namespace tvws
