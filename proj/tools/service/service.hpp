#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace ibo::service {

struct ServiceConfig {
    std::filesystem::path data_dir = "ibo_data";
    /// Use every second tau value for augmented fits.
    bool coarse_tau = false;
};

/// Session store, fit job queue and HTTP routes for the interactive task.
class Service {
public:
    explicit Service(ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    void mount(httplib::Server& server);
    std::size_t session_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Blocks serving on host:port until the server stops.
int serve(const ServiceConfig& config, const std::string& host, int port);

}  // namespace ibo::service
