#include <cstdlib>
#include <iostream>
#include <string>

#include "service.hpp"

int main(int argc, char** argv) {
    ibo::service::ServiceConfig cfg;
    if (const char* env = std::getenv("IBO_DATA_DIR")) cfg.data_dir = env;
    const int port = argc > 1 ? std::stoi(argv[1]) : 8080;
    std::cerr << "serving on 127.0.0.1:" << port << " data " << cfg.data_dir.string() << '\n';
    return ibo::service::serve(cfg, "127.0.0.1", port);
}
