#pragma once

#include <memory>
#include <string>

#include "tae/service/service.hpp"

namespace tae {

/// HTTP status for an error code: 404 unknown ids, 409 conflicts, 400 invalid input, 502 provider, 500 internal.
int http_status(ErrorCode code);

/**
 * @brief HTTP and server-sent-events front of an EditorService.
 *
 * All routes live under /api. Errors are returned as
 * {code, message, detail} with the status from http_status().
 */
class HttpApi {
public:
    explicit HttpApi(EditorService& service);
    ~HttpApi();

    /// Binds to `host:port`; port 0 picks a free port. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Call after bind().
    bool run();
    void stop();
    [[nodiscard]] bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tae
