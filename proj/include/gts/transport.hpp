#pragma once

#include "gts/error.hpp"
#include "gts/protocol.hpp"

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace gts {

struct HttpReply {
    int status = 0;
    std::string body;
};

/// Connection-level failure (no HTTP status). Retryable.
class TransportFailure : public std::runtime_error {
public:
    TransportFailure(const std::string& what, bool timed_out)
        : std::runtime_error(what), timed_out_(timed_out) {}
    bool timed_out() const noexcept { return timed_out_; }

private:
    bool timed_out_;
};

/// POSTs a JSON body to a protocol path. Implementations must be safe for
/// concurrent use.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpReply post(const std::string& path, const std::string& body,
                           const std::optional<std::string>& bearer_token,
                           std::chrono::milliseconds timeout) const = 0;
};

/// cpp-httplib client against "http://host:port[/prefix]".
class HttpTransport final : public Transport {
public:
    explicit HttpTransport(std::string base_url);
    HttpReply post(const std::string& path, const std::string& body,
                   const std::optional<std::string>& bearer_token,
                   std::chrono::milliseconds timeout) const override;

private:
    std::string scheme_host_port_;
    std::string path_prefix_;
};

struct BackendEndpoint {
    Role role = Role::caption;
    std::string base_url;
    int timeout_ms = 60000;
    int max_retries = 2;
    std::optional<std::string> auth_token;
    int max_in_flight = 4;

    void validate() const;
};

struct RetryPolicy {
    std::chrono::milliseconds initial_backoff{100};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{5000};

    std::chrono::milliseconds delay_before(int attempt) const;  // attempt >= 1
    static bool retryable_status(int status) { return status == 429 || status >= 500; }
};

/// Typed, retrying client for one endpoint. Immutable after construction;
/// copies share the in-flight limiter.
class BackendClient {
public:
    BackendClient(BackendEndpoint endpoint, std::shared_ptr<const Transport> transport,
                  RetryPolicy retry = {});

    const BackendEndpoint& endpoint() const noexcept { return endpoint_; }

    /// Raw exchange with retries; returns the 200 body.
    std::string exchange(const std::string& body) const;

    template <class Request>
    typename Request::Response call(const Request& request) const {
        if (Request::role != endpoint_.role)
            throw ConfigError("a " + to_string(Request::role) + " request sent to the " +
                              to_string(endpoint_.role) + " endpoint");
        const auto body = exchange(wire::serialize(request));
        return wire::parse<typename Request::Response>(body);
    }

private:
    struct Limiter;

    BackendEndpoint endpoint_;
    std::shared_ptr<const Transport> transport_;
    RetryPolicy retry_;
    std::shared_ptr<Limiter> limiter_;
};

}  // namespace gts
