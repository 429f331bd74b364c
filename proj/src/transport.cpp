#include "gts/transport.hpp"

#include "gts/log.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <semaphore>
#include <thread>

namespace gts {

HttpTransport::HttpTransport(std::string base_url) {
    // Split "http://host:port/prefix" into the client target and a path prefix.
    const auto scheme_end = base_url.find("://");
    const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = base_url.find('/', host_start);
    if (path_start == std::string::npos) {
        scheme_host_port_ = base_url;
    } else {
        scheme_host_port_ = base_url.substr(0, path_start);
        path_prefix_ = base_url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

HttpReply HttpTransport::post(const std::string& path, const std::string& body,
                              const std::optional<std::string>& bearer_token,
                              std::chrono::milliseconds timeout) const {
    httplib::Client client(scheme_host_port_);
    const auto secs = static_cast<time_t>(timeout.count() / 1000);
    const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    if (bearer_token) client.set_bearer_token_auth(*bearer_token);

    auto result = client.Post(path_prefix_ + path, body, "application/json");
    if (!result) {
        const auto err = result.error();
        const bool timed_out = err == httplib::Error::Read || err == httplib::Error::Write ||
                               err == httplib::Error::ConnectionTimeout;
        throw TransportFailure("POST " + path + ": " + httplib::to_string(err), timed_out);
    }
    return {result->status, result->body};
}

void BackendEndpoint::validate() const {
    if (base_url.empty()) throw ConfigError(to_string(role) + ": base_url is empty");
    if (timeout_ms <= 0) throw ConfigError(to_string(role) + ": timeout_ms must be positive");
    if (max_retries < 0) throw ConfigError(to_string(role) + ": max_retries must be non-negative");
    if (max_in_flight < 1 || max_in_flight > 64)
        throw ConfigError(to_string(role) + ": max_in_flight must lie in [1, 64]");
}

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
    const double scaled = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, attempt - 1);
    return std::min(max_backoff, std::chrono::milliseconds(static_cast<long long>(scaled)));
}

struct BackendClient::Limiter {
    explicit Limiter(int n) : slots(n) {}
    std::counting_semaphore<64> slots;
};

BackendClient::BackendClient(BackendEndpoint endpoint, std::shared_ptr<const Transport> transport,
                             RetryPolicy retry)
    : endpoint_(std::move(endpoint)),
      transport_(std::move(transport)),
      retry_(retry),
      limiter_(std::make_shared<Limiter>(endpoint_.max_in_flight)) {
    endpoint_.validate();
    if (!transport_) throw ConfigError(to_string(endpoint_.role) + ": no transport");
}

std::string BackendClient::exchange(const std::string& body) const {
    const auto path = endpoint_path(endpoint_.role);
    const std::chrono::milliseconds timeout(endpoint_.timeout_ms);
    std::string last_failure;
    bool last_timed_out = false;

    for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(retry_.delay_before(attempt));

        HttpReply reply;
        try {
            limiter_->slots.acquire();
            struct Release {
                Limiter& l;
                ~Release() { l.slots.release(); }
            } release{*limiter_};
            reply = transport_->post(path, body, endpoint_.auth_token, timeout);
        } catch (const TransportFailure& e) {
            last_failure = e.what();
            last_timed_out = e.timed_out();
            log::warn(path + " attempt " + std::to_string(attempt + 1) + " failed: " + last_failure);
            continue;
        }

        if (reply.status == 200) return reply.body;

        std::string detail = reply.body;
        try {
            const auto err = wire::parse<wire::ErrorBody>(reply.body);
            detail = err.error + ": " + err.detail;
        } catch (const ProtocolError&) {
        }
        if (RetryPolicy::retryable_status(reply.status)) {
            last_failure = "HTTP " + std::to_string(reply.status) + " " + detail;
            last_timed_out = false;
            log::warn(path + " attempt " + std::to_string(attempt + 1) + " failed: " + last_failure);
            continue;
        }
        throw BackendError(path + " rejected the request (HTTP " + std::to_string(reply.status) + "): " + detail);
    }

    const std::string summary = path + " failed after " + std::to_string(endpoint_.max_retries + 1) +
                                " attempt(s): " + last_failure;
    if (last_timed_out) throw TimeoutError(summary);
    throw BackendUnavailableError(summary);
}

}  // namespace gts
