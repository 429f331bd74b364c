#pragma once

#include "gts/transport.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <vector>

namespace gts {

/// One scripted response. A rule applies when every present criterion holds:
/// the fingerprint equals the request's, every `match` key equals the request
/// field, and every `contains` substring occurs in the named string field (or
/// in any element of a string array; other values are searched as JSON text).
struct MockRule {
    Role role = Role::caption;
    std::optional<std::string> fingerprint;
    nlohmann::json match = nlohmann::json::object();
    std::map<std::string, std::string> contains;
    nlohmann::json response;
    int status = 200;
    int fail_times = 0;  // answer 503 this many times first
};

struct RuleTable {
    std::vector<MockRule> rules;
    std::size_t embedding_dim = 16;
    // Roles answered by a seeded generator when no rule matches.
    std::set<Role> generated{Role::caption, Role::embed_text, Role::embed_image, Role::embed_video,
                             Role::judge};

    static RuleTable from_json(const nlohmann::json& j);
    static RuleTable load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

/// FNV-1a of "<role>\n<canonical request>", as 16 hex digits.
std::string request_fingerprint(Role role, const nlohmann::json& request);

/// Seeded unit vector for a key; identical keys give identical rows.
std::vector<float> mock_unit_vector(std::uint64_t seed, std::string_view key, std::size_t dim);

/// In-process scripted backend speaking the wire protocol. Deterministic for
/// a given seed, rule table and request sequence.
class MockBackend final : public Transport {
public:
    MockBackend(std::uint64_t seed, RuleTable table);

    HttpReply post(const std::string& path, const std::string& body,
                   const std::optional<std::string>& bearer_token,
                   std::chrono::milliseconds timeout) const override;

    /// Throws ScriptedMissError when no rule or generator covers the request.
    HttpReply respond(Role role, const nlohmann::json& request) const;

    std::size_t calls(Role role) const;
    std::uint64_t seed() const noexcept { return seed_; }

private:
    nlohmann::json generate(Role role, const nlohmann::json& request) const;

    std::uint64_t seed_;
    RuleTable table_;
    mutable std::mutex mutex_;
    mutable std::vector<int> failures_served_;
    mutable std::map<Role, std::size_t> calls_;
};

/// Serves any Transport (normally a MockBackend) over loopback HTTP so that
/// HttpTransport can be exercised end to end.
class MockServer {
public:
    explicit MockServer(std::shared_ptr<const Transport> inner,
                        std::optional<std::string> required_token = std::nullopt);
    ~MockServer();
    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    std::string base_url() const;
    int port() const noexcept { return port_; }

    /// Every handler sleeps this long before answering.
    void set_delay(std::chrono::milliseconds delay);
    /// Requests served, including failures.
    std::size_t hits() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

}  // namespace gts
