#include "gts/mock_backend.hpp"

#include "gts/hash.hpp"

#include <httplib.h>

#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace gts {

using nlohmann::json;

RuleTable RuleTable::from_json(const json& j) {
    RuleTable t;
    try {
        if (j.contains("embedding_dim")) t.embedding_dim = j.at("embedding_dim").get<std::size_t>();
        if (t.embedding_dim == 0) throw ConfigError("mock rules: embedding_dim must be positive");
        if (j.contains("generators")) {
            t.generated.clear();
            for (const auto& name : j.at("generators")) t.generated.insert(role_from_string(name.get<std::string>()));
        }
        for (const auto& r : j.value("rules", json::array())) {
            MockRule rule;
            rule.role = role_from_string(r.at("role").get<std::string>());
            if (r.contains("fingerprint")) rule.fingerprint = r.at("fingerprint").get<std::string>();
            if (r.contains("match")) rule.match = r.at("match");
            if (!rule.match.is_object()) throw ConfigError("mock rules: 'match' must be an object");
            if (r.contains("contains"))
                rule.contains = r.at("contains").get<std::map<std::string, std::string>>();
            rule.response = r.at("response");
            rule.status = r.value("status", 200);
            rule.fail_times = r.value("fail_times", 0);
            t.rules.push_back(std::move(rule));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("mock rules: ") + e.what());
    }
    return t;
}

RuleTable RuleTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mock rule table " + path.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ConfigError("mock rule table " + path.string() + ": " + e.what());
    }
}

json RuleTable::to_json() const {
    json generators = json::array();
    for (Role r : generated) generators.push_back(to_string(r));
    json out_rules = json::array();
    for (const auto& r : rules) {
        json o{{"role", to_string(r.role)}, {"match", r.match}, {"response", r.response},
               {"status", r.status}, {"fail_times", r.fail_times}};
        if (r.fingerprint) o["fingerprint"] = *r.fingerprint;
        if (!r.contains.empty()) o["contains"] = r.contains;
        out_rules.push_back(std::move(o));
    }
    return {{"embedding_dim", embedding_dim}, {"generators", generators}, {"rules", out_rules}};
}

std::string request_fingerprint(Role role, const json& request) {
    return hex64(fnv1a64(to_string(role) + "\n" + wire::canonical(request)));
}

std::vector<float> mock_unit_vector(std::uint64_t seed, std::string_view key, std::size_t dim) {
    std::mt19937_64 rng(fnv1a64(key, fnv1a64(std::to_string(seed))));
    std::vector<double> v(dim);
    double norm = 0.0;
    for (auto& x : v) {
        x = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        norm += x * x;
    }
    norm = std::sqrt(norm);
    std::vector<float> out(dim);
    for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm);
    return out;
}

namespace {

bool string_contains(const json& field, const std::string& needle) {
    if (field.is_string()) return field.get<std::string>().find(needle) != std::string::npos;
    if (field.is_array()) {
        for (const auto& e : field)
            if (string_contains(e, needle)) return true;
        return false;
    }
    return field.dump().find(needle) != std::string::npos;
}

bool rule_applies(const MockRule& rule, Role role, const json& request, const std::string& fingerprint) {
    if (rule.role != role) return false;
    if (rule.fingerprint && *rule.fingerprint != fingerprint) return false;
    for (auto it = rule.match.begin(); it != rule.match.end(); ++it) {
        auto found = request.find(it.key());
        if (found == request.end() || *found != it.value()) return false;
    }
    for (const auto& [key, needle] : rule.contains) {
        auto found = request.find(key);
        if (found == request.end() || !string_contains(*found, needle)) return false;
    }
    return true;
}

std::set<std::string> word_set(const std::string& text) {
    std::set<std::string> words;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            words.insert(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.insert(cur);
    return words;
}

json vectors_json(const std::vector<std::vector<float>>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        json row = json::array();
        for (float x : r) row.push_back(static_cast<double>(x));
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace

MockBackend::MockBackend(std::uint64_t seed, RuleTable table)
    : seed_(seed), table_(std::move(table)), failures_served_(table_.rules.size(), 0) {}

std::size_t MockBackend::calls(Role role) const {
    std::lock_guard lock(mutex_);
    auto it = calls_.find(role);
    return it == calls_.end() ? 0 : it->second;
}

HttpReply MockBackend::post(const std::string& path, const std::string& body,
                            const std::optional<std::string>&, std::chrono::milliseconds) const {
    Role role;
    json request;
    try {
        role = role_from_path(path);
    } catch (const Error& e) {
        return {404, wire::ErrorBody{"unknown_endpoint", e.what()}.to_json().dump()};
    }
    try {
        request = json::parse(body);
    } catch (const json::parse_error& e) {
        return {400, wire::ErrorBody{"bad_request", e.what()}.to_json().dump()};
    }
    return respond(role, request);
}

HttpReply MockBackend::respond(Role role, const json& request) const {
    const auto fingerprint = request_fingerprint(role, request);
    {
        std::lock_guard lock(mutex_);
        ++calls_[role];
        for (std::size_t i = 0; i < table_.rules.size(); ++i) {
            const auto& rule = table_.rules[i];
            if (!rule_applies(rule, role, request, fingerprint)) continue;
            if (failures_served_[i] < rule.fail_times) {
                ++failures_served_[i];
                return {503, wire::ErrorBody{"unavailable", "scripted transient failure"}.to_json().dump()};
            }
            return {rule.status, wire::canonical(rule.response)};
        }
    }
    if (table_.generated.contains(role)) return {200, wire::canonical(generate(role, request))};
    throw ScriptedMissError("mock " + to_string(role) + ": no rule for request " + fingerprint + " " +
                            wire::canonical(request).substr(0, 400));
}

json MockBackend::generate(Role role, const json& request) const {
    const std::size_t dim = table_.embedding_dim;
    switch (role) {
        case Role::caption: {
            const auto req = wire::CaptionRequest::from_json(request);
            return wire::CaptionResponse{"mock caption " + hex64(fnv1a64(req.video_id, seed_)).substr(0, 8) +
                                         ": a scene recorded by a fixed camera"}
                .to_json();
        }
        case Role::embed_text: {
            const auto req = wire::EmbedTextRequest::from_json(request);
            std::vector<std::vector<float>> rows;
            for (const auto& t : req.texts) rows.push_back(mock_unit_vector(seed_, "text:" + t, dim));
            return {{"dim", dim}, {"vectors", vectors_json(rows)}};
        }
        case Role::embed_image: {
            const auto req = wire::EmbedImageRequest::from_json(request);
            std::vector<std::vector<float>> rows;
            for (const auto& f : req.frame_refs) rows.push_back(mock_unit_vector(seed_, "frame:" + f, dim));
            return {{"dim", dim}, {"vectors", vectors_json(rows)}};
        }
        case Role::embed_video: {
            // Mean-pooled frame vectors over each clip window.
            const auto req = wire::EmbedVideoRequest::from_json(request);
            const auto n = static_cast<FrameIndex>(req.frame_refs.size());
            std::vector<FrameIndex> starts;
            std::vector<std::vector<float>> rows;
            for (FrameIndex s = 0; s < n; s += req.stride) {
                std::vector<double> acc(dim, 0.0);
                for (FrameIndex f = s; f < std::min<FrameIndex>(n, s + req.window); ++f) {
                    const auto v = mock_unit_vector(seed_, "frame:" + req.frame_refs[f], dim);
                    for (std::size_t d = 0; d < dim; ++d) acc[d] += v[d];
                }
                double norm = 0.0;
                for (double x : acc) norm += x * x;
                norm = std::sqrt(norm);
                std::vector<float> row(dim);
                for (std::size_t d = 0; d < dim; ++d) row[d] = static_cast<float>(acc[d] / norm);
                starts.push_back(s);
                rows.push_back(std::move(row));
            }
            return {{"dim", dim}, {"clip_starts", starts}, {"vectors", vectors_json(rows)}};
        }
        case Role::judge: {
            const auto req = wire::JudgeRequest::from_json(request);
            if (req.prediction == req.reference)
                return wire::JudgeResponse{10, 10, 10, 10, "exact match"}.to_json();
            const auto a = word_set(req.prediction);
            const auto b = word_set(req.reference);
            std::size_t shared = 0;
            for (const auto& w : a) shared += b.count(w);
            const std::size_t uni = a.size() + b.size() - shared;
            const double overlap = uni == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(uni);
            const int score = 1 + static_cast<int>(std::lround(9.0 * overlap));
            return wire::JudgeResponse{score, score, score, score,
                                       "token overlap " + std::to_string(shared) + "/" + std::to_string(uni)}
                .to_json();
        }
        default:
            break;
    }
    throw ScriptedMissError("mock " + to_string(role) + ": no generator");
}

// -- loopback server ----------------------------------------------------------

struct MockServer::Impl {
    httplib::Server server;
    std::thread thread;
    std::atomic<long long> delay_ms{0};
    std::atomic<std::size_t> hits{0};
};

MockServer::MockServer(std::shared_ptr<const Transport> inner, std::optional<std::string> required_token)
    : impl_(std::make_unique<Impl>()) {
    auto* impl = impl_.get();
    impl->server.Post(R"(/v1/([a-z_]+))", [impl, inner, required_token](const httplib::Request& req,
                                                                       httplib::Response& res) {
        ++impl->hits;
        if (const auto d = impl->delay_ms.load(); d > 0) std::this_thread::sleep_for(std::chrono::milliseconds(d));
        if (required_token && req.get_header_value("Authorization") != "Bearer " + *required_token) {
            res.status = 401;
            res.set_content(wire::ErrorBody{"unauthorized", "missing or wrong bearer token"}.to_json().dump(),
                            "application/json");
            return;
        }
        HttpReply reply;
        try {
            reply = inner->post(req.path, req.body, std::nullopt, std::chrono::milliseconds(0));
        } catch (const ScriptedMissError& e) {
            reply = {404, wire::ErrorBody{"scripted_miss", e.what()}.to_json().dump()};
        } catch (const std::exception& e) {
            reply = {500, wire::ErrorBody{"internal", e.what()}.to_json().dump()};
        }
        res.status = reply.status;
        res.set_content(reply.body, "application/json");
    });
    port_ = impl->server.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw BackendUnavailableError("mock server: cannot bind a loopback port");
    impl->thread = std::thread([impl] { impl->server.listen_after_bind(); });
    impl->server.wait_until_ready();
}

MockServer::~MockServer() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockServer::base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

void MockServer::set_delay(std::chrono::milliseconds delay) { impl_->delay_ms = delay.count(); }

std::size_t MockServer::hits() const { return impl_->hits.load(); }

}  // namespace gts
