#include "gts/gateway.hpp"

#include "gts/error.hpp"

#include <cmath>

namespace gts {

Gateway::Gateway(std::map<Role, BackendClient> clients) : clients_(std::move(clients)) {
    for (const auto& [role, client] : clients_)
        if (client.endpoint().role != role)
            throw ConfigError("gateway: client for " + to_string(client.endpoint().role) + " bound to role " +
                              to_string(role));
}

Gateway Gateway::over(std::shared_ptr<const Transport> transport, int max_retries, RetryPolicy retry) {
    std::map<Role, BackendClient> clients;
    for (Role role : all_roles) {
        BackendEndpoint ep;
        ep.role = role;
        ep.base_url = "inproc://" + to_string(role);
        ep.max_retries = max_retries;
        clients.emplace(role, BackendClient(ep, transport, retry));
    }
    return Gateway(std::move(clients));
}

Gateway Gateway::from_endpoints(const std::vector<BackendEndpoint>& endpoints, RetryPolicy retry) {
    std::map<Role, BackendClient> clients;
    for (const auto& ep : endpoints) {
        if (clients.contains(ep.role)) throw ConfigError("role " + to_string(ep.role) + " bound twice");
        clients.emplace(ep.role, BackendClient(ep, std::make_shared<HttpTransport>(ep.base_url), retry));
    }
    return Gateway(std::move(clients));
}

const BackendClient& Gateway::client(Role role) const {
    auto it = clients_.find(role);
    if (it == clients_.end()) throw ConfigError("no backend bound for role " + to_string(role));
    return it->second;
}

template <class Request>
std::pair<typename Request::Response, std::string> Gateway::exchange(const Request& request) const {
    const auto& c = client(Request::role);
    if (c.endpoint().role != Request::role) throw ConfigError("role mismatch");
    auto body = c.exchange(wire::serialize(request));
    auto response = wire::parse<typename Request::Response>(body);
    return {std::move(response), std::move(body)};
}

namespace {

void check_rows(const EmbeddingMatrix& m, std::size_t expected_rows, const std::string& role,
                const std::string& body) {
    if (m.rows != expected_rows)
        throw ProtocolError(role + ": expected " + std::to_string(expected_rows) + " vectors, got " +
                                std::to_string(m.rows),
                            body);
    if (m.max_norm_deviation() > Gateway::unit_tolerance)
        throw ProtocolError(role + ": vectors are not L2-normalized", body);
}

}  // namespace

std::string Gateway::caption(const std::string& video_id, const std::vector<std::string>& frame_refs) const {
    auto [r, body] = exchange(wire::CaptionRequest{video_id, frame_refs});
    if (r.caption.empty()) throw ProtocolError("caption: empty caption", body);
    return r.caption;
}

wire::PromptsResponse Gateway::prompts(const wire::PromptsRequest& request) const {
    return exchange(request).first;
}

EmbeddingMatrix Gateway::embed_text(const std::vector<std::string>& texts, const std::string& kind) const {
    auto [r, body] = exchange(wire::EmbedTextRequest{texts, kind});
    auto m = r.to_matrix(EmbeddingKind::text);
    check_rows(m, texts.size(), "embed_text", body);
    return m;
}

EmbeddingMatrix Gateway::embed_image(const std::vector<std::string>& frame_refs) const {
    auto [r, body] = exchange(wire::EmbedImageRequest{frame_refs});
    auto m = r.to_matrix(EmbeddingKind::image);
    check_rows(m, frame_refs.size(), "embed_image", body);
    return m;
}

EmbeddingMatrix Gateway::embed_video(const std::vector<std::string>& frame_refs, int window, int stride) const {
    auto [r, body] = exchange(wire::EmbedVideoRequest{frame_refs, window, stride});
    auto m = r.to_matrix(window, stride);
    if (m.rows == 0) throw ProtocolError("embed_video: no clips", body);
    check_rows(m, m.rows, "embed_video", body);
    for (std::size_t i = 0; i < m.clip_starts.size(); ++i) {
        if (m.clip_starts[i] >= static_cast<FrameIndex>(frame_refs.size()) ||
            (i > 0 && m.clip_starts[i] <= m.clip_starts[i - 1]))
            throw ProtocolError("embed_video: clip starts must be ascending and inside the video", body);
    }
    return m;
}

std::string Gateway::vqa(const std::vector<std::string>& frame_refs, const std::string& question,
                         const std::string& context) const {
    return exchange(wire::VqaRequest{frame_refs, question, context}).first.answer;
}

wire::IntegrateResponse Gateway::integrate(const wire::IntegrateRequest& request) const {
    return exchange(request).first;
}

wire::VtgResponse Gateway::vtg(const std::vector<std::string>& frame_refs, const std::string& query) const {
    return exchange(wire::VtgRequest{frame_refs, query}).first;
}

JudgeVerdict Gateway::judge(const std::string& prediction, const std::string& reference) const {
    return exchange(wire::JudgeRequest{prediction, reference}).first.verdict();
}

// -- conformance --------------------------------------------------------------

std::vector<ConformanceCheck> run_conformance(const Gateway& gateway, const std::vector<std::string>& frames) {
    std::vector<ConformanceCheck> out;
    auto check = [&](const std::string& name, auto&& body) {
        ConformanceCheck c{name, false, {}};
        try {
            c.detail = body();
            c.passed = true;
        } catch (const std::exception& e) {
            c.detail = e.what();
        }
        out.push_back(std::move(c));
    };
    if (frames.empty()) throw ConfigError("conformance: need at least one sample frame");

    check("embed_text shape", [&] {
        const std::vector<std::string> texts{"a person running", "a car on fire", "an empty street"};
        const auto m = gateway.embed_text(texts, "static");
        return "rows=" + std::to_string(m.rows) + " dim=" + std::to_string(m.dim);
    });
    check("embed_image identical frames", [&] {
        const std::vector<std::string> twice{frames[0], frames[0]};
        const auto m = gateway.embed_image(twice);
        double dot = 0.0;
        for (std::size_t d = 0; d < m.dim; ++d) dot += static_cast<double>(m.row(0)[d]) * m.row(1)[d];
        if (std::fabs(dot - 1.0) > Gateway::unit_tolerance)
            throw ProtocolError("identical frames have cosine " + std::to_string(dot));
        return "cosine=" + std::to_string(dot);
    });
    check("embed_video clips", [&] {
        const auto m = gateway.embed_video(frames, 16, 8);
        return "clips=" + std::to_string(m.rows);
    });
    check("caption nonempty", [&] { return gateway.caption("conformance", frames); });
    check("judge identical text", [&] {
        const auto v = gateway.judge("a man sets a car on fire", "a man sets a car on fire");
        if (!v.aspects.valid()) throw ProtocolError("judge scores out of range");
        return "subject=" + std::to_string(v.aspects.subject);
    });
    check("canonical round trip", [&] {
        const wire::JudgeResponse r{7, 8, 9, 10, "ok"};
        const auto once = wire::serialize(r);
        if (wire::serialize(wire::parse<wire::JudgeResponse>(once)) != once)
            throw ProtocolError("judge response does not round-trip", once);
        return once;
    });
    return out;
}

}  // namespace gts
