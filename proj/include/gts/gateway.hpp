#pragma once

#include "gts/transport.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace gts {

/// The nine backend roles behind typed calls. Every call enforces the
/// role's response contract (row counts, unit-norm embeddings, score ranges)
/// and raises ProtocolError with the raw body when it is broken.
class Gateway {
public:
    explicit Gateway(std::map<Role, BackendClient> clients);

    /// Binds every role to one transport (in-process mock, loopback server).
    static Gateway over(std::shared_ptr<const Transport> transport, int max_retries = 0,
                        RetryPolicy retry = {});
    /// One HttpTransport per endpoint.
    static Gateway from_endpoints(const std::vector<BackendEndpoint>& endpoints, RetryPolicy retry = {});

    bool has(Role role) const { return clients_.contains(role); }
    const BackendClient& client(Role role) const;

    std::string caption(const std::string& video_id, const std::vector<std::string>& frame_refs) const;
    wire::PromptsResponse prompts(const wire::PromptsRequest& request) const;
    EmbeddingMatrix embed_text(const std::vector<std::string>& texts, const std::string& kind) const;
    EmbeddingMatrix embed_image(const std::vector<std::string>& frame_refs) const;
    EmbeddingMatrix embed_video(const std::vector<std::string>& frame_refs, int window, int stride) const;
    std::string vqa(const std::vector<std::string>& frame_refs, const std::string& question,
                    const std::string& context) const;
    wire::IntegrateResponse integrate(const wire::IntegrateRequest& request) const;
    wire::VtgResponse vtg(const std::vector<std::string>& frame_refs, const std::string& query) const;
    JudgeVerdict judge(const std::string& prediction, const std::string& reference) const;

    static constexpr double unit_tolerance = 1e-5;

private:
    template <class Request>
    std::pair<typename Request::Response, std::string> exchange(const Request& request) const;

    std::map<Role, BackendClient> clients_;
};

struct ConformanceCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Contract checks any backend deployment must pass: shapes, unit rows,
/// identical-input determinism, score ranges, canonical round trips.
std::vector<ConformanceCheck> run_conformance(const Gateway& gateway,
                                              const std::vector<std::string>& sample_frames);

}  // namespace gts
