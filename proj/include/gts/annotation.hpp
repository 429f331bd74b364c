#pragma once

#include "gts/metric.hpp"

#include <string>
#include <vector>

namespace gts {

struct QAItem {
    std::string question;
    std::vector<std::string> options;  // 2-5
    int answer_index = 0;

    friend bool operator==(const QAItem&, const QAItem&) = default;
};

struct VideoAnnotation {
    std::string video_id;
    FrameIndex duration_frames = 0;
    double fps = 0.0;
    std::string category;            // a taxonomy category or "Normal"
    std::vector<Interval> grounding;  // empty exactly for Normal videos
    std::string description;
    std::vector<QAItem> qa;

    bool is_normal() const;
    friend bool operator==(const VideoAnnotation&, const VideoAnnotation&) = default;
};

}  // namespace gts
