#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace gts::log {

enum class Level { info, warning };

using Sink = std::function<void(Level, const std::string&)>;

void info(const std::string& message);
void warn(const std::string& message);

/// Replaces the process-wide sink; returns the previous one.
Sink set_sink(Sink sink);

// Collects warnings emitted on any thread while alive; restores the previous
// sink on destruction. Used by tests to assert that a warning fired.
class Capture {
public:
    Capture();
    ~Capture();
    Capture(const Capture&) = delete;
    Capture& operator=(const Capture&) = delete;

    std::vector<std::string> warnings() const;

private:
    struct State;
    std::shared_ptr<State> state_;
    Sink previous_;
};

}  // namespace gts::log
