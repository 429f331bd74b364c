#include "gts/log.hpp"

#include <iostream>
#include <mutex>

namespace gts::log {
namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

Sink& current_sink() {
    static Sink sink = [](Level level, const std::string& message) {
        static std::mutex stderr_mutex;
        const std::string line = (level == Level::warning ? "[warn] " : "[info] ") + message + '\n';
        std::lock_guard lock(stderr_mutex);
        std::cerr << line << std::flush;
    };
    return sink;
}

void emit(Level level, const std::string& message) {
    Sink sink;
    {
        std::lock_guard lock(sink_mutex());
        sink = current_sink();
    }
    if (sink) sink(level, message);
}

}  // namespace

void info(const std::string& message) { emit(Level::info, message); }
void warn(const std::string& message) { emit(Level::warning, message); }

Sink set_sink(Sink sink) {
    std::lock_guard lock(sink_mutex());
    Sink previous = std::move(current_sink());
    current_sink() = std::move(sink);
    return previous;
}

struct Capture::State {
    mutable std::mutex mutex;
    std::vector<std::string> warnings;
};

Capture::Capture() : state_(std::make_shared<State>()) {
    auto state = state_;
    previous_ = set_sink([state](Level level, const std::string& message) {
        if (level != Level::warning) return;
        std::lock_guard lock(state->mutex);
        state->warnings.push_back(message);
    });
}

Capture::~Capture() {
    set_sink(std::move(previous_));
}

std::vector<std::string> Capture::warnings() const {
    std::lock_guard lock(state_->mutex);
    return state_->warnings;
}

}  // namespace gts::log
