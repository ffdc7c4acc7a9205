#pragma once

#include <stdexcept>
#include <string>

namespace robin {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct LexError : std::runtime_error {
    LexError(const std::string& msg, int line, int column)
        : std::runtime_error(msg + " at " + std::to_string(line) + ":" +
                             std::to_string(column)),
          line(line), column(column) {}
    int line;
    int column;
};

struct TransformError : std::runtime_error {
    explicit TransformError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IngestError : std::runtime_error {
    explicit IngestError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SplitError : std::runtime_error {
    explicit SplitError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainError : std::runtime_error {
    explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MetricError : std::runtime_error {
    explicit MetricError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace robin
