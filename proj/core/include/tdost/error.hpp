#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tdost {

// Each error carries the broad category the CLI maps onto an exit code.
enum class ErrorKind {
    Config,    // bad flags, config files, contract violations of the run setup
    Data,      // malformed logs, layouts, maps, segmentation problems
    External,  // chat endpoint, trainer process, embedding handshake
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ExternalError : public Error {
public:
    explicit ExternalError(const std::string& what) : Error(ErrorKind::External, what) {}
};

/// A single log line that failed to parse.
class ParseError : public DataError {
public:
    ParseError(std::size_t line_no, std::string reason)
        : DataError("line " + std::to_string(line_no) + ": " + reason),
          line_no_(line_no),
          reason_(std::move(reason)) {}

    std::size_t line_no() const noexcept { return line_no_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_no_;
    std::string reason_;
};

class LayoutError : public DataError {
public:
    using DataError::DataError;
};

class UnresolvedSensorError : public DataError {
public:
    explicit UnresolvedSensorError(std::string sensor_id)
        : DataError("unresolved sensor id '" + sensor_id + "'"), sensor_id_(std::move(sensor_id)) {}
    const std::string& sensor_id() const noexcept { return sensor_id_; }

private:
    std::string sensor_id_;
};

class UnmappedLabelError : public DataError {
public:
    explicit UnmappedLabelError(std::string label)
        : DataError("unmapped activity label '" + label + "'"), label_(std::move(label)) {}
    const std::string& label() const noexcept { return label_; }

private:
    std::string label_;
};

class SegmentationError : public DataError {
public:
    using DataError::DataError;
};

class AugmentationFormatError : public ExternalError {
public:
    using ExternalError::ExternalError;
};

class CacheMissError : public DataError {
public:
    explicit CacheMissError(std::string key)
        : DataError("augmentation cache miss for " + key), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class EmbeddingError : public ExternalError {
public:
    using ExternalError::ExternalError;
};

}  // namespace tdost
