#pragma once

#include "ofdmest/core.hpp"
#include "ofdmest/harness.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace ofdmest::io {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedIq : public IoError {
public:
    using IoError::IoError;
};

inline constexpr std::string_view kIqFormatTag = "ofdmest-iq/v1;cf32le";
inline constexpr std::string_view kConfigSchema = "ofdmest-config/v1";
inline constexpr std::string_view kSweepSchema = "ofdmest-sweep/v1";

struct IqFileMeta {
    double sample_rate_hz{0.0};
    std::string format_tag{kIqFormatTag};
    std::optional<OfdmConfig> truth;
};

/// `capture.cf32` -> `capture.meta.json`.
std::filesystem::path meta_path_for(const std::filesystem::path& iq_path);

/// Interleaved little-endian float32, I then Q per sample.
void write_iq(const std::filesystem::path& path, const IqBuffer& buffer);
IqBuffer read_iq(const std::filesystem::path& path, double sample_rate_hz);

nlohmann::json to_json(const IqFileMeta& meta);
IqFileMeta meta_from_json(const nlohmann::json& j);
void write_meta(const std::filesystem::path& path, const IqFileMeta& meta);
IqFileMeta read_meta(const std::filesystem::path& path);

/// Reads the recording and its sidecar.
IqBuffer read_recording(const std::filesystem::path& iq_path, IqFileMeta* meta_out = nullptr);

nlohmann::json to_json(const OfdmConfig& cfg);
/// Strict: unknown keys and a wrong schema tag are rejected.
OfdmConfig config_from_json(const nlohmann::json& j);
OfdmConfig read_config(const std::filesystem::path& path);

harness::SweepSpec sweep_spec_from_json(const nlohmann::json& j);
harness::SweepSpec read_sweep_spec(const std::filesystem::path& path);

nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace ofdmest::io
