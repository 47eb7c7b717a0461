#include "ofdmest/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>

namespace ofdmest::io {

using nlohmann::json;

namespace {

std::uint32_t to_little_endian(std::uint32_t v)
{
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        return ((v & 0xffU) << 24) | ((v & 0xff00U) << 8) | ((v >> 8) & 0xff00U) | (v >> 24);
    }
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, std::string_view where)
{
    if (!j.is_object()) throw InvalidConfig(std::string(where) + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            throw InvalidConfig(std::string(where) + ": unknown key '" + key + "'");
        }
    }
}

void require_schema(const json& j, std::string_view expected)
{
    if (!j.contains("schema") || !j.at("schema").is_string() || j.at("schema").get<std::string>() != expected) {
        throw InvalidConfig("schema must be \"" + std::string(expected) + "\"");
    }
}

double snr_from_json(const json& v)
{
    if (v.is_null()) return std::numeric_limits<double>::infinity();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        throw InvalidConfig("snr_db string must be \"inf\"");
    }
    if (!v.is_number()) throw InvalidConfig("snr_db must be a number, null, or \"inf\"");
    return v.get<double>();
}

json snr_to_json(double snr)
{
    if (std::isinf(snr) && snr > 0) return "inf";
    return snr;
}

template <class T>
T get_as(const json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("invalid value for '") + key + "': " + e.what());
    }
}

const std::set<std::string> kConfigKeys{"carrier_count",  "cp_ratio",      "oversampling_rate",
                                        "symbol_count",   "carrier_freq_hz", "sample_rate_hz",
                                        "snr_db",         "seed"};

OfdmConfig config_fields(const json& j)
{
    OfdmConfig cfg;
    if (j.contains("carrier_count")) cfg.carrier_count = get_as<int>(j, "carrier_count");
    if (j.contains("cp_ratio")) cfg.cp_ratio = get_as<double>(j, "cp_ratio");
    if (j.contains("oversampling_rate")) cfg.oversampling_rate = get_as<int>(j, "oversampling_rate");
    if (j.contains("symbol_count")) cfg.symbol_count = get_as<int>(j, "symbol_count");
    if (j.contains("carrier_freq_hz")) cfg.carrier_freq_hz = get_as<double>(j, "carrier_freq_hz");
    if (j.contains("sample_rate_hz")) cfg.sample_rate_hz = get_as<double>(j, "sample_rate_hz");
    if (j.contains("snr_db")) cfg.snr_db = snr_from_json(j.at("snr_db"));
    if (j.contains("seed")) cfg.seed = get_as<std::uint64_t>(j, "seed");
    cfg.validate();
    return cfg;
}

}  // namespace

std::filesystem::path meta_path_for(const std::filesystem::path& iq_path)
{
    auto p = iq_path;
    p.replace_extension(".meta.json");
    return p;
}

void write_iq(const std::filesystem::path& path, const IqBuffer& buffer)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    std::vector<std::uint32_t> words;
    words.reserve(buffer.size() * 2);
    for (const auto& s : buffer.samples()) {
        words.push_back(to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(s.real()))));
        words.push_back(to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(s.imag()))));
    }
    out.write(reinterpret_cast<const char*>(words.data()),
              static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

IqBuffer read_iq(const std::filesystem::path& path, double sample_rate_hz)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.empty() || bytes.size() % 8 != 0) {
        throw MalformedIq("malformed IQ file '" + path.string() + "': " + std::to_string(bytes.size()) +
                          " bytes is not a positive multiple of 8");
    }
    std::vector<cdouble> samples(bytes.size() / 8);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::uint32_t re = 0;
        std::uint32_t im = 0;
        std::memcpy(&re, bytes.data() + 8 * i, 4);
        std::memcpy(&im, bytes.data() + 8 * i + 4, 4);
        samples[i] = {std::bit_cast<float>(to_little_endian(re)), std::bit_cast<float>(to_little_endian(im))};
    }
    try {
        return IqBuffer(std::move(samples), sample_rate_hz);
    } catch (const std::invalid_argument& e) {
        throw MalformedIq("malformed IQ file '" + path.string() + "': " + e.what());
    }
}

json to_json(const OfdmConfig& cfg)
{
    return json{{"schema", kConfigSchema},
                {"carrier_count", cfg.carrier_count},
                {"cp_ratio", cfg.cp_ratio},
                {"oversampling_rate", cfg.oversampling_rate},
                {"symbol_count", cfg.symbol_count},
                {"carrier_freq_hz", cfg.carrier_freq_hz},
                {"sample_rate_hz", cfg.sample_rate_hz},
                {"snr_db", snr_to_json(cfg.snr_db)},
                {"seed", cfg.seed}};
}

OfdmConfig config_from_json(const json& j)
{
    auto allowed = kConfigKeys;
    allowed.insert("schema");
    reject_unknown_keys(j, allowed, "config");
    require_schema(j, kConfigSchema);
    return config_fields(j);
}

json to_json(const IqFileMeta& meta)
{
    json j{{"format", meta.format_tag}, {"sample_rate_hz", meta.sample_rate_hz}};
    if (meta.truth) {
        const auto lengths = derive_lengths(*meta.truth);
        j["truth"] = to_json(*meta.truth);
        j["truth"]["n_u"] = lengths.n_u;
        j["truth"]["n_g"] = lengths.n_g;
        j["truth"]["n_s"] = lengths.n_s;
    }
    return j;
}

IqFileMeta meta_from_json(const json& j)
{
    reject_unknown_keys(j, {"format", "sample_rate_hz", "truth"}, "metadata");
    IqFileMeta meta;
    meta.format_tag = get_as<std::string>(j, "format");
    if (meta.format_tag != kIqFormatTag) {
        throw InvalidConfig("unsupported IQ format tag '" + meta.format_tag + "'");
    }
    meta.sample_rate_hz = get_as<double>(j, "sample_rate_hz");
    if (!(meta.sample_rate_hz > 0.0)) throw InvalidConfig("sample_rate_hz must be positive");
    if (j.contains("truth")) {
        auto truth = j.at("truth");
        truth.erase("n_u");
        truth.erase("n_g");
        truth.erase("n_s");
        meta.truth = config_from_json(truth);
    }
    return meta;
}

json load_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("config not found: '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidConfig("cannot parse '" + path.string() + "': " + e.what());
    }
}

void write_meta(const std::filesystem::path& path, const IqFileMeta& meta)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << to_json(meta).dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

IqFileMeta read_meta(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("metadata not found: '" + path.string() + "'");
    try {
        return meta_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw InvalidConfig("cannot parse '" + path.string() + "': " + e.what());
    }
}

IqBuffer read_recording(const std::filesystem::path& iq_path, IqFileMeta* meta_out)
{
    const auto meta = read_meta(meta_path_for(iq_path));
    auto buffer = read_iq(iq_path, meta.sample_rate_hz);
    if (meta_out) *meta_out = meta;
    return buffer;
}

OfdmConfig read_config(const std::filesystem::path& path)
{
    return config_from_json(load_json(path));
}

harness::SweepSpec sweep_spec_from_json(const json& j)
{
    reject_unknown_keys(j,
                        {"schema", "base_config", "snr_grid_db", "trials_per_point", "methods",
                         "exact_match_tolerance", "seed", "workers"},
                        "sweep spec");
    require_schema(j, kSweepSchema);

    harness::SweepSpec spec;
    if (!j.contains("base_config")) throw InvalidConfig("sweep spec: base_config is required");
    auto base_keys = kConfigKeys;
    base_keys.erase("snr_db");
    reject_unknown_keys(j.at("base_config"), base_keys, "base_config");
    spec.base_config = config_fields(j.at("base_config"));

    if (!j.contains("snr_grid_db")) throw InvalidConfig("sweep spec: snr_grid_db is required");
    const auto& grid = j.at("snr_grid_db");
    if (grid.is_array()) {
        for (const auto& v : grid) spec.snr_grid_db.push_back(snr_from_json(v));
    } else {
        reject_unknown_keys(grid, {"start", "stop", "step"}, "snr_grid_db");
        const double start = get_as<double>(grid, "start");
        const double stop = get_as<double>(grid, "stop");
        const double step = get_as<double>(grid, "step");
        if (!(step > 0.0) || stop < start) throw InvalidConfig("snr_grid_db range needs step > 0, stop >= start");
        const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (long i = 0; i < count; ++i) spec.snr_grid_db.push_back(start + static_cast<double>(i) * step);
    }

    if (j.contains("trials_per_point")) spec.trials_per_point = get_as<int>(j, "trials_per_point");
    if (!j.contains("methods") || !j.at("methods").is_array()) {
        throw InvalidConfig("sweep spec: methods must be an array");
    }
    for (const auto& m : j.at("methods")) {
        if (!m.is_string()) throw InvalidConfig("sweep spec: method names must be strings");
        const auto method = parse_method(m.get<std::string>());
        if (!method) throw InvalidConfig("sweep spec: unknown method '" + m.get<std::string>() + "'");
        spec.methods.push_back(*method);
    }
    if (j.contains("exact_match_tolerance")) {
        spec.exact_match_tolerance = get_as<int>(j, "exact_match_tolerance");
    }
    if (j.contains("seed")) spec.seed = get_as<std::uint64_t>(j, "seed");
    if (j.contains("workers")) spec.workers = get_as<unsigned>(j, "workers");
    spec.validate();
    return spec;
}

harness::SweepSpec read_sweep_spec(const std::filesystem::path& path)
{
    return sweep_spec_from_json(load_json(path));
}

}  // namespace ofdmest::io
