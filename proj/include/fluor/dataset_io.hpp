// dataset_io.hpp — CSV/JSON emission, read-back and config hashing

#pragma once

#include "fluor/spectra.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace fluor {

std::string sha256_hex(const std::string& bytes);
// Hash of the canonical (sorted-key, compact) JSON dump.
std::string config_hash(const nlohmann::json& config);

// Column-named numeric table written in long format.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string format_number(double v);  // %.16e
std::string to_csv(const Table& table);
Table parse_csv(const std::string& text);
Table read_csv(const std::filesystem::path& path);

// Long format: t, omega_b, P; one row per grid cell, time-major.
Table spectrum_table(const SpectrumDataset& data);
SpectrumDataset spectrum_from_table(const Table& table);

struct EmitOptions {
    bool force_overwrite{false};
};

// Writes <stem>.csv and <stem>.json; the sidecar holds the metadata plus
// "config_hash" (of metadata["config"] when present, else of the metadata).
// Refuses to replace existing files unless force_overwrite is set.
void emit_table(const Table& table, const nlohmann::json& metadata, const std::filesystem::path& stem,
                const EmitOptions& opt = {});
void emit_dataset(const SpectrumDataset& data, const std::filesystem::path& stem, const EmitOptions& opt = {});

SpectrumDataset read_dataset(const std::filesystem::path& stem);

} // namespace fluor
