// dataset_io.cpp — Long-format CSV, JSON sidecars, SHA-256

#include "fluor/dataset_io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fluor {

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return out.str();
}

std::string config_hash(const nlohmann::json& config) {
    return sha256_hex(config.dump());
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) out += ',';
        out += t.columns[c];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw std::invalid_argument("csv: row width does not match header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_number(row[c]);
        }
        out += '\n';
    }
    return out;
}

Table parse_csv(const std::string& text) {
    Table t;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("csv: empty input");
    {
        std::istringstream h(line);
        std::string cell;
        while (std::getline(h, cell, ',')) t.columns.push_back(cell);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream r(line);
        std::string cell;
        while (std::getline(r, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') throw std::invalid_argument("csv: bad number '" + cell + "'");
            row.push_back(v);
        }
        if (row.size() != t.columns.size()) throw std::invalid_argument("csv: ragged row");
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table read_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream s;
    s << f.rdbuf();
    return parse_csv(s.str());
}

Table spectrum_table(const SpectrumDataset& d) {
    Table t{{"t", "omega_b", "P"}, {}};
    for (std::size_t k = 0; k < d.time_grid.size(); ++k)
        for (std::size_t w = 0; w < d.omega_grid.size(); ++w)
            t.rows.push_back({d.time_grid[k], d.omega_grid[w],
                              d.P(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(w))});
    return t;
}

SpectrumDataset spectrum_from_table(const Table& t) {
    if (t.columns != std::vector<std::string>{"t", "omega_b", "P"})
        throw std::invalid_argument("spectrum csv: expected columns t, omega_b, P");
    SpectrumDataset d;
    std::map<double, std::size_t> ti, wi;
    for (const auto& r : t.rows) {
        if (!ti.count(r[0])) {
            ti[r[0]] = d.time_grid.size();
            d.time_grid.push_back(r[0]);
        }
        if (!wi.count(r[1])) {
            wi[r[1]] = d.omega_grid.size();
            d.omega_grid.push_back(r[1]);
        }
    }
    if (t.rows.size() != d.time_grid.size() * d.omega_grid.size())
        throw std::invalid_argument("spectrum csv: rows do not form a full grid");
    d.P = RMatrix::Zero(static_cast<Eigen::Index>(d.time_grid.size()), static_cast<Eigen::Index>(d.omega_grid.size()));
    for (const auto& r : t.rows)
        d.P(static_cast<Eigen::Index>(ti[r[0]]), static_cast<Eigen::Index>(wi[r[1]])) = r[2];
    return d;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
    if (!f) throw std::runtime_error("write failed for " + p.string());
}

} // namespace

void emit_table(const Table& table, const nlohmann::json& metadata, const std::filesystem::path& stem,
                const EmitOptions& opt) {
    const auto csv = std::filesystem::path(stem.string() + ".csv");
    const auto meta = std::filesystem::path(stem.string() + ".json");
    if (!opt.force_overwrite)
        for (const auto& p : {csv, meta})
            if (std::filesystem::exists(p))
                throw std::runtime_error("refusing to overwrite " + p.string() + " (use --force-overwrite)");
    if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
    nlohmann::json side = metadata;
    side["config_hash"] = config_hash(metadata.contains("config") ? metadata["config"] : metadata);
    side["columns"] = table.columns;
    write_file(csv, to_csv(table));
    write_file(meta, side.dump(2) + "\n");
}

void emit_dataset(const SpectrumDataset& data, const std::filesystem::path& stem, const EmitOptions& opt) {
    data.check_invariants();
    emit_table(spectrum_table(data), data.metadata, stem, opt);
}

SpectrumDataset read_dataset(const std::filesystem::path& stem) {
    SpectrumDataset d = spectrum_from_table(read_csv(stem.string() + ".csv"));
    std::ifstream f(stem.string() + ".json");
    if (f) {
        nlohmann::json j;
        f >> j;
        j.erase("config_hash");
        j.erase("columns");
        d.metadata = j;
    }
    return d;
}

} // namespace fluor
