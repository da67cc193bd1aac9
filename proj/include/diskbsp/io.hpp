#pragma once

// Serialization: PGM images, raw float32 images with JSON sidecar, MNIST IDX
// ingestion, coefficient/bispectrum/report CSVs, and the plan cache file.
// Readers are total: malformed bytes raise parse_error (with the byte offset
// where that is meaningful), never crash.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bispectrum.hpp"
#include "errors.hpp"
#include "image.hpp"
#include "mra.hpp"
#include "transform.hpp"

namespace diskbsp {

inline const char* tool_version() { return "0.1.0"; }

inline nlohmann::json provenance_block(const HarmonicPlan* plan, const std::string& args) {
    nlohmann::json j;
    j["tool_version"] = tool_version();
    if (plan) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(plan->hash()));
        j["plan_hash"] = buf;
        j["plan"] = {{"L", plan->L},
                     {"bandlimit_factor", plan->bandlimit_factor},
                     {"bandlimit", plan->bandlimit},
                     {"m", plan->m},
                     {"max_order", plan->max_order}};
    }
    j["args"] = args;
    return j;
}

// ----------------------------------------------------------------- PGM

namespace detail {

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Next whitespace-delimited token, skipping '#' comments.
inline std::string pgm_token(const std::string& s, size_t& pos) {
    while (pos < s.size()) {
        if (std::isspace(static_cast<unsigned char>(s[pos]))) {
            ++pos;
        } else if (s[pos] == '#') {
            while (pos < s.size() && s[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    const size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) && s[pos] != '#')
        ++pos;
    if (start == pos) throw parse_error("pgm: unexpected end of header", static_cast<long long>(start));
    return s.substr(start, pos - start);
}

inline long pgm_int(const std::string& s, size_t& pos) {
    const size_t at = pos;
    const std::string tok = pgm_token(s, pos);
    try {
        size_t used = 0;
        const long v = std::stol(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw parse_error("pgm: expected integer, got '" + tok + "'", static_cast<long long>(at));
    }
}

}  // namespace detail

// P2 (ascii) or P5 (binary) PGM, maxval <= 65535, scaled to [0,1]. Non-square
// or odd inputs are zero-padded to the next even square; the adjustment is
// recorded in ImageGrid::provenance.
inline ImageGrid read_pgm(const std::string& path) {
    const std::string s = detail::read_file_bytes(path);
    size_t pos = 0;
    const std::string magic = detail::pgm_token(s, pos);
    if (magic != "P2" && magic != "P5")
        throw parse_error("pgm: bad magic '" + magic + "'", 0);
    const long w = detail::pgm_int(s, pos);
    const long h = detail::pgm_int(s, pos);
    const long maxval = detail::pgm_int(s, pos);
    if (w <= 0 || h <= 0) throw parse_error("pgm: nonpositive dimensions");
    if (maxval <= 0 || maxval > 65535) throw parse_error("pgm: maxval out of range");

    std::vector<double> data(static_cast<size_t>(w) * static_cast<size_t>(h));
    if (magic == "P5") {
        ++pos;  // single whitespace after maxval
        const int bytes = maxval > 255 ? 2 : 1;
        const size_t need = data.size() * static_cast<size_t>(bytes);
        if (s.size() - pos < need)
            throw parse_error("pgm: truncated payload, expected " + std::to_string(need) +
                                  " bytes, got " + std::to_string(s.size() - pos),
                              static_cast<long long>(pos));
        for (size_t i = 0; i < data.size(); ++i) {
            unsigned v;
            if (bytes == 1) {
                v = static_cast<unsigned char>(s[pos + i]);
            } else {
                v = (static_cast<unsigned char>(s[pos + 2 * i]) << 8) |
                    static_cast<unsigned char>(s[pos + 2 * i + 1]);
            }
            data[i] = static_cast<double>(v) / static_cast<double>(maxval);
        }
    } else {
        for (size_t i = 0; i < data.size(); ++i) {
            const long v = detail::pgm_int(s, pos);
            if (v < 0 || v > maxval)
                throw parse_error("pgm: sample out of range", static_cast<long long>(pos));
            data[i] = static_cast<double>(v) / static_cast<double>(maxval);
        }
    }

    long side = std::max(w, h);
    if (side % 2) ++side;
    ImageGrid img(static_cast<int>(side));
    for (long r = 0; r < h; ++r)
        for (long c = 0; c < w; ++c)
            img.at(static_cast<int>(r), static_cast<int>(c)) =
                data[static_cast<size_t>(r) * static_cast<size_t>(w) + static_cast<size_t>(c)];
    if (side != w || side != h)
        img.provenance = "padded from " + std::to_string(w) + "x" + std::to_string(h) + " to " +
                         std::to_string(side) + "x" + std::to_string(side);
    return img;
}

inline void write_pgm(const std::string& path, const ImageGrid& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "P5\n" << img.L << " " << img.L << "\n255\n";
    for (double v : img.pixels) {
        const double clamped = std::min(1.0, std::max(0.0, v));
        out.put(static_cast<char>(static_cast<int>(std::lround(clamped * 255.0))));
    }
}

// ----------------------------------------------------------------- IDX

// Image `index` from a big-endian IDX3 ubyte file, scaled to [0,1].
inline ImageGrid read_idx(const std::string& path, size_t index) {
    const std::string s = detail::read_file_bytes(path);
    if (s.size() < 16) throw parse_error("idx: header truncated", static_cast<long long>(s.size()));
    auto be32 = [&](size_t at) {
        return (static_cast<uint32_t>(static_cast<unsigned char>(s[at])) << 24) |
               (static_cast<uint32_t>(static_cast<unsigned char>(s[at + 1])) << 16) |
               (static_cast<uint32_t>(static_cast<unsigned char>(s[at + 2])) << 8) |
               static_cast<uint32_t>(static_cast<unsigned char>(s[at + 3]));
    };
    const uint32_t magic = be32(0);
    if (magic != 2051) throw parse_error("idx: bad magic " + std::to_string(magic), 0);
    const uint32_t count = be32(4), rows = be32(8), cols = be32(12);
    if (index >= count) throw std::out_of_range("idx: image index out of range");
    const size_t stride = static_cast<size_t>(rows) * cols;
    const size_t need = 16 + static_cast<size_t>(count) * stride;
    if (s.size() < need)
        throw parse_error("idx: payload truncated, expected " + std::to_string(need) +
                              " bytes, got " + std::to_string(s.size()),
                          static_cast<long long>(s.size()));
    long side = std::max(rows, cols);
    if (side % 2) ++side;
    ImageGrid img(static_cast<int>(side));
    const size_t base = 16 + index * stride;
    for (uint32_t r = 0; r < rows; ++r)
        for (uint32_t c = 0; c < cols; ++c)
            img.at(static_cast<int>(r), static_cast<int>(c)) =
                static_cast<double>(static_cast<unsigned char>(s[base + r * cols + c])) / 255.0;
    if (static_cast<uint32_t>(side) != rows || static_cast<uint32_t>(side) != cols)
        img.provenance = "padded from idx " + std::to_string(rows) + "x" + std::to_string(cols);
    return img;
}

// ----------------------------------------------------------------- raw f32

// Little-endian float32 payload, row-major, plus a `<path>.json` sidecar.
inline void write_raw(const std::string& path, const ImageGrid& img) {
    for (double v : img.pixels)
        if (!std::isfinite(v))
            throw std::invalid_argument("write_raw: non-finite pixel value");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (double v : img.pixels) {
        const float f = static_cast<float>(v);
        char buf[4];
        std::memcpy(buf, &f, 4);
        out.write(buf, 4);
    }
    nlohmann::json sidecar;
    sidecar["L"] = img.L;
    sidecar["dtype"] = "f32";
    sidecar["order"] = "row-major";
    sidecar["scale"] = "intensities in [0,1]";
    std::ofstream js(path + ".json");
    js << sidecar.dump(2) << "\n";
}

inline ImageGrid read_raw(const std::string& path) {
    nlohmann::json sidecar;
    {
        std::ifstream js(path + ".json");
        if (!js) throw parse_error("raw: missing sidecar " + path + ".json");
        try {
            js >> sidecar;
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(std::string("raw: bad sidecar json: ") + e.what());
        }
    }
    if (!sidecar.contains("L") || !sidecar["L"].is_number_integer())
        throw parse_error("raw: sidecar missing integer L");
    if (sidecar.value("dtype", "") != "f32") throw parse_error("raw: unsupported dtype");
    const int L = sidecar["L"].get<int>();
    const std::string s = detail::read_file_bytes(path);
    const size_t need = 4ull * static_cast<size_t>(L) * static_cast<size_t>(L);
    if (s.size() != need)
        throw parse_error("raw: payload is " + std::to_string(s.size()) + " bytes, sidecar L=" +
                              std::to_string(L) + " implies " + std::to_string(need),
                          static_cast<long long>(std::min(s.size(), need)));
    ImageGrid img(L);
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        float f;
        std::memcpy(&f, s.data() + 4 * i, 4);
        img.pixels[i] = static_cast<double>(f);
    }
    return img;
}

// ----------------------------------------------------------------- CSV

// Coefficients: header `j,n,k,lambda,re,im` + JSON envelope `<path>.json`.
inline void write_coeffs_csv(const std::string& path, const DHCoefficients& coeffs,
                             const std::string& args = "") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    out << "j,n,k,lambda,re,im\n";
    for (size_t j = 0; j < coeffs.values.size(); ++j) {
        const PlanEntry& e = coeffs.plan->entries[j];
        out << e.j << "," << e.n << "," << e.k << "," << e.lambda << ","
            << coeffs.values[j].real() << "," << coeffs.values[j].imag() << "\n";
    }
    std::ofstream js(path + ".json");
    js << provenance_block(coeffs.plan.get(), args).dump(2) << "\n";
}

inline DHCoefficients read_coeffs_csv(const std::string& path) {
    nlohmann::json envelope;
    {
        std::ifstream js(path + ".json");
        if (!js) throw parse_error("coeffs: missing envelope " + path + ".json");
        try {
            js >> envelope;
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(std::string("coeffs: bad envelope json: ") + e.what());
        }
    }
    if (!envelope.contains("plan"))
        throw parse_error("coeffs: envelope lacks plan metadata");
    const int L = envelope["plan"].value("L", 0);
    const double factor = envelope["plan"].value("bandlimit_factor", 0.0);
    if (L < 4 || !(factor > 0)) throw parse_error("coeffs: invalid plan metadata");
    auto plan = HarmonicPlan::get(L, factor);

    std::ifstream in(path);
    if (!in) throw parse_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("j,n,k", 0) != 0)
        throw parse_error("coeffs: missing csv header");
    DHCoefficients coeffs(plan);
    size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int j, n, k;
        double lambda, re, im;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%lf,%lf,%lf", &j, &n, &k, &lambda, &re, &im) != 6)
            throw parse_error("coeffs: bad row '" + line + "'");
        if (j < 0 || j >= plan->m || plan->find(n, k) != j)
            throw parse_error("coeffs: row does not match plan layout: '" + line + "'");
        coeffs.values[static_cast<size_t>(j)] = {re, im};
        ++rows;
    }
    if (rows != static_cast<size_t>(plan->m))
        throw parse_error("coeffs: expected " + std::to_string(plan->m) + " rows, got " +
                          std::to_string(rows));
    return coeffs;
}

// Selective bispectrum: `row,j1_or_n,k3,re,im` (+ envelope, with optional
// gauge diagnostics when written after an inversion).
inline void write_selective_csv(const std::string& path, const SelectiveBispectrum& b,
                                const std::string& args = "",
                                const InversionDiagnostics* diag = nullptr) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    out << "row,j1_or_n,k3,re,im\n";
    for (size_t i = 0; i < b.values.size(); ++i) {
        const SelLabel& l = b.labels[i];
        out << l.row << "," << l.n << "," << l.k << "," << b.values[i].real() << ","
            << b.values[i].imag() << "\n";
    }
    nlohmann::json env = provenance_block(b.plan.get(), args);
    env["kind"] = "selective";
    if (diag) {
        env["gauge_diagnostics"] = {{"imag_residual_a01", diag->imag_residual_a01},
                                    {"imag_residual_gauge", diag->imag_residual_gauge},
                                    {"tau_zero", diag->tau_zero}};
    }
    std::ofstream js(path + ".json");
    js << env.dump(2) << "\n";
}

inline SelectiveBispectrum read_selective_csv(const std::string& path) {
    nlohmann::json envelope;
    {
        std::ifstream js(path + ".json");
        if (!js) throw parse_error("bispectrum: missing envelope " + path + ".json");
        try {
            js >> envelope;
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(std::string("bispectrum: bad envelope json: ") + e.what());
        }
    }
    const int L = envelope.contains("plan") ? envelope["plan"].value("L", 0) : 0;
    const double factor =
        envelope.contains("plan") ? envelope["plan"].value("bandlimit_factor", 0.0) : 0.0;
    if (L < 4 || !(factor > 0)) throw parse_error("bispectrum: invalid plan metadata");
    auto plan = HarmonicPlan::get(L, factor);

    SelectiveBispectrum b;
    b.plan = plan;
    b.labels = SelectiveBispectrum::index_for(*plan);
    b.values.assign(b.labels.size(), 0.0);

    std::ifstream in(path);
    if (!in) throw parse_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("row,", 0) != 0)
        throw parse_error("bispectrum: missing csv header");
    size_t i = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int row, n, k;
        double re, im;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%lf,%lf", &row, &n, &k, &re, &im) != 5)
            throw parse_error("bispectrum: bad row '" + line + "'");
        if (i >= b.labels.size() || !(b.labels[i] == SelLabel{row, n, k}))
            throw parse_error("bispectrum: row " + std::to_string(i) + " does not match the plan's index");
        b.values[i++] = {re, im};
    }
    if (i != b.labels.size())
        throw parse_error("bispectrum: expected " + std::to_string(b.labels.size()) + " rows");
    return b;
}

// Full bispectrum: `j1,j2,k3,re,im`.
inline void write_full_csv(const std::string& path, const FullBispectrum& b,
                           const std::string& args = "") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    out << "j1,j2,k3,re,im\n";
    for (size_t i = 0; i < b.values.size(); ++i)
        out << b.index[i].j1 << "," << b.index[i].j2 << "," << b.index[i].k3 << ","
            << b.values[i].real() << "," << b.values[i].imag() << "\n";
    nlohmann::json env = provenance_block(b.plan.get(), args);
    env["kind"] = "full";
    std::ofstream js(path + ".json");
    js << env.dump(2) << "\n";
}

inline FullBispectrum read_full_csv(const std::string& path) {
    nlohmann::json envelope;
    {
        std::ifstream js(path + ".json");
        if (!js) throw parse_error("bispectrum: missing envelope " + path + ".json");
        js >> envelope;
    }
    const int L = envelope.contains("plan") ? envelope["plan"].value("L", 0) : 0;
    const double factor =
        envelope.contains("plan") ? envelope["plan"].value("bandlimit_factor", 0.0) : 0.0;
    if (L < 4 || !(factor > 0)) throw parse_error("bispectrum: invalid plan metadata");
    auto plan = HarmonicPlan::get(L, factor);
    FullBispectrum b;
    b.plan = plan;
    b.index = FullBispectrum::index_for(*plan);
    b.values.assign(b.index.size(), 0.0);
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("j1,", 0) != 0)
        throw parse_error("bispectrum: missing csv header");
    size_t i = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int j1, j2, k3;
        double re, im;
        if (std::sscanf(line.c_str(), "%d,%d,%d,%lf,%lf", &j1, &j2, &k3, &re, &im) != 5)
            throw parse_error("bispectrum: bad row '" + line + "'");
        if (i >= b.index.size() || !(b.index[i] == FullTriple{j1, j2, k3}))
            throw parse_error("bispectrum: row " + std::to_string(i) + " does not match the plan's index");
        b.values[i++] = {re, im};
    }
    if (i != b.index.size())
        throw parse_error("bispectrum: expected " + std::to_string(b.index.size()) + " rows");
    return b;
}

// MRA report: `nx,sigma2,seed,rel_error,wall_ms` (+ linear error column).
inline void write_mra_csv(const std::string& path, const MRAReport& report,
                          const std::string& args = "") {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(12);
    out << "# " << provenance_block(report.plan.get(), args).dump() << "\n";
    out << "nx,sigma2,seed,rel_error,wall_ms\n";
    for (const auto& r : report.records)
        out << r.n_copies << "," << r.sigma2 << "," << r.seed << "," << r.rel_error << ","
            << r.wall_ms << "\n";
}

inline nlohmann::json mra_summary_json(const MRAReport& report, const std::string& args = "") {
    // mean/std per (nx, sigma2) cell
    struct Acc {
        double sum = 0, sum2 = 0;
        int n = 0;
    };
    std::map<std::pair<int, double>, Acc> cells;
    for (const auto& r : report.records) {
        if (r.degenerate) continue;
        auto& a = cells[{r.n_copies, r.sigma2}];
        a.sum += r.rel_error;
        a.sum2 += r.rel_error * r.rel_error;
        ++a.n;
    }
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [key, a] : cells) {
        const double mean = a.sum / a.n;
        const double var = std::max(0.0, a.sum2 / a.n - mean * mean);
        rows.push_back({{"nx", key.first},
                        {"sigma2", key.second},
                        {"runs", a.n},
                        {"mean_rel_error", mean},
                        {"std_rel_error", std::sqrt(var)}});
    }
    nlohmann::json j = provenance_block(report.plan.get(), args);
    j["cells"] = rows;
    return j;
}

// ----------------------------------------------------------------- plan cache

// Self-describing JSON with L, bandlimit, and the entry list; the sampled
// basis is regenerated on load, not persisted.
inline void save_plan_cache(const std::string& path, const HarmonicPlan& plan) {
    nlohmann::json j;
    j["L"] = plan.L;
    j["bandlimit_factor"] = plan.bandlimit_factor;
    j["bandlimit"] = plan.bandlimit;
    j["m"] = plan.m;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : plan.entries)
        entries.push_back({e.j, e.n, e.k, e.lambda, e.c});
    j["entries"] = entries;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump() << "\n";
}

inline std::shared_ptr<const HarmonicPlan> load_plan_cache(const std::string& path) {
    nlohmann::json j;
    {
        std::ifstream in(path);
        if (!in) throw parse_error("plan cache: cannot open " + path);
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(std::string("plan cache: bad json: ") + e.what());
        }
    }
    const int L = j.value("L", 0);
    const double factor = j.value("bandlimit_factor", 0.0);
    if (L < 4 || !(factor > 0)) throw parse_error("plan cache: invalid metadata");
    if (!j.contains("entries") || !j["entries"].is_array() || j["entries"].empty())
        throw parse_error("plan cache: missing entry list");
    std::vector<PlanEntry> entries;
    entries.reserve(j["entries"].size());
    for (const auto& row : j["entries"]) {
        if (!row.is_array() || row.size() != 5) throw parse_error("plan cache: bad entry row");
        entries.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<int>(),
                           row[3].get<double>(), row[4].get<double>()});
    }
    auto plan = HarmonicPlan::from_entries(L, factor, std::move(entries));
    // normalization is recomputed from lambda; the stored c must round-trip
    for (size_t i = 0; i < plan->entries.size(); ++i) {
        const double stored = j["entries"][i][4].get<double>();
        if (stored != 0.0 && stored != plan->entries[i].c)
            throw parse_error("plan cache: normalization mismatch at entry " + std::to_string(i));
    }
    return plan;
}

}  // namespace diskbsp
