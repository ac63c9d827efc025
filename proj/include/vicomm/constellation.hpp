#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vicomm/errors.hpp"
#include "vicomm/matrix.hpp"

namespace vicomm {

inline std::size_t bits_per_symbol(std::size_t M) {
    if (M < 2) throw contract_error("bits_per_symbol: need M >= 2");
    std::size_t d = 0;
    std::size_t capacity = 1;
    while (capacity < M) {
        capacity <<= 1;
        ++d;
    }
    return d;
}

/// MSB-first bit vector of a symbol index, width d.
inline std::vector<std::uint8_t> symbol_bits(std::size_t index, std::size_t d) {
    std::vector<std::uint8_t> bits(d, 0);
    for (std::size_t j = 0; j < d; ++j)
        bits[j] = static_cast<std::uint8_t>((index >> (d - 1 - j)) & 1u);
    return bits;
}

inline std::size_t bits_to_index(const std::vector<std::uint8_t>& bits) {
    std::size_t v = 0;
    for (std::uint8_t b : bits) v = (v << 1) | (b & 1u);
    return v;
}

inline std::size_t hamming_distance(const std::vector<std::uint8_t>& a,
                                    const std::vector<std::uint8_t>& b) {
    if (a.size() != b.size()) throw contract_error("hamming_distance: length mismatch");
    std::size_t h = 0;
    for (std::size_t i = 0; i < a.size(); ++i) h += (a[i] != b[i]) ? 1 : 0;
    return h;
}

/// M transmit points in m real dimensions with distinct bit labels.
struct Constellation {
    std::size_t dim = 0;                             // m
    std::vector<std::vector<double>> points;         // M x m
    std::vector<std::vector<std::uint8_t>> labels;   // M x d

    std::size_t size() const { return points.size(); }
    std::size_t label_bits() const { return labels.empty() ? 0 : labels.front().size(); }

    /// Average symbol energy, (1/M) sum_i ||z_i||^2.
    double average_power() const {
        double acc = 0.0;
        for (const auto& p : points) acc += squared_norm(p);
        return acc / static_cast<double>(points.size());
    }

    double average_power_per_component() const {
        return average_power() / static_cast<double>(dim);
    }

    void validate() const {
        if (points.size() < 2) throw contract_error("constellation: need at least 2 points");
        if (labels.size() != points.size()) throw contract_error("constellation: labels/points count mismatch");
        const std::size_t d = labels.front().size();
        std::set<std::vector<std::uint8_t>> seen;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].size() != dim)
                throw contract_error("constellation: point " + std::to_string(i) + " has wrong dimension");
            for (double v : points[i])
                if (!std::isfinite(v))
                    throw contract_error("constellation: non-finite coordinate at point " + std::to_string(i));
            if (labels[i].size() != d)
                throw contract_error("constellation: label " + std::to_string(i) + " has wrong width");
            if (!seen.insert(labels[i]).second)
                throw contract_error("constellation: duplicate label at point " + std::to_string(i));
        }
    }
};

inline std::string label_string(const std::vector<std::uint8_t>& bits) {
    std::string s;
    s.reserve(bits.size());
    for (std::uint8_t b : bits) s.push_back(b ? '1' : '0');
    return s;
}

/// CSV layout: header `index,label_bits,c1..cm`, one row per point, labels as
/// 0/1 strings. Lines starting with '#' carry provenance and are skipped on read.
inline void write_constellation_csv(std::ostream& os, const Constellation& c,
                                    const std::string& provenance = "") {
    if (!provenance.empty()) os << "# " << provenance << "\n";
    os << "index,label_bits";
    for (std::size_t j = 1; j <= c.dim; ++j) os << ",c" << j;
    os << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < c.size(); ++i) {
        os << i << "," << label_string(c.labels[i]);
        for (double v : c.points[i]) os << "," << v;
        os << "\n";
    }
}

inline void write_constellation_csv(const std::string& path, const Constellation& c,
                                    const std::string& provenance = "") {
    std::ofstream os(path);
    if (!os) throw config_error("cannot open '" + path + "' for writing");
    write_constellation_csv(os, c, provenance);
}

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

} // namespace detail

inline Constellation read_constellation_csv(std::istream& is, const std::string& source_name = "<stream>") {
    Constellation c;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line.rfind("index,label_bits", 0) != 0)
                throw config_error(source_name + ":" + std::to_string(line_no) +
                                   ": expected header 'index,label_bits,c1..cm'");
            header_seen = true;
            continue;
        }
        const auto fields = detail::split_csv_row(line);
        if (fields.size() < 3)
            throw config_error(source_name + ":" + std::to_string(line_no) + ": expected at least 3 fields");
        std::vector<std::uint8_t> bits;
        for (char ch : fields[1]) {
            if (ch != '0' && ch != '1')
                throw config_error(source_name + ":" + std::to_string(line_no) + ": bad label bit '" +
                                   std::string(1, ch) + "'");
            bits.push_back(ch == '1' ? 1 : 0);
        }
        std::vector<double> point;
        for (std::size_t j = 2; j < fields.size(); ++j) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(fields[j], &pos);
                if (pos != fields[j].size()) throw std::invalid_argument("trailing characters");
                point.push_back(v);
            } catch (const std::exception&) {
                throw config_error(source_name + ":" + std::to_string(line_no) + ": bad coordinate '" +
                                   fields[j] + "'");
            }
        }
        if (c.points.empty()) c.dim = point.size();
        if (point.size() != c.dim)
            throw config_error(source_name + ":" + std::to_string(line_no) + ": inconsistent dimension");
        c.points.push_back(std::move(point));
        c.labels.push_back(std::move(bits));
    }
    if (!header_seen) throw config_error(source_name + ": missing header row");
    c.validate();
    return c;
}

inline Constellation read_constellation_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open '" + path + "'");
    return read_constellation_csv(is, path);
}

} // namespace vicomm
