#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "freshsim/costmodel.hpp"
#include "freshsim/sweep.hpp"

namespace freshsim {

/// Shortest decimal form that parses back to the same double (std::to_chars);
/// locale-independent, so CSV cells always use '.' and round-trip exactly.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc()) throw std::runtime_error("format_double: to_chars failed");
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view cell) {
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw std::invalid_argument("parse_double: bad numeric cell '" + std::string(cell) +
                                    "'");
    return v;
}

inline std::int64_t parse_int(std::string_view cell) {
    std::int64_t v = 0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw std::invalid_argument("parse_int: bad integer cell '" + std::string(cell) + "'");
    return v;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::string sanitize_cell(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

inline std::string read_header_line(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::invalid_argument("csv: missing header row");
    if (!header.empty() && header.back() == '\r') header.pop_back();
    return header;
}

}  // namespace detail

inline constexpr const char* kRecordsCsvHeader = "i,t_gen,t_recv,Y,T,V,Q";

inline void write_records_csv(std::ostream& out, const std::vector<UpdateRecord>& records) {
    out << kRecordsCsvHeader << '\n';
    for (const UpdateRecord& r : records) {
        out << r.index << ',' << format_double(r.gen_time) << ','
            << format_double(r.recv_time) << ',' << format_double(r.interarrival) << ','
            << format_double(r.system_time) << ',' << format_double(r.voiu) << ','
            << format_double(r.area) << '\n';
    }
}

inline std::vector<UpdateRecord> read_records_csv(std::istream& in) {
    if (detail::read_header_line(in) != kRecordsCsvHeader)
        throw std::invalid_argument("records csv: unexpected header");
    std::vector<UpdateRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> c = detail::split_csv_line(line);
        if (c.size() != 7) throw std::invalid_argument("records csv: bad column count");
        UpdateRecord r;
        r.index = parse_int(c[0]);
        r.gen_time = parse_double(c[1]);
        r.recv_time = parse_double(c[2]);
        r.interarrival = parse_double(c[3]);
        r.system_time = parse_double(c[4]);
        r.voiu = parse_double(c[5]);
        r.area = parse_double(c[6]);
        records.push_back(r);
    }
    return records;
}

inline std::string sweep_csv_header(SweepMode mode) {
    switch (mode) {
        case SweepMode::Analytic: return "rho,model_kind,alpha,coud,voiu_rate,valid,note";
        case SweepMode::Simulation:
            return "rho,model_kind,alpha,sim_coud,sim_coud_ci95,sim_voiu_rate,sim_voiu_ci95,"
                   "note";
        case SweepMode::Both:
            return "rho,model_kind,alpha,coud,voiu_rate,valid,sim_coud,sim_coud_ci95,"
                   "sim_voiu_rate,sim_voiu_ci95,note";
    }
    throw std::logic_error("sweep_csv_header: bad mode");
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                            SweepMode mode) {
    out << sweep_csv_header(mode) << '\n';
    for (const SweepRow& r : rows) {
        out << format_double(r.rho) << ',' << to_string(r.model.kind) << ','
            << format_double(r.model.alpha);
        if (mode != SweepMode::Simulation)
            out << ',' << format_double(r.coud) << ',' << format_double(r.voiu_rate) << ','
                << (r.valid ? "true" : "false");
        if (mode != SweepMode::Analytic)
            out << ',' << format_double(r.sim_coud) << ',' << format_double(r.sim_coud_ci95)
                << ',' << format_double(r.sim_voiu_rate) << ','
                << format_double(r.sim_voiu_ci95);
        const std::string note = r.error.empty() ? r.note : "error: " + r.error;
        out << ',' << detail::sanitize_cell(note) << '\n';
    }
}

/// Reads a sweep table written by write_sweep_csv; the mode is inferred from
/// the header.
inline std::pair<std::vector<SweepRow>, SweepMode> read_sweep_csv(std::istream& in) {
    const std::string header = detail::read_header_line(in);
    SweepMode mode;
    if (header == sweep_csv_header(SweepMode::Analytic)) mode = SweepMode::Analytic;
    else if (header == sweep_csv_header(SweepMode::Simulation)) mode = SweepMode::Simulation;
    else if (header == sweep_csv_header(SweepMode::Both)) mode = SweepMode::Both;
    else throw std::invalid_argument("sweep csv: unexpected header");

    std::vector<SweepRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> c = detail::split_csv_line(line);
        SweepRow r;
        std::size_t k = 0;
        r.rho = parse_double(c.at(k++));
        const CostKind kind = parse_cost_kind(c.at(k++));
        r.model = CostModel(kind, parse_double(c.at(k++)));
        if (mode != SweepMode::Simulation) {
            r.coud = parse_double(c.at(k++));
            r.voiu_rate = parse_double(c.at(k++));
            const std::string& flag = c.at(k++);
            if (flag != "true" && flag != "false")
                throw std::invalid_argument("sweep csv: bad validity flag");
            r.valid = flag == "true";
        }
        if (mode != SweepMode::Analytic) {
            r.sim_coud = parse_double(c.at(k++));
            r.sim_coud_ci95 = parse_double(c.at(k++));
            r.sim_voiu_rate = parse_double(c.at(k++));
            r.sim_voiu_ci95 = parse_double(c.at(k++));
        }
        if (k + 1 != c.size()) throw std::invalid_argument("sweep csv: bad column count");
        r.note = c.at(k);
        rows.push_back(std::move(r));
    }
    return {std::move(rows), mode};
}

}  // namespace freshsim
