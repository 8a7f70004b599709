#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "rotconv/errors.hpp"
#include "rotconv/spectral/field.hpp"

namespace rotconv {

/// A named field at one instant, as stored in a `.field` snapshot file.
struct Snapshot {
    std::string name;
    double time = 0.0;
    SpectralField field;
};

namespace detail {

inline std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return r;
    }
    return v;
}

inline void put_f64(std::ostream& out, double x) {
    const std::uint64_t le = to_little_endian(std::bit_cast<std::uint64_t>(x));
    char buf[8];
    std::memcpy(buf, &le, 8);
    out.write(buf, 8);
}

inline double get_f64(std::istream& in) {
    char buf[8];
    if (!in.read(buf, 8)) throw InvalidInput("snapshot: truncated coefficient payload");
    std::uint64_t le;
    std::memcpy(&le, buf, 8);
    return std::bit_cast<double>(to_little_endian(le));
}

// Visits the full index set with j1 slowest, each j_d ascending from -N_d/2.
template <class Fn>
void for_each_file_order(const SpectralGrid& g, Fn&& fn) {
    for (int j1 = -g.nx() / 2; j1 < g.nx() / 2; ++j1)
        for (int j2 = -g.ny() / 2; j2 < g.ny() / 2; ++j2)
            for (int j3 = -g.nz() / 2; j3 < g.nz() / 2; ++j3) fn(g.index_of({j1, j2, j3}));
}

} // namespace detail

/// Header line `{"grid":{...},"name":...,"time":...}` then (re, im) float64
/// little-endian pairs in ascending j1, j2, j3 order.
inline void write_snapshot(std::ostream& out, const Snapshot& s) {
    const SpectralGrid& g = s.field.g();
    nlohmann::json header = {{"grid", {{"L", g.L()}, {"Nx", g.nx()}, {"Ny", g.ny()}, {"Nz", g.nz()}}},
                             {"name", s.name},
                             {"time", s.time}};
    out << header.dump() << '\n';
    detail::for_each_file_order(g, [&](std::size_t i) {
        detail::put_f64(out, s.field[i].real());
        detail::put_f64(out, s.field[i].imag());
    });
    if (!out) throw std::runtime_error("snapshot: write failed");
}

inline Snapshot read_snapshot(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("snapshot: missing header line");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("snapshot: malformed header: ") + e.what());
    }
    const auto& gj = header.at("grid");
    auto grid = SpectralGrid::make(gj.at("L").get<double>(), gj.at("Nx").get<int>(), gj.at("Ny").get<int>(),
                                   gj.at("Nz").get<int>());
    Snapshot s{header.at("name").get<std::string>(), header.at("time").get<double>(), SpectralField(grid)};
    detail::for_each_file_order(*grid, [&](std::size_t i) {
        const double re = detail::get_f64(in);
        const double im = detail::get_f64(in);
        s.field[i] = cplx(re, im);
    });
    return s;
}

inline void write_snapshot_file(const std::string& path, const Snapshot& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("snapshot: cannot open " + path);
    write_snapshot(out, s);
}

inline Snapshot read_snapshot_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("snapshot: cannot open " + path);
    return read_snapshot(in);
}

} // namespace rotconv
