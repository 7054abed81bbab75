#include "nozzle/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nozzle {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_le(std::ostream& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
    out.write(reinterpret_cast<const char*>(b), 8);
}

double get_le(const unsigned char* b) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= std::uint64_t(b[k]) << (8 * k);
    return std::bit_cast<double>(bits);
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

}  // namespace

json grid_json(const MappedGrid& grid) {
    json j;
    std::visit(
        [&](const auto& g) {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, TanhNozzle2D>) {
                j["geometry"] = {{"kind", "tanh2d"}, {"a", g.a}, {"b", g.b}};
            } else {
                j["geometry"] = {{"kind", "tanh_axisym"}, {"r0", g.r0}};
            }
        },
        grid.geometry());
    j["half_length"] = grid.half_length();
    j["n_xi"] = grid.n_xi();
    j["n_eta"] = grid.n_eta();
    return j;
}

void write_field(const fs::path& dir, const std::string& name, const Field& field, const MappedGrid& grid,
                 const std::string& config_hash) {
    if (field.rows() != grid.n_eta() || field.cols() != grid.n_xi())
        throw IoError("field '" + name + "' does not match the grid shape");
    {
        std::ofstream out = open_out(dir / (name + ".bin"));
        for (Eigen::Index j = 0; j < field.rows(); ++j)
            for (Eigen::Index i = 0; i < field.cols(); ++i) put_le(out, field(j, i));
        if (!out) throw IoError("short write on " + (dir / (name + ".bin")).string());
    }
    json side;
    side["name"] = name;
    side["shape"] = {field.rows(), field.cols()};
    side["dtype"] = "float64";
    side["byte_order"] = "little";
    side["layout"] = "row-major (n_eta, n_xi)";
    side["grid"] = grid_json(grid);
    side["config_hash"] = config_hash;
    write_json(dir / (name + ".json"), side);
}

Field read_field(const fs::path& dir, const std::string& name, FieldHeader* header, const std::string& expected_hash) {
    const json side = read_json(dir / (name + ".json"));
    FieldHeader h;
    h.name = side.at("name").get<std::string>();
    h.rows = side.at("shape").at(0).get<int>();
    h.cols = side.at("shape").at(1).get<int>();
    h.config_hash = side.at("config_hash").get<std::string>();
    h.grid = side.at("grid");
    if (!expected_hash.empty() && h.config_hash != expected_hash)
        throw IoError("field '" + name + "' was written under config " + h.config_hash);

    const fs::path bin = dir / (name + ".bin");
    std::ifstream in(bin, std::ios::binary);
    if (!in) throw IoError("cannot read " + bin.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t want = 8u * std::size_t(h.rows) * std::size_t(h.cols);
    if (bytes.size() != want)
        throw IoError(bin.string() + ": payload has " + std::to_string(bytes.size()) + " bytes, sidecar implies " +
                      std::to_string(want));
    Field f(h.rows, h.cols);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    for (int j = 0; j < h.rows; ++j)
        for (int i = 0; i < h.cols; ++i, p += 8) f(j, i) = get_le(p);
    if (header) *header = std::move(h);
    return f;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const fs::path& path, const CsvTable& table) {
    std::ofstream out = open_out(path);
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (cells[k].find_first_of(",\n\"") != std::string::npos)
                throw IoError("CSV cell needs quoting: " + cells[k]);
            out << (k ? "," : "") << cells[k];
        }
        out << '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) {
        if (r.size() != table.header.size()) throw IoError("CSV row width differs from header");
        line(r);
    }
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    CsvTable t;
    std::string s;
    bool first = true;
    while (std::getline(in, s)) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        if (first) t.header = std::move(cells);
        else t.rows.push_back(std::move(cells));
        first = false;
    }
    return t;
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out = open_out(path);
    out << doc.dump(2) << '\n';
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace nozzle
