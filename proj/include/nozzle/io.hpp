#pragma once

// Field files (little-endian float64 payload + JSON sidecar), CSV tables and JSON
// documents. Everything is written through std::filesystem paths by one writer.

#include "nozzle/core.hpp"
#include "nozzle/geometry.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace nozzle {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FieldHeader {
    std::string name;
    int rows = 0;  ///< n_eta
    int cols = 0;  ///< n_xi
    std::string config_hash;
    nlohmann::json grid;
};

nlohmann::json grid_json(const MappedGrid& grid);

/// Writes <dir>/<name>.bin and <dir>/<name>.json.
void write_field(const std::filesystem::path& dir, const std::string& name, const Field& field,
                 const MappedGrid& grid, const std::string& config_hash);

/// Loads a field written by write_field; checks the payload length against the sidecar
/// and, when `expected_hash` is nonempty, the config hash.
Field read_field(const std::filesystem::path& dir, const std::string& name, FieldHeader* header = nullptr,
                 const std::string& expected_hash = {});

/// %.17g, the shortest width that always round-trips a double.
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Comma-separated, LF line endings, header row first.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Pretty-printed with a trailing newline; non-finite numbers become null.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

/// JSON value for a double: the number itself, or null when not finite.
nlohmann::json json_number(double v);

}  // namespace nozzle
