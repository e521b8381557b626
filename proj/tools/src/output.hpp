#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace fracpme::cli {

using Json = nlohmann::ordered_json;

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Finite doubles as numbers, everything else as null.
Json number(double x);

/// Output directory of one run. Every file goes through `write` so the manifest can list it
/// with its checksum.
class OutputDir {
public:
    /// Relative paths resolve against $FRACPME_OUTPUT_ROOT when set, else the working directory.
    explicit OutputDir(const std::filesystem::path& dir);

    const std::filesystem::path& path() const noexcept { return root_; }
    void write(const std::string& name, const std::function<void(std::ostream&)>& body);
    void write_text(const std::string& name, const std::string& text);
    void write_json(const std::string& name, const Json& value);

    /// Writes manifest.json: files with sizes and checksums, plus `header` fields first.
    void write_manifest(Json header) const;

private:
    struct Entry {
        std::string name;
        std::size_t bytes;
        std::string sha256;
    };
    std::filesystem::path root_;
    std::vector<Entry> files_;
};

}  // namespace fracpme::cli
