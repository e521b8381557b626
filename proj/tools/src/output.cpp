#include "output.hpp"

#include "fracpme/errors.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fracpme::cli {

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw InternalError("SHA-256 failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

OutputDir::OutputDir(const std::filesystem::path& dir) {
    root_ = dir;
    if (root_.is_relative()) {
        const char* env = std::getenv("FRACPME_OUTPUT_ROOT");
        if (env != nullptr && *env != '\0') root_ = std::filesystem::path(env) / root_;
    }
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw InputError("cannot create output directory " + root_.string() + ": " + ec.message());
}

void OutputDir::write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ostringstream buffer;
    body(buffer);
    write_text(name, buffer.str());
}

void OutputDir::write_text(const std::string& name, const std::string& text) {
    const auto target = root_ / name;
    std::filesystem::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary);
    out << text;
    if (!out) throw InputError("cannot write " + target.string());
    files_.push_back({name, text.size(), sha256_hex(text)});
}

void OutputDir::write_json(const std::string& name, const Json& value) {
    write_text(name, value.dump(2) + "\n");
}

void OutputDir::write_manifest(Json header) const {
    Json files = Json::array();
    for (const auto& f : files_) {
        files.push_back({{"path", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
    }
    header["files"] = std::move(files);
    std::ofstream out(root_ / "manifest.json", std::ios::binary);
    out << header.dump(2) << "\n";
}

}  // namespace fracpme::cli
