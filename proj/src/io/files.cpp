#include "cnpgap/io/files.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "cnpgap/errors.hpp"

namespace cnpgap::io {

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), "cannot open file for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

void OutputBatch::add(std::filesystem::path path, std::string content) {
    entries_.push_back(Entry{std::move(path), std::move(content)});
}

std::vector<std::string> OutputBatch::paths() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.path.string());
    return out;
}

std::vector<std::string> OutputBatch::commit() {
    std::vector<std::filesystem::path> written;
    try {
        for (const auto& e : entries_) {
            atomic_write(e.path, e.content);
            written.push_back(e.path);
        }
    } catch (...) {
        for (const auto& p : written) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
        throw;
    }
    return paths();
}

}  // namespace cnpgap::io
