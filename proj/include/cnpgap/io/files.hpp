#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cnpgap::io {

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

/// Collects output files and commits them together. If any write fails, the
/// files already written by this batch are removed again before rethrowing.
class OutputBatch {
public:
    void add(std::filesystem::path path, std::string content);
    /// Returns the written paths in insertion order.
    std::vector<std::string> commit();

    std::vector<std::string> paths() const;

private:
    struct Entry {
        std::filesystem::path path;
        std::string content;
    };
    std::vector<Entry> entries_;
};

}  // namespace cnpgap::io
