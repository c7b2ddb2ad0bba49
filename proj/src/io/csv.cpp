#include "cnpgap/io/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <system_error>

#include "cnpgap/errors.hpp"

namespace cnpgap::io {

namespace {

template <class T>
T parse_field(std::string_view field, std::size_t line, const char* column) {
    T value{};
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError("csv", "line " + std::to_string(line) + ": bad " + column + " value '" +
                                     std::string(field) + "'");
    }
    return value;
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string trials_to_csv(const std::vector<TrialRecord>& records) {
    std::string out(kTrialsHeader);
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.n);
        out += ',';
        out += std::to_string(r.trial_index);
        out += ',';
        out += format_double(r.delta);
        out += ',';
        out += format_double(r.bound);
        out += ',';
        out += std::to_string(r.seed_used);
        out += '\n';
    }
    return out;
}

std::vector<TrialRecord> parse_trials_csv(std::string_view text) {
    std::vector<TrialRecord> records;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const std::size_t eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!header_seen) {
            if (line != kTrialsHeader) throw ConfigError("csv", "unexpected header '" + std::string(line) + "'");
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;

        std::array<std::string_view, 5> fields;
        std::size_t count = 0;
        while (count < fields.size()) {
            const std::size_t comma = line.find(',');
            fields[count++] = line.substr(0, comma);
            if (comma == std::string_view::npos) {
                line = {};
                break;
            }
            line = line.substr(comma + 1);
        }
        if (count != fields.size() || !line.empty()) {
            throw ConfigError("csv", "line " + std::to_string(line_no) + ": expected 5 fields");
        }
        TrialRecord r;
        r.n = parse_field<std::size_t>(fields[0], line_no, "n");
        r.trial_index = parse_field<std::size_t>(fields[1], line_no, "trial_index");
        r.delta = parse_field<double>(fields[2], line_no, "delta_nats");
        r.bound = parse_field<double>(fields[3], line_no, "bound_nats");
        r.seed_used = parse_field<std::uint64_t>(fields[4], line_no, "seed_used");
        records.push_back(r);
    }
    if (!header_seen) throw ConfigError("csv", "missing header");
    return records;
}

}  // namespace cnpgap::io
