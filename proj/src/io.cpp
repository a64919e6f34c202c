#include "ood/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "ood/error.hpp"

namespace ood::io {

std::string format_double(double value) {
    std::array<char, 64> buffer{};
    const auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    if (ec != std::errc{}) { throw InvalidArgument("cannot format double"); }
    return {buffer.data(), end};
}

double parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) { text.remove_prefix(1); }
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
        text.remove_suffix(1);
    }
    if (!text.empty() && text.front() == '+') { text.remove_prefix(1); }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw InvalidArgument(fmt::format("not a number: '{}'", text));
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

namespace {

std::string_view trim_line(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) { line.remove_suffix(1); }
    return line;
}

}  // namespace

Table read_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) { throw InvalidArgument(fmt::format("cannot open '{}'", path.string())); }
    Table table;
    std::string line;
    bool have_header = false;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim_line(line);
        if (text.empty()) { continue; }
        if (!have_header) {
            for (auto field : split(text)) { table.header.emplace_back(field); }
            have_header = true;
            continue;
        }
        const auto fields = split(text);
        if (fields.size() != table.header.size()) {
            throw InvalidArgument(fmt::format("{}:{}: expected {} fields, found {}", path.string(), line_no,
                                              table.header.size(), fields.size()));
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (auto field : fields) {
            try {
                row.push_back(parse_double(field));
            } catch (const InvalidArgument &e) {
                throw InvalidArgument(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
            }
        }
        rows.push_back(std::move(row));
    }
    if (!have_header) { throw InvalidArgument(fmt::format("'{}' is empty", path.string())); }
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return table;
}

void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const Eigen::Ref<const Eigen::MatrixXd> &values) {
    if (static_cast<Eigen::Index>(header.size()) != values.cols()) {
        throw InvalidArgument("CSV header and column count differ");
    }
    std::string out;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j > 0) { out += ','; }
        out += header[j];
    }
    out += '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (j > 0) { out += ','; }
            out += format_double(values(i, j));
        }
        out += '\n';
    }
    write_text(path, out);
}

void write_text(const std::filesystem::path &path, std::string_view text) {
    if (path.has_parent_path()) { std::filesystem::create_directories(path.parent_path()); }
    std::ofstream out(path, std::ios::binary);
    if (!out) { throw InvalidArgument(fmt::format("cannot write '{}'", path.string())); }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string read_text(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw InvalidArgument(fmt::format("cannot open '{}'", path.string())); }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_pgm(const std::filesystem::path &path, const Eigen::Ref<const Eigen::MatrixXd> &values) {
    const double lo = values.size() > 0 ? values.minCoeff() : 0.0;
    const double hi = values.size() > 0 ? values.maxCoeff() : 0.0;
    const double span = hi - lo;
    std::string out = fmt::format("P5\n{} {}\n255\n", values.cols(), values.rows());
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            double level = span > 0.0 ? (values(r, c) - lo) / span * 255.0 : 0.0;
            level = std::clamp(std::round(level), 0.0, 255.0);
            out.push_back(static_cast<char>(static_cast<unsigned char>(level)));
        }
    }
    write_text(path, out);
    write_text(std::filesystem::path(path.string() + ".txt"),
               fmt::format("min={}\nmax={}\n", format_double(lo), format_double(hi)));
}

}  // namespace ood::io
