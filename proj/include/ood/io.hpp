#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ood::io {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Strict parse of a full field; throws InvalidArgument on trailing garbage.
double parse_double(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Rows of a numeric CSV with a mandatory header line.
struct Table {
    std::vector<std::string> header;
    Eigen::MatrixXd values;
};

Table read_csv(const std::filesystem::path &path);

void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const Eigen::Ref<const Eigen::MatrixXd> &values);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path &path, std::string_view text);

std::string read_text(const std::filesystem::path &path);

/**
 * Binary 8-bit PGM (P5). `values` holds one row of the image per row of the
 * matrix. Intensities are rescaled to [0,255] over the values' own range; a
 * constant image maps to 0. The range is written to `<path>.txt` as
 * `min=<v>\nmax=<v>\n`.
 */
void write_pgm(const std::filesystem::path &path, const Eigen::Ref<const Eigen::MatrixXd> &values);

}  // namespace ood::io
