#include "ood/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ood/error.hpp"
#include "ood/io.hpp"
#include "ood/rng.hpp"

namespace ood {

GridSpec GridSpec::square(double lo, double hi, int resolution, int dim) {
    return {Eigen::VectorXd::Constant(dim, lo), Eigen::VectorXd::Constant(dim, hi), resolution};
}

Dataset gen_gaussian_mixture(std::uint64_t seed, std::size_t n_per_component) {
    if (n_per_component < 1) { throw InvalidArgument("n_per_component must be >= 1"); }
    const auto n = static_cast<Eigen::Index>(n_per_component);
    const double scale = std::sqrt(kMixtureVariance);
    Dataset data;
    data.seed = seed;
    data.X.resize(2 * n, 2);
    data.y.resize(2 * n);
    Rng rng(seed);
    for (Eigen::Index c = 0; c < 2; ++c) {
        const double centre = c == 0 ? -2.0 : 2.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index row = c * n + i;
            data.X(row, 0) = centre + scale * rng.normal();
            data.X(row, 1) = centre + scale * rng.normal();
            data.y(row) = c == 0 ? -1.0 : 1.0;
        }
    }
    return data;
}

Dataset gen_two_rings(std::uint64_t seed, std::size_t n_total) {
    if (n_total < 2 || n_total % 2 != 0) {
        throw InvalidArgument(fmt::format("n_total must be even and >= 2, got {}", n_total));
    }
    const auto half = static_cast<Eigen::Index>(n_total / 2);
    Dataset data;
    data.seed = seed;
    data.X.resize(2 * half, 2);
    data.y.resize(2 * half);
    Rng rng(seed);
    for (Eigen::Index ring = 0; ring < 2; ++ring) {
        const double r_in = ring == 0 ? kInnerRingMin : kOuterRingMin;
        const double r_out = ring == 0 ? kInnerRingMax : kOuterRingMax;
        for (Eigen::Index i = 0; i < half; ++i) {
            const Eigen::Index row = ring * half + i;
            const double u = rng.uniform();
            const double angle = 2.0 * std::numbers::pi * rng.uniform();
            // Inverse CDF of the area-uniform radius; clamp absorbs rounding at the edges.
            double r = std::sqrt(u * (r_out * r_out - r_in * r_in) + r_in * r_in);
            r = std::clamp(r, r_in, r_out);
            data.X(row, 0) = r * std::cos(angle);
            data.X(row, 1) = r * std::sin(angle);
            data.y(row) = ring == 0 ? -1.0 : 1.0;
        }
    }
    return data;
}

Eigen::MatrixXd make_grid(const GridSpec &spec) {
    const auto dim = spec.lo.size();
    if (dim < 1 || spec.hi.size() != dim) { throw InvalidArgument("grid corners must have equal, non-zero size"); }
    if (spec.resolution < 2) { throw InvalidArgument(fmt::format("grid resolution must be >= 2, got {}", spec.resolution)); }
    if ((spec.lo.array() >= spec.hi.array()).any()) { throw InvalidArgument("grid requires lo < hi on every axis"); }
    const Eigen::Index res = spec.resolution;
    Eigen::Index count = 1;
    for (Eigen::Index k = 0; k < dim; ++k) { count *= res; }
    Eigen::MatrixXd grid(count, dim);
    for (Eigen::Index row = 0; row < count; ++row) {
        Eigen::Index rest = row;
        for (Eigen::Index k = 0; k < dim; ++k) {
            const Eigen::Index idx = rest % res;
            rest /= res;
            // Endpoints are assigned exactly so the corners are included bit-for-bit.
            if (idx == res - 1) {
                grid(row, k) = spec.hi(k);
            } else {
                grid(row, k) = spec.lo(k) + (spec.hi(k) - spec.lo(k)) * static_cast<double>(idx) /
                                                static_cast<double>(res - 1);
            }
        }
    }
    return grid;
}

GridSpec default_grid_mixture(int resolution) { return GridSpec::square(-6.0, 6.0, resolution); }

GridSpec default_grid_rings(int resolution) { return GridSpec::square(-12.0, 12.0, resolution); }

void save_csv(const Dataset &data, const std::filesystem::path &path) {
    if (data.X.rows() != data.y.size()) { throw InvalidArgument("dataset rows and targets differ in length"); }
    std::vector<std::string> header;
    for (Eigen::Index k = 0; k < data.dim(); ++k) { header.push_back(fmt::format("x{}", k + 1)); }
    header.emplace_back("y");
    Eigen::MatrixXd table(data.size(), data.dim() + 1);
    table << data.X, data.y;
    io::write_csv(path, header, table);
}

Dataset load_csv(const std::filesystem::path &path) {
    const auto table = io::read_csv(path);
    const auto cols = static_cast<Eigen::Index>(table.header.size());
    if (cols < 2 || table.header.back() != "y") {
        throw InvalidArgument(fmt::format("'{}': header must be x1,...,xd,y", path.string()));
    }
    for (Eigen::Index k = 0; k + 1 < cols; ++k) {
        if (table.header[static_cast<std::size_t>(k)] != fmt::format("x{}", k + 1)) {
            throw InvalidArgument(fmt::format("'{}': header must be x1,...,xd,y", path.string()));
        }
    }
    if (!table.values.allFinite()) { throw InvalidArgument(fmt::format("'{}': non-finite value", path.string())); }
    Dataset data;
    data.X = table.values.leftCols(cols - 1);
    data.y = table.values.col(cols - 1);
    return data;
}

}  // namespace ood
