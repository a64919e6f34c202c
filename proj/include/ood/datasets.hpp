#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Dense>

namespace ood {

/// Regression data: one input per row of X, one target per entry of y.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::uint64_t seed = 0;

    [[nodiscard]] Eigen::Index size() const noexcept { return X.rows(); }
    [[nodiscard]] Eigen::Index dim() const noexcept { return X.cols(); }
};

/// Axis-aligned box sampled with `resolution` points per axis.
struct GridSpec {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
    int resolution = 20;

    /// Square box [lo, hi]^dim.
    static GridSpec square(double lo, double hi, int resolution, int dim = 2);
};

inline constexpr double kMixtureVariance = 0.5;
inline constexpr double kInnerRingMin = 3.0;
inline constexpr double kInnerRingMax = 4.0;
inline constexpr double kOuterRingMin = 8.0;
inline constexpr double kOuterRingMax = 9.0;

/// Two isotropic Gaussians at (-2,-2) and (2,2) with covariance 0.5 I.
/// Rows [0, n) come from the first component (y = -1), rows [n, 2n) from the
/// second (y = +1).
Dataset gen_gaussian_mixture(std::uint64_t seed, std::size_t n_per_component = 10);

/// Points uniform by area on the annuli 3 <= r <= 4 (y = -1) and 8 <= r <= 9
/// (y = +1), half of `n_total` on each. Throws InvalidArgument for odd or
/// zero `n_total`.
Dataset gen_two_rings(std::uint64_t seed, std::size_t n_total = 50);

/// Evenly spaced grid including the corners; axis 0 varies fastest.
Eigen::MatrixXd make_grid(const GridSpec &spec);

/// Default evaluation boxes: [-6,6]^2 for the mixture, [-12,12]^2 for the rings.
GridSpec default_grid_mixture(int resolution = 20);
GridSpec default_grid_rings(int resolution = 20);

/// CSV with header `x1,...,xd,y`; doubles written in shortest round-trip form.
void save_csv(const Dataset &data, const std::filesystem::path &path);

/// Reads a file written by save_csv. A header with no rows yields an empty
/// dataset of the header's dimension; a missing header is an error.
Dataset load_csv(const std::filesystem::path &path);

}  // namespace ood
