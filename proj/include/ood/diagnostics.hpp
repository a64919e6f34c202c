#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "ood/gp.hpp"
#include "ood/kernels.hpp"

namespace ood::diagnostics {

/// Error of the MC kernel diagonal against the analytic recursion, per sample count.
struct ErrorCurve {
    std::vector<int> sample_counts;
    std::vector<double> mean_abs_rel_error;
    std::vector<double> std_of_error;
    std::vector<double> mean_abs_error;
    std::vector<double> std_of_abs_error;
    Activation activation = Activation::ReLU;
    int depth = 1;
};

struct McErrorOptions {
    double sigma_w = 1.0;
    double sigma_b = 1.0;
};

/**
 * For each N in `sample_counts`, `reps` independent MC estimates of k(x, x)
 * at every row of `points`. Aggregates |MC - analytic| / analytic (and the
 * absolute error) over points and repetitions. Only ReLU and Erf have an
 * analytic reference; Tanh throws InvalidArgument.
 */
ErrorCurve mc_error_study(Activation activation, int depth, const Eigen::Ref<const Eigen::MatrixXd> &points,
                          const std::vector<int> &sample_counts, int reps, std::uint64_t seed,
                          const McErrorOptions &options = {});

struct DistancePair {
    double distance = 0.0;
    double kernel_value = 0.0;
};

struct DistanceScatter {
    std::vector<DistancePair> pairs;
};

/// Every unordered pair (i < j) of rows of X, in lexicographic order.
DistanceScatter distance_awareness(const KernelSpec &spec, const Eigen::Ref<const Eigen::MatrixXd> &X);

struct FieldComparison {
    double spearman_rho = 0.0;
    double max_abs_diff = 0.0;
    double mean_abs_diff = 0.0;
};

/// Ranks with ties sharing their average rank (1-based).
Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd> &values);

/// Spearman correlation; throws InvalidArgument when either input is constant.
double spearman(const Eigen::Ref<const Eigen::VectorXd> &a, const Eigen::Ref<const Eigen::VectorXd> &b);

/// Compares the std fields of two fields on the same grid.
FieldComparison field_compare(const UncertaintyField &a, const UncertaintyField &b);

void save_error_curve_csv(const ErrorCurve &curve, const std::filesystem::path &path);
void save_distance_csv(const DistanceScatter &scatter, const std::filesystem::path &path);

}  // namespace ood::diagnostics
