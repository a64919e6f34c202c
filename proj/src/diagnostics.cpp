#include "ood/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ood/error.hpp"
#include "ood/io.hpp"
#include "ood/rng.hpp"
#include "parallel.hpp"

namespace ood::diagnostics {

namespace {

struct Summary {
    double mean = 0.0;
    double std = 0.0;
};

Summary summarize(const std::vector<double> &values) {
    Summary s;
    if (values.empty()) { return s; }
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values) { ss += (v - s.mean) * (v - s.mean); }
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

}  // namespace

ErrorCurve mc_error_study(Activation activation, int depth, const Eigen::Ref<const Eigen::MatrixXd> &points,
                          const std::vector<int> &sample_counts, int reps, std::uint64_t seed,
                          const McErrorOptions &options) {
    if (activation == Activation::Tanh) { throw InvalidArgument("mc_error_study: Tanh has no analytic reference"); }
    if (depth < 1) { throw InvalidArgument("mc_error_study: depth must be >= 1"); }
    if (reps < 1) { throw InvalidArgument("mc_error_study: reps must be >= 1"); }
    if (points.rows() < 1) { throw InvalidArgument("mc_error_study: need at least one point"); }

    kernel::Nngp analytic;
    analytic.depth = depth;
    analytic.activation = activation;
    analytic.sigma_w = options.sigma_w;
    analytic.sigma_b = options.sigma_b;
    analytic.input_dim = static_cast<int>(points.cols());

    const Eigen::Index m = points.rows();
    Eigen::VectorXd reference(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::VectorXd x = points.row(i).transpose();
        reference(i) = nngp_kernel(analytic, x, x);
    }

    ErrorCurve curve;
    curve.activation = activation;
    curve.depth = depth;
    for (std::size_t level = 0; level < sample_counts.size(); ++level) {
        const int n = sample_counts[level];
        if (n < 1) { throw InvalidArgument("mc_error_study: sample counts must be >= 1"); }
        kernel::Nngp mc = analytic;
        mc.mc_samples = n;
        const long jobs = static_cast<long>(m) * reps;
        std::vector<double> rel(static_cast<std::size_t>(jobs));
        std::vector<double> abs(static_cast<std::size_t>(jobs));
        detail::parallel_for(jobs, [&](long job) {
            const Eigen::Index i = job / reps;
            const long rep = job % reps;
            const Eigen::VectorXd x = points.row(i).transpose();
            const auto key = derive_seed(derive_seed(seed, level), static_cast<std::uint64_t>(i),
                                         static_cast<std::uint64_t>(rep));
            const double err = std::abs(nngp_kernel(mc, x, x, key) - reference(i));
            abs[static_cast<std::size_t>(job)] = err;
            rel[static_cast<std::size_t>(job)] = err / std::abs(reference(i));
        });
        const auto r = summarize(rel);
        const auto a = summarize(abs);
        curve.sample_counts.push_back(n);
        curve.mean_abs_rel_error.push_back(r.mean);
        curve.std_of_error.push_back(r.std);
        curve.mean_abs_error.push_back(a.mean);
        curve.std_of_abs_error.push_back(a.std);
    }
    return curve;
}

DistanceScatter distance_awareness(const KernelSpec &spec, const Eigen::Ref<const Eigen::MatrixXd> &X) {
    if (X.rows() < 2) { throw InvalidArgument("distance_awareness: need at least two points"); }
    const auto K = gram(spec, X).values;
    DistanceScatter scatter;
    scatter.pairs.reserve(static_cast<std::size_t>(X.rows() * (X.rows() - 1) / 2));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < X.rows(); ++j) {
            scatter.pairs.push_back({(X.row(i) - X.row(j)).norm(), K(i, j)});
        }
    }
    return scatter;
}

Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd> &values) {
    const Eigen::Index n = values.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values(a) < values(b); });
    Eigen::VectorXd ranks(n);
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n && values(order[static_cast<std::size_t>(end)]) == values(order[static_cast<std::size_t>(start)])) {
            ++end;
        }
        const double rank = 0.5 * static_cast<double>(start + end - 1) + 1.0;
        for (Eigen::Index k = start; k < end; ++k) { ranks(order[static_cast<std::size_t>(k)]) = rank; }
        start = end;
    }
    return ranks;
}

double spearman(const Eigen::Ref<const Eigen::VectorXd> &a, const Eigen::Ref<const Eigen::VectorXd> &b) {
    if (a.size() != b.size() || a.size() < 2) { throw InvalidArgument("spearman: need two equal-length vectors"); }
    const Eigen::VectorXd ra = average_ranks(a);
    const Eigen::VectorXd rb = average_ranks(b);
    const Eigen::VectorXd ca = ra.array() - ra.mean();
    const Eigen::VectorXd cb = rb.array() - rb.mean();
    const double denom = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
    if (!(denom > 0.0)) { throw InvalidArgument("spearman: undefined for a constant field"); }
    return std::clamp(ca.dot(cb) / denom, -1.0, 1.0);
}

FieldComparison field_compare(const UncertaintyField &a, const UncertaintyField &b) {
    if (a.grid.rows() != b.grid.rows() || a.grid.cols() != b.grid.cols() || a.grid != b.grid) {
        throw InvalidArgument("field_compare: fields are on different grids");
    }
    FieldComparison out;
    out.spearman_rho = spearman(a.std, b.std);
    const Eigen::VectorXd diff = (a.std - b.std).cwiseAbs();
    out.max_abs_diff = diff.maxCoeff();
    out.mean_abs_diff = diff.mean();
    return out;
}

void save_error_curve_csv(const ErrorCurve &curve, const std::filesystem::path &path) {
    const auto rows = static_cast<Eigen::Index>(curve.sample_counts.size());
    Eigen::MatrixXd table(rows, 5);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto k = static_cast<std::size_t>(i);
        table.row(i) << curve.sample_counts[k], curve.mean_abs_rel_error[k], curve.std_of_error[k],
            curve.mean_abs_error[k], curve.std_of_abs_error[k];
    }
    io::write_csv(path, {"N", "mean_abs_rel_error", "std_abs_rel_error", "mean_abs_error", "std_abs_error"}, table);
}

void save_distance_csv(const DistanceScatter &scatter, const std::filesystem::path &path) {
    Eigen::MatrixXd table(static_cast<Eigen::Index>(scatter.pairs.size()), 2);
    for (std::size_t i = 0; i < scatter.pairs.size(); ++i) {
        table.row(static_cast<Eigen::Index>(i)) << scatter.pairs[i].distance, scatter.pairs[i].kernel_value;
    }
    io::write_csv(path, {"distance", "kernel_value"}, table);
}

}  // namespace ood::diagnostics
