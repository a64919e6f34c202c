#include "ood/gp.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ood/error.hpp"
#include "ood/io.hpp"

namespace ood {

namespace {

constexpr std::array<double, 4> kJitterLadder{0.0, 1e-10, 1e-8, 1e-6};

void check_inputs(const KernelSpec &spec, const Dataset &data, double noise_var, Eigen::Index test_dim,
                  bool has_test) {
    if (!(noise_var > 0.0)) { throw InvalidArgument(fmt::format("noise_var must be positive, got {}", noise_var)); }
    if (data.X.rows() != data.y.size()) { throw InvalidArgument("dataset rows and targets differ in length"); }
    if (data.size() > 0 && has_test && data.dim() != test_dim) {
        throw InvalidArgument(fmt::format("test inputs have dimension {}, training inputs {}", test_dim, data.dim()));
    }
    if (const auto d = input_dim(spec); d && has_test && test_dim != *d) {
        throw InvalidArgument(fmt::format("{} expects dimension {}, got {}", describe(spec), *d, test_dim));
    }
}

}  // namespace

GpModel::GpModel(KernelSpec spec, Dataset data, double noise_var, bool clip_eigenvalues)
    : m_spec_(std::move(spec)), m_data_(std::move(data)), m_noise_var_(noise_var) {
    check_inputs(m_spec_, m_data_, noise_var, 0, false);
    const Eigen::Index n = m_data_.size();
    if (n == 0) {
        m_alpha_.resize(0);
        return;
    }
    const Eigen::MatrixXd K = gram(m_spec_, m_data_.X, noise_var).values;
    for (const double jitter : kJitterLadder) {
        Eigen::MatrixXd A = K;
        A.diagonal().array() += jitter;
        m_llt_.compute(A);
        if (m_llt_.info() == Eigen::Success) {
            m_jitter_ = jitter;
            m_alpha_ = m_llt_.solve(m_data_.y);
            return;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K - noise_var * Eigen::MatrixXd::Identity(n, n));
    if (clip_eigenvalues) {
        const Eigen::MatrixXd &Q = eig.eigenvectors();
        Eigen::MatrixXd A = Q * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * Q.transpose();
        A = 0.5 * (A + A.transpose()).eval();
        A.diagonal().array() += noise_var;
        m_llt_.compute(A);
        if (m_llt_.info() == Eigen::Success) {
            m_clipped_ = true;
            m_alpha_ = m_llt_.solve(m_data_.y);
            return;
        }
    }
    const double smallest = eig.eigenvalues().minCoeff() + noise_var;
    throw NumericalError(fmt::format("{}: K(X,X) + {} I is not positive definite after jitter {} "
                                     "(smallest eigenvalue {})",
                                     describe(m_spec_), noise_var, kJitterLadder.back(), smallest),
                         smallest);
}

Eigen::VectorXd GpModel::solve(const Eigen::Ref<const Eigen::VectorXd> &b) const {
    if (b.size() != m_data_.size()) { throw InvalidArgument("solve: right-hand side has wrong length"); }
    if (m_data_.size() == 0) { return Eigen::VectorXd(0); }
    return m_llt_.solve(b);
}

GPPosterior GpModel::posterior(const Eigen::Ref<const Eigen::MatrixXd> &Xstar) const {
    check_inputs(m_spec_, m_data_, m_noise_var_, Xstar.cols(), true);
    GPPosterior post;
    post.train_count = m_data_.size();
    post.noise_var = m_noise_var_;
    post.cov = gram(m_spec_, Xstar, 0.0).values;
    if (m_data_.size() == 0) {
        post.mean = Eigen::VectorXd::Zero(Xstar.rows());
        return post;
    }
    const Eigen::MatrixXd Kcross = gram(m_spec_, Xstar, m_data_.X).values;  // m x n
    post.mean = Kcross * m_alpha_;
    // V = L^{-1} K(X, X*); C = K** - V^T V.
    const Eigen::MatrixXd V = m_llt_.matrixL().solve(Kcross.transpose());
    post.cov.noalias() -= V.transpose() * V;
    // Restore exact symmetry lost to rounding in the product.
    post.cov = 0.5 * (post.cov + post.cov.transpose()).eval();
    return post;
}

void GpModel::mean_and_variance(const Eigen::Ref<const Eigen::MatrixXd> &Xstar, Eigen::VectorXd &mean,
                                Eigen::VectorXd &variance) const {
    check_inputs(m_spec_, m_data_, m_noise_var_, Xstar.cols(), true);
    variance = gram_diagonal(m_spec_, Xstar);
    if (m_data_.size() == 0) {
        mean = Eigen::VectorXd::Zero(Xstar.rows());
        return;
    }
    const Eigen::MatrixXd Kcross = gram(m_spec_, Xstar, m_data_.X).values;
    mean = Kcross * m_alpha_;
    const Eigen::MatrixXd V = m_llt_.matrixL().solve(Kcross.transpose());
    variance -= V.colwise().squaredNorm().transpose();
}

GPPosterior posterior(const KernelSpec &spec, const Dataset &data, double noise_var,
                      const Eigen::Ref<const Eigen::MatrixXd> &Xstar, bool clip_eigenvalues) {
    return GpModel(spec, data, noise_var, clip_eigenvalues).posterior(Xstar);
}

Eigen::VectorXd predictive_std(const GPPosterior &post) { return post.cov.diagonal().cwiseMax(0.0).cwiseSqrt(); }

KdeDecomposition kde_weights(const KernelSpec &spec, const Dataset &data, double noise_var,
                             const Eigen::Ref<const Eigen::VectorXd> &xstar) {
    const GpModel model(spec, data, noise_var);
    const Eigen::MatrixXd row = xstar.transpose();
    check_inputs(spec, data, noise_var, row.cols(), true);
    KdeDecomposition out;
    out.prior_var = gram_diagonal(spec, row)(0);
    if (data.size() == 0) {
        out.beta.resize(0);
        out.posterior_var = out.prior_var;
        return out;
    }
    const Eigen::VectorXd kstar = gram(spec, row, data.X).values.row(0).transpose();
    out.beta = model.solve(kstar);
    out.posterior_var = out.prior_var - out.beta.dot(kstar);
    return out;
}

Eigen::VectorXd prior_variance_field(const KernelSpec &spec, const Eigen::Ref<const Eigen::MatrixXd> &grid) {
    return gram_diagonal(spec, grid);
}

UncertaintyField field(const KernelSpec &spec, const Dataset &data, double noise_var,
                       const Eigen::Ref<const Eigen::MatrixXd> &grid, bool clip_eigenvalues) {
    const GpModel model(spec, data, noise_var, clip_eigenvalues);
    UncertaintyField out;
    out.grid = grid;
    Eigen::VectorXd variance;
    model.mean_and_variance(grid, out.mean, variance);
    out.std = variance.cwiseMax(0.0).cwiseSqrt();
    return out;
}

void save_field_csv(const UncertaintyField &f, const std::filesystem::path &path) {
    const Eigen::Index d = f.grid.cols();
    if (f.mean.size() != f.grid.rows() || f.std.size() != f.grid.rows()) {
        throw InvalidArgument("field: grid, mean and std lengths differ");
    }
    std::vector<std::string> header;
    for (Eigen::Index k = 0; k < d; ++k) { header.push_back(fmt::format("x{}", k + 1)); }
    header.emplace_back("mean");
    header.emplace_back("std");
    Eigen::MatrixXd table(f.grid.rows(), d + 2);
    table << f.grid, f.mean, f.std;
    io::write_csv(path, header, table);
}

UncertaintyField load_field_csv(const std::filesystem::path &path) {
    const auto table = io::read_csv(path);
    const auto cols = static_cast<Eigen::Index>(table.header.size());
    if (cols < 3 || table.header[table.header.size() - 2] != "mean" || table.header.back() != "std") {
        throw InvalidArgument(fmt::format("'{}': header must be x1,...,xd,mean,std", path.string()));
    }
    UncertaintyField f;
    f.grid = table.values.leftCols(cols - 2);
    f.mean = table.values.col(cols - 2);
    f.std = table.values.col(cols - 1);
    return f;
}

void save_field_pgm(const Eigen::Ref<const Eigen::VectorXd> &values, int resolution,
                    const std::filesystem::path &path) {
    if (resolution < 1 || values.size() != static_cast<Eigen::Index>(resolution) * resolution) {
        throw InvalidArgument("save_field_pgm: values do not form a square 2-D grid");
    }
    Eigen::MatrixXd image(resolution, resolution);
    for (int r = 0; r < resolution; ++r) {
        for (int c = 0; c < resolution; ++c) { image(r, c) = values(static_cast<Eigen::Index>(r) * resolution + c); }
    }
    io::write_pgm(path, image);
}

}  // namespace ood
