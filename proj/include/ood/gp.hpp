#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "ood/datasets.hpp"
#include "ood/kernels.hpp"

namespace ood {

/// Likelihood variance used for every two-dimensional experiment.
inline constexpr double kDefaultNoiseVar = 0.02;

struct GPPosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    Eigen::Index train_count = 0;
    double noise_var = kDefaultNoiseVar;
};

struct UncertaintyField {
    Eigen::MatrixXd grid;
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
};

/**
 * Cholesky factor of K(X,X) + noise_var I, computed once per dataset and
 * shared read-only by every query. Jitter is escalated through
 * 0, 1e-10, 1e-8, 1e-6 before giving up with a NumericalError that carries
 * the smallest eigenvalue of the failing matrix. With `clip_eigenvalues`,
 * a kernel matrix that still fails is replaced by its projection onto the
 * PSD cone (negative eigenvalues set to zero) before adding noise_var.
 */
class GpModel {
public:
    GpModel(KernelSpec spec, Dataset data, double noise_var, bool clip_eigenvalues = false);

    [[nodiscard]] const KernelSpec &kernel() const noexcept { return m_spec_; }
    [[nodiscard]] const Dataset &data() const noexcept { return m_data_; }
    [[nodiscard]] double noise_var() const noexcept { return m_noise_var_; }
    /// Extra diagonal jitter that was needed on top of noise_var.
    [[nodiscard]] double jitter() const noexcept { return m_jitter_; }
    /// Whether the eigenvalue-clipping fallback was used.
    [[nodiscard]] bool clipped() const noexcept { return m_clipped_; }

    /// Posterior with the full m x m covariance.
    [[nodiscard]] GPPosterior posterior(const Eigen::Ref<const Eigen::MatrixXd> &Xstar) const;

    /// Posterior mean and variance only; O(m n) memory.
    void mean_and_variance(const Eigen::Ref<const Eigen::MatrixXd> &Xstar, Eigen::VectorXd &mean,
                           Eigen::VectorXd &variance) const;

    /// [K(X,X) + noise_var I]^{-1} b.
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd> &b) const;

private:
    KernelSpec m_spec_;
    Dataset m_data_;
    double m_noise_var_;
    double m_jitter_ = 0.0;
    bool m_clipped_ = false;
    Eigen::LLT<Eigen::MatrixXd> m_llt_;
    Eigen::VectorXd m_alpha_;
};

GPPosterior posterior(const KernelSpec &spec, const Dataset &data, double noise_var,
                      const Eigen::Ref<const Eigen::MatrixXd> &Xstar, bool clip_eigenvalues = false);

/// sqrt(max(diag(cov), 0)).
Eigen::VectorXd predictive_std(const GPPosterior &post);

/// Posterior variance written as prior variance minus kernel-weighted
/// contributions of the training points: var = k(x*,x*) - sum_i beta_i k(x*,x_i).
struct KdeDecomposition {
    Eigen::VectorXd beta;
    double prior_var = 0.0;
    double posterior_var = 0.0;
};

KdeDecomposition kde_weights(const KernelSpec &spec, const Dataset &data, double noise_var,
                             const Eigen::Ref<const Eigen::VectorXd> &xstar);

/// k(x*, x*) at every grid row.
Eigen::VectorXd prior_variance_field(const KernelSpec &spec, const Eigen::Ref<const Eigen::MatrixXd> &grid);

UncertaintyField field(const KernelSpec &spec, const Dataset &data, double noise_var,
                       const Eigen::Ref<const Eigen::MatrixXd> &grid, bool clip_eigenvalues = false);

/// `x1,...,xd,mean,std`.
void save_field_csv(const UncertaintyField &f, const std::filesystem::path &path);
UncertaintyField load_field_csv(const std::filesystem::path &path);

/// Reshapes a per-grid-point vector of a 2-D grid into an image (rows = axis 1,
/// cols = axis 0) and writes it with io::write_pgm.
void save_field_pgm(const Eigen::Ref<const Eigen::VectorXd> &values, int resolution,
                    const std::filesystem::path &path);

}  // namespace ood
