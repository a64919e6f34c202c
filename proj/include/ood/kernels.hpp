#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <Eigen/Dense>
#include <json.hpp>

namespace ood {

enum class Activation { ReLU, Erf, Tanh };

std::string_view to_string(Activation activation);
Activation activation_from_string(std::string_view name);

/// Pointwise nonlinearity and its derivative.
double activate(Activation activation, double x) noexcept;
double activate_derivative(Activation activation, double x) noexcept;

namespace kernel {

/// Squared exponential: exp(-|x - x'|^2 / (2 l^2)).
struct Rbf {
    double l = 1.0;
};

/// exp(-2 sin^2(pi |x - x'| / p) / l^2).
struct Periodic {
    double l = 1.0;
    double p = 4.0;
};

/// sigma0_sq + x^T x'.
struct DotProduct {
    double sigma0_sq = 1.0;
};

/// Infinite-width fully connected network with `depth` hidden layers.
/// When `mc_samples` is set every layer step is estimated by Monte Carlo with
/// that many bivariate draws, keyed by `seed`.
struct Nngp {
    int depth = 1;
    Activation activation = Activation::ReLU;
    double sigma_w = 1.0;
    double sigma_b = 1.0;
    int input_dim = 2;
    std::optional<int> mc_samples;
    std::uint64_t seed = 0;
};

/// Infinite-width single hidden layer RBF network with Gaussian centre prior.
struct RbfNet {
    double sigma_b = 1.0;
    double sigma_w = 200.0;
    double sigma_g = 1.0;
    double sigma_mu = 10.0;
    int input_dim = 2;
};

}  // namespace kernel

using KernelSpec = std::variant<kernel::Rbf, kernel::Periodic, kernel::DotProduct, kernel::Nngp, kernel::RbfNet>;

/// Throws InvalidArgument when a hyperparameter is out of range.
void validate(const KernelSpec &spec);

/// Short name used in messages, e.g. "NNGP(ReLU, depth 2)".
std::string describe(const KernelSpec &spec);

[[nodiscard]] bool uses_monte_carlo(const KernelSpec &spec);

/// Input dimension fixed by the spec, if any.
std::optional<int> input_dim(const KernelSpec &spec);

/// JSON object with a "kind" tag (RBF, Periodic, DotProduct, NNGP, RBFNet)
/// and the spec's fields under their own names.
nlohmann::json to_json(const KernelSpec &spec);
KernelSpec kernel_from_json(const nlohmann::json &doc);

using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// k(x, x'). MC-based NNGP kernels draw every layer from the spec's seed, so
/// all evaluations under one spec share the same standard-normal draws.
double kernel_eval(const KernelSpec &spec, const VectorRef &x, const VectorRef &x2);

/// First NNGP layer: sigma_b^2 + sigma_w^2 x^T x' / d with d = len(x).
double nngp_base(const VectorRef &x, const VectorRef &x2, double sigma_w, double sigma_b);

/// Covariance of the pre-activations at a pair of inputs.
struct KernelTriple {
    double xx;
    double xy;
    double yy;
};

/// Closed-form ReLU layer (arc-cosine kernel of degree one).
double nngp_relu_step(double k_xx, double k_xy, double k_yy, double sigma_w, double sigma_b);
KernelTriple nngp_relu_step(const KernelTriple &k, double sigma_w, double sigma_b);

/// Closed-form erf layer: sigma_b^2 + sigma_w^2 (2/pi) asin(2 k_xy / sqrt((1+2k_xx)(1+2k_yy))).
double nngp_erf_step(double k_xx, double k_xy, double k_yy, double sigma_w, double sigma_b);
KernelTriple nngp_erf_step(const KernelTriple &k, double sigma_w, double sigma_b);

/// Monte Carlo layer: N draws (u, v) ~ N(0, [[k_xx, k_xy], [k_xy, k_yy]]),
/// returns sigma_b^2 + sigma_w^2 mean(h(u) h(v)).
double nngp_mc_step(double k_xx, double k_xy, double k_yy, Activation activation, double sigma_w, double sigma_b,
                    int samples, std::uint64_t seed);

/// Same draws, all three entries of the next layer's covariance.
KernelTriple nngp_mc_step(const KernelTriple &k, Activation activation, double sigma_w, double sigma_b, int samples,
                          std::uint64_t seed);

/// Full layer recursion; analytic for ReLU/Erf unless `mc_samples` is set.
/// Layer l of the MC recursion uses derive_seed(seed, l).
double nngp_kernel(const kernel::Nngp &spec, const VectorRef &x, const VectorRef &x2, std::uint64_t seed);
double nngp_kernel(const kernel::Nngp &spec, const VectorRef &x, const VectorRef &x2);

double rbf_net_kernel(const kernel::RbfNet &spec, const VectorRef &x, const VectorRef &x2);

struct KernelMatrix {
    Eigen::MatrixXd values;
    double jitter_applied = 0.0;
};

/**
 * Square Gram matrix K(X, X) + jitter I. Only the upper triangle is evaluated
 * (entry (i, j), i <= j, is kernel_eval(x_i, x_j)) and then mirrored, so the
 * result is exactly symmetric. MC kernels reuse one set of draws for every
 * entry, so their estimation errors are shared and the matrix stays close to
 * positive semi-definite.
 */
KernelMatrix gram(const KernelSpec &spec, const Eigen::Ref<const Eigen::MatrixXd> &X, double jitter = 0.0);

/// Cross matrix K(X, X2); no jitter.
KernelMatrix gram(const KernelSpec &spec, const Eigen::Ref<const Eigen::MatrixXd> &X,
                  const Eigen::Ref<const Eigen::MatrixXd> &X2);

/// Diagonal k(x_i, x_i), equal to the diagonal of gram(spec, X).
Eigen::VectorXd gram_diagonal(const KernelSpec &spec, const Eigen::Ref<const Eigen::MatrixXd> &X);

}  // namespace ood
