#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ood/datasets.hpp"
#include "ood/gp.hpp"
#include "ood/hmc.hpp"
#include "ood/kernels.hpp"

namespace ood::bnn {

/// Fully connected network, scalar output, standard parameterization
/// (the prior carries the width scaling, not the forward pass).
struct MlpSpec {
    int input_dim = 2;
    std::vector<int> hidden_widths{5, 5};
    Activation activation = Activation::ReLU;
};

/// f(x) = sum_j w_j exp(-|x - mu_j|^2 / (2 sigma_g^2)) + b with learned centres.
struct RbfNetSpec {
    int input_dim = 2;
    int hidden_width = 500;
    double sigma_g = 1.0;
};

using NetworkSpec = std::variant<MlpSpec, RbfNetSpec>;

enum class PriorKind { WidthAware, Standard };

/**
 * Gaussian weight prior. WidthAware: weights ~ N(0, sigma_w^2 / fan_in), with
 * fan_in = d for the first layer. Standard: weights ~ N(0, sigma_w^2).
 * Biases ~ N(0, sigma_b^2). For RBF networks the centres are N(0, sigma_mu^2 I)
 * and the output weights N(0, sigma_w^2), divided by the width only when
 * `scale_rbf_output` is set; `kind` does not apply to them.
 */
struct PriorSpec {
    PriorKind kind = PriorKind::WidthAware;
    double sigma_w = 1.0;
    double sigma_b = 1.0;
    double sigma_mu = 10.0;
    bool scale_rbf_output = false;
};

/// One contiguous parameter block in the flat vector (row-major rows x cols).
struct ParamBlock {
    std::string name;
    Eigen::Index offset = 0;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    double prior_std = 1.0;

    [[nodiscard]] Eigen::Index size() const noexcept { return rows * cols; }
};

struct Layout {
    std::vector<ParamBlock> blocks;
    Eigen::Index size = 0;

    /// Column names for sample files, e.g. "W1[0;1]".
    [[nodiscard]] std::vector<std::string> parameter_names() const;
};

void validate(const NetworkSpec &spec);
void validate(const PriorSpec &prior);

/// Parameter layout with each block's prior standard deviation filled in.
Layout layout(const NetworkSpec &spec, const PriorSpec &prior = {});

Eigen::Index parameter_count(const NetworkSpec &spec);

struct WeightSample {
    Eigen::VectorXd values;
};

/// Network outputs for each row of X. Throws InvalidArgument on a size mismatch.
Eigen::VectorXd forward(const NetworkSpec &spec, const Eigen::Ref<const Eigen::VectorXd> &w,
                        const Eigen::Ref<const Eigen::MatrixXd> &X);

/// Normalized Gaussian log prior, sum over all parameters.
double log_prior(const NetworkSpec &spec, const PriorSpec &prior, const Eigen::Ref<const Eigen::VectorXd> &w);

/// sum_i log N(y_i | f(x_i; w), noise_var), normalized.
double log_likelihood(const NetworkSpec &spec, const Dataset &data, double noise_var,
                      const Eigen::Ref<const Eigen::VectorXd> &w);

double log_posterior(const NetworkSpec &spec, const PriorSpec &prior, const Dataset &data, double noise_var,
                     const Eigen::Ref<const Eigen::VectorXd> &w);

/// Reverse-mode gradient of log_posterior (ReLU derivative at 0 is 0).
Eigen::VectorXd grad_log_posterior(const NetworkSpec &spec, const PriorSpec &prior, const Dataset &data,
                                   double noise_var, const Eigen::Ref<const Eigen::VectorXd> &w);

/// Value and gradient in one pass.
double log_posterior_and_grad(const NetworkSpec &spec, const PriorSpec &prior, const Dataset &data,
                              double noise_var, const Eigen::Ref<const Eigen::VectorXd> &w,
                              Eigen::VectorXd *grad);

/// One draw from the prior.
Eigen::VectorXd sample_prior(const NetworkSpec &spec, const PriorSpec &prior, Rng &rng);

struct HmcRun {
    std::vector<WeightSample> samples;
    std::vector<hmc::ChainReport> chains;
};

HmcRun hmc_sample(const NetworkSpec &spec, const PriorSpec &prior, const Dataset &data, double noise_var,
                  const hmc::Config &config);

/// Default leapfrog step size: 1e-3 below width 50, 1e-4 from width 50 up.
double default_step_size(const NetworkSpec &spec);

/**
 * Mean and population standard deviation of the network outputs over the
 * samples at every grid row. Epistemic only: no likelihood noise is added.
 */
UncertaintyField predictive_moments(const NetworkSpec &spec, const std::vector<WeightSample> &samples,
                                    const Eigen::Ref<const Eigen::MatrixXd> &grid);

/// One row per sample, header from Layout::parameter_names().
void save_samples_csv(const NetworkSpec &spec, const std::vector<WeightSample> &samples,
                      const std::filesystem::path &path);

nlohmann::json to_json(const NetworkSpec &spec);
nlohmann::json to_json(const PriorSpec &prior);
NetworkSpec network_from_json(const nlohmann::json &doc);
PriorSpec prior_from_json(const nlohmann::json &doc);

}  // namespace ood::bnn
