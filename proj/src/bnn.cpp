#include "ood/bnn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "ood/error.hpp"
#include "ood/io.hpp"

namespace ood::bnn {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstBlockMap = Eigen::Map<const RowMajorMatrix>;
using BlockMap = Eigen::Map<RowMajorMatrix>;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

ConstBlockMap view(const Eigen::Ref<const Eigen::VectorXd> &w, const ParamBlock &b) {
    return {w.data() + b.offset, b.rows, b.cols};
}

BlockMap view(Eigen::VectorXd &w, const ParamBlock &b) { return {w.data() + b.offset, b.rows, b.cols}; }

void check_size(const Layout &lay, const Eigen::Ref<const Eigen::VectorXd> &w) {
    if (w.size() != lay.size) {
        throw InvalidArgument(fmt::format("weight vector has {} entries, layout expects {}", w.size(), lay.size));
    }
}

void check_inputs(const NetworkSpec &spec, const Eigen::Ref<const Eigen::MatrixXd> &X) {
    const int d = std::visit([](const auto &s) { return s.input_dim; }, spec);
    if (X.rows() > 0 && X.cols() != d) {
        throw InvalidArgument(fmt::format("network expects inputs of dimension {}, got {}", d, X.cols()));
    }
}

Eigen::MatrixXd apply(Activation act, const Eigen::MatrixXd &z) {
    return z.unaryExpr([act](double v) { return activate(act, v); });
}

Eigen::MatrixXd apply_derivative(Activation act, const Eigen::MatrixXd &z) {
    return z.unaryExpr([act](double v) { return activate_derivative(act, v); });
}

/**
 * Forward pass on inputs X (m x d). When `dout` is given (d log-lik / d f per
 * row), accumulates the parameter gradient into `grad`.
 */
Eigen::VectorXd mlp_pass(const MlpSpec &spec, const Layout &lay, const Eigen::Ref<const Eigen::VectorXd> &w,
                         const Eigen::Ref<const Eigen::MatrixXd> &X, const Eigen::VectorXd *dout,
                         Eigen::VectorXd *grad) {
    const auto hidden = spec.hidden_widths.size();
    std::vector<Eigen::MatrixXd> pre(hidden);
    std::vector<Eigen::MatrixXd> post(hidden + 1);
    post[0] = X.transpose();
    for (std::size_t l = 0; l < hidden; ++l) {
        const auto W = view(w, lay.blocks[2 * l]);
        const auto b = view(w, lay.blocks[2 * l + 1]);
        pre[l].noalias() = W * post[l];
        pre[l].colwise() += b.col(0);
        post[l + 1] = apply(spec.activation, pre[l]);
    }
    const auto W_out = view(w, lay.blocks[2 * hidden]);
    const double b_out = w(lay.blocks[2 * hidden + 1].offset);
    Eigen::VectorXd out = (W_out * post[hidden]).transpose();
    out.array() += b_out;
    if (dout == nullptr || grad == nullptr) { return out; }

    Eigen::MatrixXd delta = dout->transpose();  // 1 x m
    view(*grad, lay.blocks[2 * hidden]).noalias() += delta * post[hidden].transpose();
    (*grad)(lay.blocks[2 * hidden + 1].offset) += delta.sum();
    Eigen::MatrixXd upstream = W_out.transpose() * delta;  // H_L x m
    for (std::size_t l = hidden; l-- > 0;) {
        delta = upstream.cwiseProduct(apply_derivative(spec.activation, pre[l]));
        view(*grad, lay.blocks[2 * l]).noalias() += delta * post[l].transpose();
        view(*grad, lay.blocks[2 * l + 1]).noalias() += delta.rowwise().sum().transpose();
        if (l > 0) { upstream.noalias() = view(w, lay.blocks[2 * l]).transpose() * delta; }
    }
    return out;
}

Eigen::VectorXd rbf_pass(const RbfNetSpec &spec, const Layout &lay, const Eigen::Ref<const Eigen::VectorXd> &w,
                         const Eigen::Ref<const Eigen::MatrixXd> &X, const Eigen::VectorXd *dout,
                         Eigen::VectorXd *grad) {
    const auto mu = view(w, lay.blocks[0]);                                  // H x d
    const auto coef = w.segment(lay.blocks[1].offset, lay.blocks[1].size());  // H
    const double bias = w(lay.blocks[2].offset);
    const double inv_g2 = 1.0 / (spec.sigma_g * spec.sigma_g);
    // Squared distances via |x|^2 - 2 x.mu + |mu|^2, clamped at 0.
    Eigen::MatrixXd dist2 = -2.0 * X * mu.transpose();                      // m x H
    dist2.colwise() += X.rowwise().squaredNorm();
    dist2.rowwise() += mu.rowwise().squaredNorm().transpose();
    const Eigen::MatrixXd phi = (-0.5 * inv_g2 * dist2.cwiseMax(0.0)).array().exp().matrix();
    Eigen::VectorXd out = phi * coef;
    out.array() += bias;
    if (dout == nullptr || grad == nullptr) { return out; }

    view(*grad, lay.blocks[1]).noalias() += dout->transpose() * phi;
    (*grad)(lay.blocks[2].offset) += dout->sum();
    // d f_i / d mu_j = w_j phi_ij (x_i - mu_j) / g^2.
    const Eigen::MatrixXd weight = (phi.array().colwise() * dout->array()).matrix() * inv_g2;  // m x H
    auto dmu = view(*grad, lay.blocks[0]);
    const Eigen::VectorXd col_sums = weight.colwise().sum().transpose();
    Eigen::MatrixXd gmu = weight.transpose() * X;                                                 // H x d
    gmu -= (mu.array().colwise() * col_sums.array()).matrix();
    dmu.noalias() += (gmu.array().colwise() * coef.array()).matrix();
    return out;
}

Eigen::VectorXd pass(const NetworkSpec &spec, const Layout &lay, const Eigen::Ref<const Eigen::VectorXd> &w,
                     const Eigen::Ref<const Eigen::MatrixXd> &X, const Eigen::VectorXd *dout, Eigen::VectorXd *grad) {
    return std::visit(Overloaded{
                          [&](const MlpSpec &s) { return mlp_pass(s, lay, w, X, dout, grad); },
                          [&](const RbfNetSpec &s) { return rbf_pass(s, lay, w, X, dout, grad); },
                      },
                      spec);
}

double prior_term(const Layout &lay, const Eigen::Ref<const Eigen::VectorXd> &w, Eigen::VectorXd *grad) {
    double total = 0.0;
    for (const auto &block : lay.blocks) {
        const double var = block.prior_std * block.prior_std;
        const auto seg = w.segment(block.offset, block.size());
        total += -0.5 * seg.squaredNorm() / var - 0.5 * static_cast<double>(block.size()) * (kLog2Pi + std::log(var));
        if (grad != nullptr) { grad->segment(block.offset, block.size()) -= seg / var; }
    }
    return total;
}

std::string prior_kind_name(PriorKind kind) { return kind == PriorKind::WidthAware ? "width-aware" : "standard"; }

}  // namespace

std::vector<std::string> Layout::parameter_names() const {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(size));
    for (const auto &block : blocks) {
        for (Eigen::Index r = 0; r < block.rows; ++r) {
            for (Eigen::Index c = 0; c < block.cols; ++c) {
                names.push_back(block.rows == 1 && block.cols == 1 ? block.name
                                                                   : fmt::format("{}[{};{}]", block.name, r, c));
            }
        }
    }
    return names;
}

void validate(const NetworkSpec &spec) {
    std::visit(Overloaded{
                   [](const MlpSpec &s) {
                       if (s.input_dim < 1) { throw InvalidArgument("MLP: input_dim must be >= 1"); }
                       if (s.hidden_widths.empty()) { throw InvalidArgument("MLP: need at least one hidden layer"); }
                       for (const int h : s.hidden_widths) {
                           if (h < 1) { throw InvalidArgument("MLP: hidden widths must be >= 1"); }
                       }
                   },
                   [](const RbfNetSpec &s) {
                       if (s.input_dim < 1) { throw InvalidArgument("RBF net: input_dim must be >= 1"); }
                       if (s.hidden_width < 1) { throw InvalidArgument("RBF net: hidden_width must be >= 1"); }
                       if (!(s.sigma_g > 0.0)) { throw InvalidArgument("RBF net: sigma_g must be positive"); }
                   },
               },
               spec);
}

void validate(const PriorSpec &prior) {
    if (!(prior.sigma_w > 0.0) || !(prior.sigma_b > 0.0) || !(prior.sigma_mu > 0.0)) {
        throw InvalidArgument("prior scales must be positive");
    }
}

Layout layout(const NetworkSpec &spec, const PriorSpec &prior) {
    validate(spec);
    Layout lay;
    auto add = [&lay](std::string name, Eigen::Index rows, Eigen::Index cols, double prior_std) {
        lay.blocks.push_back({std::move(name), lay.size, rows, cols, prior_std});
        lay.size += rows * cols;
    };
    std::visit(Overloaded{
                   [&](const MlpSpec &s) {
                       Eigen::Index fan_in = s.input_dim;
                       const std::size_t hidden = s.hidden_widths.size();
                       for (std::size_t l = 0; l <= hidden; ++l) {
                           const Eigen::Index width = l < hidden ? s.hidden_widths[l] : 1;
                           const double w_std = prior.kind == PriorKind::WidthAware
                                                    ? prior.sigma_w / std::sqrt(static_cast<double>(fan_in))
                                                    : prior.sigma_w;
                           add(fmt::format("W{}", l + 1), width, fan_in, w_std);
                           add(fmt::format("b{}", l + 1), width, 1, prior.sigma_b);
                           fan_in = width;
                       }
                   },
                   [&](const RbfNetSpec &s) {
                       add("mu", s.hidden_width, s.input_dim, prior.sigma_mu);
                       const double w_std = prior.scale_rbf_output
                                                ? prior.sigma_w / std::sqrt(static_cast<double>(s.hidden_width))
                                                : prior.sigma_w;
                       add("w", 1, s.hidden_width, w_std);
                       add("b", 1, 1, prior.sigma_b);
                   },
               },
               spec);
    return lay;
}

Eigen::Index parameter_count(const NetworkSpec &spec) { return layout(spec).size; }

Eigen::VectorXd forward(const NetworkSpec &spec, const Eigen::Ref<const Eigen::VectorXd> &w,
                        const Eigen::Ref<const Eigen::MatrixXd> &X) {
    const auto lay = layout(spec);
    check_size(lay, w);
    check_inputs(spec, X);
    if (X.rows() == 0) { return Eigen::VectorXd(0); }
    return pass(spec, lay, w, X, nullptr, nullptr);
}

double log_prior(const NetworkSpec &spec, const PriorSpec &prior, const Eigen::Ref<const Eigen::VectorXd> &w) {
    validate(prior);
    const auto lay = layout(spec, prior);
    check_size(lay, w);
    return prior_term(lay, w, nullptr);
}

double log_likelihood(const NetworkSpec &spec, const Dataset &data, double noise_var,
                      const Eigen::Ref<const Eigen::VectorXd> &w) {
    if (!(noise_var > 0.0)) { throw InvalidArgument("noise_var must be positive"); }
    if (data.size() == 0) { return 0.0; }
    const Eigen::VectorXd f = forward(spec, w, data.X);
    const auto n = static_cast<double>(data.size());
    return -0.5 * (data.y - f).squaredNorm() / noise_var - 0.5 * n * (kLog2Pi + std::log(noise_var));
}

double log_posterior_and_grad(const NetworkSpec &spec, const PriorSpec &prior, const Dataset &data,
                              double noise_var, const Eigen::Ref<const Eigen::VectorXd> &w,
                              Eigen::VectorXd *grad) {
    if (!(noise_var > 0.0)) { throw InvalidArgument("noise_var must be positive"); }
    validate(prior);
    const auto lay = layout(spec, prior);
    check_size(lay, w);
    check_inputs(spec, data.X);
    if (grad != nullptr) { grad->setZero(lay.size); }
    double total = prior_term(lay, w, grad);
    if (data.size() == 0) { return total; }
    const Eigen::VectorXd f = pass(spec, lay, w, data.X, nullptr, nullptr);
    const Eigen::VectorXd residual = data.y - f;
    const auto n = static_cast<double>(data.size());
    total += -0.5 * residual.squaredNorm() / noise_var - 0.5 * n * (kLog2Pi + std::log(noise_var));
    if (grad != nullptr) {
        const Eigen::VectorXd dout = residual / noise_var;
        pass(spec, lay, w, data.X, &dout, grad);
    }
    return total;
}

double log_posterior(const NetworkSpec &spec, const PriorSpec &prior, const Dataset &data, double noise_var,
                     const Eigen::Ref<const Eigen::VectorXd> &w) {
    return log_posterior_and_grad(spec, prior, data, noise_var, w, nullptr);
}

Eigen::VectorXd grad_log_posterior(const NetworkSpec &spec, const PriorSpec &prior, const Dataset &data,
                                   double noise_var, const Eigen::Ref<const Eigen::VectorXd> &w) {
    Eigen::VectorXd grad;
    log_posterior_and_grad(spec, prior, data, noise_var, w, &grad);
    return grad;
}

Eigen::VectorXd sample_prior(const NetworkSpec &spec, const PriorSpec &prior, Rng &rng) {
    const auto lay = layout(spec, prior);
    Eigen::VectorXd w(lay.size);
    for (const auto &block : lay.blocks) {
        for (Eigen::Index i = 0; i < block.size(); ++i) { w(block.offset + i) = block.prior_std * rng.normal(); }
    }
    return w;
}

HmcRun hmc_sample(const NetworkSpec &spec, const PriorSpec &prior, const Dataset &data, double noise_var,
                  const hmc::Config &config) {
    validate(spec);
    validate(prior);
    if (!(noise_var > 0.0)) { throw InvalidArgument("noise_var must be positive"); }
    check_inputs(spec, data.X);
    const auto lay = layout(spec, prior);
    // Layout and data are fixed for the run, so the closure skips per-call validation.
    const hmc::LogDensityFn target = [&](const Eigen::VectorXd &w, Eigen::VectorXd *grad) {
        if (grad != nullptr) { grad->setZero(lay.size); }
        double total = prior_term(lay, w, grad);
        if (data.size() == 0) { return total; }
        const Eigen::VectorXd f = pass(spec, lay, w, data.X, nullptr, nullptr);
        const Eigen::VectorXd residual = data.y - f;
        total += -0.5 * residual.squaredNorm() / noise_var;
        if (grad != nullptr) {
            const Eigen::VectorXd dout = residual / noise_var;
            pass(spec, lay, w, data.X, &dout, grad);
        }
        return total;
    };
    const hmc::InitFn init = [&](Rng &rng) { return sample_prior(spec, prior, rng); };
    auto result = hmc::sample(target, init, config);
    HmcRun run;
    run.chains = std::move(result.chains);
    run.samples.reserve(result.samples.size());
    for (auto &w : result.samples) { run.samples.push_back({std::move(w)}); }
    return run;
}

double default_step_size(const NetworkSpec &spec) {
    const int widest = std::visit(Overloaded{
                                      [](const MlpSpec &s) {
                                          return *std::max_element(s.hidden_widths.begin(), s.hidden_widths.end());
                                      },
                                      [](const RbfNetSpec &s) { return s.hidden_width; },
                                  },
                                  spec);
    return widest >= 50 ? 1e-4 : 1e-3;
}

UncertaintyField predictive_moments(const NetworkSpec &spec, const std::vector<WeightSample> &samples,
                                    const Eigen::Ref<const Eigen::MatrixXd> &grid) {
    if (samples.empty()) { throw InvalidArgument("predictive_moments: no samples"); }
    const Eigen::Index m = grid.rows();
    Eigen::MatrixXd outputs(m, static_cast<Eigen::Index>(samples.size()));
    for (std::size_t s = 0; s < samples.size(); ++s) {
        outputs.col(static_cast<Eigen::Index>(s)) = forward(spec, samples[s].values, grid);
    }
    UncertaintyField out;
    out.grid = grid;
    out.mean = outputs.rowwise().mean();
    const Eigen::MatrixXd centred = outputs.colwise() - out.mean;
    out.std = (centred.rowwise().squaredNorm() / static_cast<double>(samples.size())).cwiseSqrt();
    return out;
}

void save_samples_csv(const NetworkSpec &spec, const std::vector<WeightSample> &samples,
                      const std::filesystem::path &path) {
    const auto lay = layout(spec);
    Eigen::MatrixXd table(static_cast<Eigen::Index>(samples.size()), lay.size);
    for (std::size_t s = 0; s < samples.size(); ++s) {
        check_size(lay, samples[s].values);
        table.row(static_cast<Eigen::Index>(s)) = samples[s].values.transpose();
    }
    io::write_csv(path, lay.parameter_names(), table);
}

nlohmann::json to_json(const NetworkSpec &spec) {
    return std::visit(Overloaded{
                          [](const MlpSpec &s) {
                              return nlohmann::json{{"arch", "mlp"},
                                                    {"input_dim", s.input_dim},
                                                    {"hidden_widths", s.hidden_widths},
                                                    {"activation", std::string(to_string(s.activation))}};
                          },
                          [](const RbfNetSpec &s) {
                              return nlohmann::json{{"arch", "rbfnet"},
                                                    {"input_dim", s.input_dim},
                                                    {"hidden_width", s.hidden_width},
                                                    {"sigma_g", s.sigma_g}};
                          },
                      },
                      spec);
}

nlohmann::json to_json(const PriorSpec &prior) {
    return {{"kind", prior_kind_name(prior.kind)},
            {"sigma_w", prior.sigma_w},
            {"sigma_b", prior.sigma_b},
            {"sigma_mu", prior.sigma_mu},
            {"scale_rbf_output", prior.scale_rbf_output}};
}

NetworkSpec network_from_json(const nlohmann::json &doc) {
    try {
        const auto arch = doc.at("arch").get<std::string>();
        NetworkSpec spec;
        if (arch == "mlp") {
            MlpSpec s;
            s.input_dim = doc.value("input_dim", s.input_dim);
            s.hidden_widths = doc.value("hidden_widths", s.hidden_widths);
            if (doc.contains("activation")) { s.activation = activation_from_string(doc.at("activation").get<std::string>()); }
            spec = s;
        } else if (arch == "rbfnet") {
            RbfNetSpec s;
            s.input_dim = doc.value("input_dim", s.input_dim);
            s.hidden_width = doc.value("hidden_width", s.hidden_width);
            s.sigma_g = doc.value("sigma_g", s.sigma_g);
            spec = s;
        } else {
            throw InvalidArgument(fmt::format("unknown architecture '{}'", arch));
        }
        validate(spec);
        return spec;
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(fmt::format("bad network JSON: {}", e.what()));
    }
}

PriorSpec prior_from_json(const nlohmann::json &doc) {
    try {
        PriorSpec prior;
        const auto kind = doc.value("kind", prior_kind_name(prior.kind));
        if (kind == "width-aware") {
            prior.kind = PriorKind::WidthAware;
        } else if (kind == "standard") {
            prior.kind = PriorKind::Standard;
        } else {
            throw InvalidArgument(fmt::format("unknown prior kind '{}'", kind));
        }
        prior.sigma_w = doc.value("sigma_w", prior.sigma_w);
        prior.sigma_b = doc.value("sigma_b", prior.sigma_b);
        prior.sigma_mu = doc.value("sigma_mu", prior.sigma_mu);
        prior.scale_rbf_output = doc.value("scale_rbf_output", prior.scale_rbf_output);
        validate(prior);
        return prior;
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(fmt::format("bad prior JSON: {}", e.what()));
    }
}

}  // namespace ood::bnn
