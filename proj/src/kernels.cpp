#include "ood/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "ood/error.hpp"
#include "ood/rng.hpp"
#include "parallel.hpp"

namespace ood {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClampTol = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

void check_same_dim(const VectorRef &x, const VectorRef &x2) {
    if (x.size() != x2.size()) {
        throw InvalidArgument(fmt::format("kernel inputs differ in dimension ({} vs {})", x.size(), x2.size()));
    }
}

void check_input_dim(const VectorRef &x, const VectorRef &x2, int d) {
    check_same_dim(x, x2);
    if (x.size() != d) {
        throw InvalidArgument(fmt::format("kernel expects inputs of dimension {}, got {}", d, x.size()));
    }
}

/// Clamps a cosine into [-1, 1], failing when it overshoots by more than the tolerance.
double clamp_unit(double c, const char *what) {
    if (!std::isfinite(c) || std::abs(c) > 1.0 + kClampTol) {
        throw InvalidArgument(fmt::format("{}: argument {} outside [-1, 1]", what, c));
    }
    return std::clamp(c, -1.0, 1.0);
}

void check_diagonal(double k_xx, double k_yy, const char *what) {
    if (!(k_xx > 0.0) || !(k_yy > 0.0)) {
        throw InvalidArgument(fmt::format("{}: diagonal entries must be positive ({}, {})", what, k_xx, k_yy));
    }
}

double relu_expectation(double k_xx, double k_xy, double k_yy) {
    check_diagonal(k_xx, k_yy, "nngp_relu_step");
    const double norm = std::sqrt(k_xx * k_yy);
    const double cos_theta = clamp_unit(k_xy / norm, "nngp_relu_step");
    const double theta = std::acos(cos_theta);
    return norm / (2.0 * kPi) * (std::sin(theta) + (kPi - theta) * cos_theta);
}

double erf_expectation(double k_xy, double k_xx, double k_yy) {
    if (k_xx < -kClampTol || k_yy < -kClampTol) {
        throw InvalidArgument(fmt::format("nngp_erf_step: negative diagonal ({}, {})", k_xx, k_yy));
    }
    const double denom = std::sqrt((1.0 + 2.0 * std::max(k_xx, 0.0)) * (1.0 + 2.0 * std::max(k_yy, 0.0)));
    return 2.0 / kPi * std::asin(clamp_unit(2.0 * k_xy / denom, "nngp_erf_step"));
}

}  // namespace

std::string_view to_string(Activation activation) {
    switch (activation) {
        case Activation::ReLU: return "ReLU";
        case Activation::Erf: return "Erf";
        case Activation::Tanh: return "Tanh";
    }
    return "?";
}

Activation activation_from_string(std::string_view name) {
    const auto key = lower(name);
    if (key == "relu") { return Activation::ReLU; }
    if (key == "erf") { return Activation::Erf; }
    if (key == "tanh") { return Activation::Tanh; }
    throw InvalidArgument(fmt::format("unknown activation '{}'", name));
}

double activate(Activation activation, double x) noexcept {
    switch (activation) {
        case Activation::ReLU: return x > 0.0 ? x : 0.0;
        case Activation::Erf: return std::erf(x);
        case Activation::Tanh: return std::tanh(x);
    }
    return 0.0;
}

double activate_derivative(Activation activation, double x) noexcept {
    switch (activation) {
        case Activation::ReLU: return x > 0.0 ? 1.0 : 0.0;
        case Activation::Erf: return 2.0 / std::sqrt(kPi) * std::exp(-x * x);
        case Activation::Tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
    }
    return 0.0;
}

void validate(const KernelSpec &spec) {
    std::visit(Overloaded{
                   [](const kernel::Rbf &k) {
                       if (!(k.l > 0.0)) { throw InvalidArgument("RBF: l must be positive"); }
                   },
                   [](const kernel::Periodic &k) {
                       if (!(k.l > 0.0) || !(k.p > 0.0)) { throw InvalidArgument("Periodic: l and p must be positive"); }
                   },
                   [](const kernel::DotProduct &k) {
                       if (!(k.sigma0_sq >= 0.0)) { throw InvalidArgument("DotProduct: sigma0_sq must be >= 0"); }
                   },
                   [](const kernel::Nngp &k) {
                       if (k.depth < 1) { throw InvalidArgument("NNGP: depth must be >= 1"); }
                       if (!(k.sigma_w > 0.0)) { throw InvalidArgument("NNGP: sigma_w must be positive"); }
                       if (!(k.sigma_b >= 0.0)) { throw InvalidArgument("NNGP: sigma_b must be >= 0"); }
                       if (k.input_dim < 1) { throw InvalidArgument("NNGP: input_dim must be >= 1"); }
                       if (k.mc_samples && *k.mc_samples < 1) { throw InvalidArgument("NNGP: mc_samples must be >= 1"); }
                       if (k.activation == Activation::Tanh && !k.mc_samples) {
                           throw InvalidArgument("NNGP: Tanh has no closed form, set mc_samples");
                       }
                   },
                   [](const kernel::RbfNet &k) {
                       if (!(k.sigma_b >= 0.0)) { throw InvalidArgument("RBFNet: sigma_b must be >= 0"); }
                       if (!(k.sigma_w > 0.0) || !(k.sigma_g > 0.0) || !(k.sigma_mu > 0.0)) {
                           throw InvalidArgument("RBFNet: sigma_w, sigma_g and sigma_mu must be positive");
                       }
                       if (k.input_dim < 1) { throw InvalidArgument("RBFNet: input_dim must be >= 1"); }
                   },
               },
               spec);
}

std::string describe(const KernelSpec &spec) {
    return std::visit(Overloaded{
                          [](const kernel::Rbf &k) { return fmt::format("RBF(l={})", k.l); },
                          [](const kernel::Periodic &k) { return fmt::format("Periodic(l={}, p={})", k.l, k.p); },
                          [](const kernel::DotProduct &k) { return fmt::format("DotProduct(sigma0_sq={})", k.sigma0_sq); },
                          [](const kernel::Nngp &k) {
                              return fmt::format("NNGP({}, depth {}{})", to_string(k.activation), k.depth,
                                                 k.mc_samples ? fmt::format(", MC N={}", *k.mc_samples) : "");
                          },
                          [](const kernel::RbfNet &k) {
                              return fmt::format("RBFNet(sigma_g={}, sigma_mu={})", k.sigma_g, k.sigma_mu);
                          },
                      },
                      spec);
}

bool uses_monte_carlo(const KernelSpec &spec) {
    const auto *nngp = std::get_if<kernel::Nngp>(&spec);
    return nngp != nullptr && nngp->mc_samples.has_value();
}

std::optional<int> input_dim(const KernelSpec &spec) {
    if (const auto *k = std::get_if<kernel::Nngp>(&spec)) { return k->input_dim; }
    if (const auto *k = std::get_if<kernel::RbfNet>(&spec)) { return k->input_dim; }
    return std::nullopt;
}

nlohmann::json to_json(const KernelSpec &spec) {
    return std::visit(
        Overloaded{
            [](const kernel::Rbf &k) { return nlohmann::json{{"kind", "RBF"}, {"l", k.l}}; },
            [](const kernel::Periodic &k) { return nlohmann::json{{"kind", "Periodic"}, {"l", k.l}, {"p", k.p}}; },
            [](const kernel::DotProduct &k) {
                return nlohmann::json{{"kind", "DotProduct"}, {"sigma0_sq", k.sigma0_sq}};
            },
            [](const kernel::Nngp &k) {
                nlohmann::json doc{{"kind", "NNGP"},
                                   {"depth", k.depth},
                                   {"activation", std::string(to_string(k.activation))},
                                   {"sigma_w", k.sigma_w},
                                   {"sigma_b", k.sigma_b},
                                   {"input_dim", k.input_dim},
                                   {"mc_samples", nullptr},
                                   {"seed", k.seed}};
                if (k.mc_samples) { doc["mc_samples"] = *k.mc_samples; }
                return doc;
            },
            [](const kernel::RbfNet &k) {
                return nlohmann::json{{"kind", "RBFNet"},      {"sigma_b", k.sigma_b},   {"sigma_w", k.sigma_w},
                                      {"sigma_g", k.sigma_g}, {"sigma_mu", k.sigma_mu}, {"input_dim", k.input_dim}};
            },
        },
        spec);
}

KernelSpec kernel_from_json(const nlohmann::json &doc) {
    if (!doc.is_object() || !doc.contains("kind")) { throw InvalidArgument("kernel JSON needs a \"kind\" field"); }
    const auto kind = lower(doc.at("kind").get<std::string>());
    KernelSpec spec;
    try {
        if (kind == "rbf") {
            spec = kernel::Rbf{doc.value("l", 1.0)};
        } else if (kind == "periodic") {
            spec = kernel::Periodic{doc.value("l", 1.0), doc.value("p", 4.0)};
        } else if (kind == "dotproduct") {
            spec = kernel::DotProduct{doc.value("sigma0_sq", 1.0)};
        } else if (kind == "nngp") {
            kernel::Nngp k;
            k.depth = doc.value("depth", k.depth);
            if (doc.contains("activation")) { k.activation = activation_from_string(doc.at("activation").get<std::string>()); }
            k.sigma_w = doc.value("sigma_w", k.sigma_w);
            k.sigma_b = doc.value("sigma_b", k.sigma_b);
            k.input_dim = doc.value("input_dim", k.input_dim);
            if (doc.contains("mc_samples") && !doc.at("mc_samples").is_null()) {
                k.mc_samples = doc.at("mc_samples").get<int>();
            }
            k.seed = doc.value("seed", k.seed);
            spec = k;
        } else if (kind == "rbfnet") {
            kernel::RbfNet k;
            k.sigma_b = doc.value("sigma_b", k.sigma_b);
            k.sigma_w = doc.value("sigma_w", k.sigma_w);
            k.sigma_g = doc.value("sigma_g", k.sigma_g);
            k.sigma_mu = doc.value("sigma_mu", k.sigma_mu);
            k.input_dim = doc.value("input_dim", k.input_dim);
            spec = k;
        } else {
            throw InvalidArgument(fmt::format("unknown kernel kind '{}'", doc.at("kind").get<std::string>()));
        }
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(fmt::format("bad kernel JSON: {}", e.what()));
    }
    validate(spec);
    return spec;
}

double nngp_base(const VectorRef &x, const VectorRef &x2, double sigma_w, double sigma_b) {
    check_same_dim(x, x2);
    if (x.size() == 0) { throw InvalidArgument("nngp_base: input dimension must be > 0"); }
    return sigma_b * sigma_b + sigma_w * sigma_w * x.dot(x2) / static_cast<double>(x.size());
}

double nngp_relu_step(double k_xx, double k_xy, double k_yy, double sigma_w, double sigma_b) {
    return sigma_b * sigma_b + sigma_w * sigma_w * relu_expectation(k_xx, k_xy, k_yy);
}

KernelTriple nngp_relu_step(const KernelTriple &k, double sigma_w, double sigma_b) {
    // On the diagonal theta = 0, so E[relu(u)^2] = k / 2.
    check_diagonal(k.xx, k.yy, "nngp_relu_step");
    const double sb2 = sigma_b * sigma_b;
    const double sw2 = sigma_w * sigma_w;
    return {sb2 + sw2 * 0.5 * k.xx, nngp_relu_step(k.xx, k.xy, k.yy, sigma_w, sigma_b), sb2 + sw2 * 0.5 * k.yy};
}

double nngp_erf_step(double k_xx, double k_xy, double k_yy, double sigma_w, double sigma_b) {
    return sigma_b * sigma_b + sigma_w * sigma_w * erf_expectation(k_xy, k_xx, k_yy);
}

KernelTriple nngp_erf_step(const KernelTriple &k, double sigma_w, double sigma_b) {
    return {nngp_erf_step(k.xx, k.xx, k.xx, sigma_w, sigma_b), nngp_erf_step(k.xx, k.xy, k.yy, sigma_w, sigma_b),
            nngp_erf_step(k.yy, k.yy, k.yy, sigma_w, sigma_b)};
}

KernelTriple nngp_mc_step(const KernelTriple &k, Activation activation, double sigma_w, double sigma_b, int samples,
                          std::uint64_t seed) {
    if (samples < 1) { throw InvalidArgument("nngp_mc_step: need at least one sample"); }
    if (k.xx < -kClampTol || k.yy < -kClampTol) {
        throw InvalidArgument(fmt::format("nngp_mc_step: negative variance ({}, {})", k.xx, k.yy));
    }
    const double a = std::max(k.xx, 0.0);
    const double b = std::max(k.yy, 0.0);
    if (k.xy * k.xy > a * b * (1.0 + kClampTol) + kClampTol) {
        throw InvalidArgument(fmt::format("nngp_mc_step: covariance [[{}, {}], [{}, {}]] is not PSD", k.xx, k.xy,
                                          k.xy, k.yy));
    }
    const double sb2 = sigma_b * sigma_b;
    const double sw2 = sigma_w * sigma_w;
    if (sw2 == 0.0) { return {sb2, sb2, sb2}; }

    // 2x2 Cholesky: u = l11 z1, v = l21 z1 + l22 z2.
    const double l11 = std::sqrt(a);
    const double l21 = l11 > 0.0 ? k.xy / l11 : 0.0;
    const double l22 = std::sqrt(std::max(b - l21 * l21, 0.0));

    Rng rng(seed);
    double sum_uu = 0.0;
    double sum_uv = 0.0;
    double sum_vv = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        const double hu = activate(activation, l11 * z1);
        const double hv = activate(activation, l21 * z1 + l22 * z2);
        sum_uu += hu * hu;
        sum_uv += hu * hv;
        sum_vv += hv * hv;
    }
    const double inv_n = 1.0 / static_cast<double>(samples);
    return {sb2 + sw2 * sum_uu * inv_n, sb2 + sw2 * sum_uv * inv_n, sb2 + sw2 * sum_vv * inv_n};
}

double nngp_mc_step(double k_xx, double k_xy, double k_yy, Activation activation, double sigma_w, double sigma_b,
                    int samples, std::uint64_t seed) {
    return nngp_mc_step(KernelTriple{k_xx, k_xy, k_yy}, activation, sigma_w, sigma_b, samples, seed).xy;
}

double nngp_kernel(const kernel::Nngp &spec, const VectorRef &x, const VectorRef &x2, std::uint64_t seed) {
    if (spec.depth < 1) { throw InvalidArgument("NNGP: depth must be >= 1"); }
    check_input_dim(x, x2, spec.input_dim);
    KernelTriple k{nngp_base(x, x, spec.sigma_w, spec.sigma_b), nngp_base(x, x2, spec.sigma_w, spec.sigma_b),
                   nngp_base(x2, x2, spec.sigma_w, spec.sigma_b)};
    for (int layer = 0; layer < spec.depth; ++layer) {
        if (spec.mc_samples) {
            k = nngp_mc_step(k, spec.activation, spec.sigma_w, spec.sigma_b, *spec.mc_samples,
                             derive_seed(seed, static_cast<std::uint64_t>(layer)));
        } else if (spec.activation == Activation::ReLU) {
            k = nngp_relu_step(k, spec.sigma_w, spec.sigma_b);
        } else if (spec.activation == Activation::Erf) {
            k = nngp_erf_step(k, spec.sigma_w, spec.sigma_b);
        } else {
            throw InvalidArgument("NNGP: Tanh has no closed form, set mc_samples");
        }
    }
    return k.xy;
}

double nngp_kernel(const kernel::Nngp &spec, const VectorRef &x, const VectorRef &x2) {
    return nngp_kernel(spec, x, x2, spec.seed);
}

double rbf_net_kernel(const kernel::RbfNet &spec, const VectorRef &x, const VectorRef &x2) {
    check_input_dim(x, x2, spec.input_dim);
    const double g2 = spec.sigma_g * spec.sigma_g;
    const double mu2 = spec.sigma_mu * spec.sigma_mu;
    const double e2 = 1.0 / (2.0 / g2 + 1.0 / mu2);
    const double s2 = 2.0 * g2 + g2 * g2 / mu2;
    const double m2 = 2.0 * mu2 + g2;
    const double prefactor = std::pow(std::sqrt(e2 / mu2), spec.input_dim);
    const double decay = std::exp(-x.squaredNorm() / (2.0 * m2) - (x - x2).squaredNorm() / (2.0 * s2) -
                                  x2.squaredNorm() / (2.0 * m2));
    return spec.sigma_b * spec.sigma_b + spec.sigma_w * spec.sigma_w * prefactor * decay;
}

double kernel_eval(const KernelSpec &spec, const VectorRef &x, const VectorRef &x2) {
    return std::visit(Overloaded{
                          [&](const kernel::Rbf &k) {
                              check_same_dim(x, x2);
                              return std::exp(-(x - x2).squaredNorm() / (2.0 * k.l * k.l));
                          },
                          [&](const kernel::Periodic &k) {
                              check_same_dim(x, x2);
                              const double s = std::sin(kPi * (x - x2).norm() / k.p);
                              return std::exp(-2.0 * s * s / (k.l * k.l));
                          },
                          [&](const kernel::DotProduct &k) {
                              check_same_dim(x, x2);
                              return k.sigma0_sq + x.dot(x2);
                          },
                          [&](const kernel::Nngp &k) { return nngp_kernel(k, x, x2, k.seed); },
                          [&](const kernel::RbfNet &k) { return rbf_net_kernel(k, x, x2); },
                      },
                      spec);
}

KernelMatrix gram(const KernelSpec &spec, const Eigen::Ref<const Eigen::MatrixXd> &X, double jitter) {
    if (!(jitter >= 0.0)) { throw InvalidArgument("gram: jitter must be >= 0"); }
    const Eigen::Index m = X.rows();
    KernelMatrix out;
    out.values.resize(m, m);
    out.jitter_applied = jitter;
    detail::parallel_for(static_cast<long>(m), [&](long i) {
        const Eigen::VectorXd xi = X.row(i).transpose();
        for (Eigen::Index j = i; j < m; ++j) {
            out.values(i, j) = kernel_eval(spec, xi, X.row(j).transpose());
        }
    }, uses_monte_carlo(spec));
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) { out.values(i, j) = out.values(j, i); }
        out.values(i, i) += jitter;
    }
    return out;
}

KernelMatrix gram(const KernelSpec &spec, const Eigen::Ref<const Eigen::MatrixXd> &X,
                  const Eigen::Ref<const Eigen::MatrixXd> &X2) {
    if (X.rows() > 0 && X2.rows() > 0 && X.cols() != X2.cols()) {
        throw InvalidArgument(fmt::format("gram: inputs differ in dimension ({} vs {})", X.cols(), X2.cols()));
    }
    KernelMatrix out;
    out.values.resize(X.rows(), X2.rows());
    detail::parallel_for(static_cast<long>(X.rows()), [&](long i) {
        const Eigen::VectorXd xi = X.row(i).transpose();
        for (Eigen::Index j = 0; j < X2.rows(); ++j) {
            out.values(i, j) = kernel_eval(spec, xi, X2.row(j).transpose());
        }
    }, uses_monte_carlo(spec));
    return out;
}

Eigen::VectorXd gram_diagonal(const KernelSpec &spec, const Eigen::Ref<const Eigen::MatrixXd> &X) {
    Eigen::VectorXd diag(X.rows());
    detail::parallel_for(static_cast<long>(X.rows()), [&](long i) {
        const Eigen::VectorXd xi = X.row(i).transpose();
        diag(i) = kernel_eval(spec, xi, xi);
    }, uses_monte_carlo(spec));
    return diag;
}

}  // namespace ood
