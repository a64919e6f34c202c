// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance              run everything (criterion 6 takes several minutes)
//   acceptance --skip-slow  skip criterion 6
//   acceptance --only N     run criterion N only

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "ood/bnn.hpp"
#include "ood/datasets.hpp"
#include "ood/diagnostics.hpp"
#include "ood/gp.hpp"
#include "ood/hmc.hpp"
#include "ood/io.hpp"
#include "ood/kernels.hpp"
#include "ood/rng.hpp"

using namespace ood;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double budget_seconds;  // <= 0: no runtime bound
    bool slow;
    std::function<Outcome()> run;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Eigen::Index nearest_row(const Eigen::MatrixXd &grid, const Eigen::Vector2d &target) {
    Eigen::Index best = 0;
    (grid.rowwise() - target.transpose()).rowwise().squaredNorm().minCoeff(&best);
    return best;
}

// ---- 1: RBF field ----
Outcome rbf_field() {
    const auto data = gen_gaussian_mixture(0, 10);
    const auto grid = make_grid(default_grid_mixture());
    const KernelSpec rbf = kernel::Rbf{1.0};
    const auto f = field(rbf, data, kDefaultNoiseVar, grid);
    const double corner = f.std(nearest_row(grid, {6.0, 6.0}));
    const double at_train = field(rbf, data, kDefaultNoiseVar, data.X).std.minCoeff();
    const bool pass = std::abs(corner - 1.0) <= 0.02 && at_train < 0.5 * corner;
    return {pass, fmt::format("corner std={:.6f} (|1-std|<=0.02), min train std={:.4f} (<{:.4f})", corner, at_train,
                              0.5 * corner)};
}

// ---- 2: NNGP contrast ----
Outcome nngp_contrast() {
    const auto data = gen_gaussian_mixture(0, 10);
    const auto grid = make_grid(default_grid_mixture());
    const Eigen::Index centre = nearest_row(grid, {0.0, 0.0});
    const auto rbf = field(kernel::Rbf{1.0}, data, kDefaultNoiseVar, grid);
    kernel::Nngp nngp;
    nngp.depth = 2;
    const auto relu = field(nngp, data, kDefaultNoiseVar, grid);
    const double rbf_norm = rbf.std(centre) / rbf.std.maxCoeff();
    const double nngp_norm = relu.std(centre) / relu.std.maxCoeff();
    return {nngp_norm < rbf_norm,
            fmt::format("normalized std near origin: NNGP={:.4f} < RBF={:.4f}", nngp_norm, rbf_norm)};
}

// ---- 3: MC kernel accuracy ----
Outcome mc_accuracy() {
    const auto points = make_grid(GridSpec::square(-6, 6, 5));
    const auto curve = diagnostics::mc_error_study(Activation::ReLU, 2, points, {100, 10000, 100000}, 10, 0);
    const double at_1e5 = curve.mean_abs_rel_error[2];
    const double ratio = curve.mean_abs_rel_error[0] / curve.mean_abs_rel_error[1];
    const bool pass = at_1e5 < 0.01 && ratio >= 5.0 && ratio <= 20.0;
    return {pass, fmt::format("rel err N=1e2 {:.4g}, 1e4 {:.4g}, 1e5 {:.4g} (<0.01); ratio 1e2/1e4={:.3f} in [5,20]",
                              curve.mean_abs_rel_error[0], curve.mean_abs_rel_error[1], at_1e5, ratio)};
}

// ---- 4: conjugate Gaussian HMC ----
Outcome conjugate_hmc() {
    // w ~ N(0, 1), y_i ~ N(w, noise_var).
    const Eigen::VectorXd y = (Eigen::VectorXd(6) << 0.9, 1.4, 0.3, 1.1, 0.8, 1.7).finished();
    const double noise_var = 0.5;
    const double precision = 1.0 + static_cast<double>(y.size()) / noise_var;
    const double post_mean = (y.sum() / noise_var) / precision;
    const double post_var = 1.0 / precision;
    const hmc::LogDensityFn log_density = [&](const Eigen::VectorXd &w, Eigen::VectorXd *grad) {
        const double r = (y.array() - w(0)).square().sum();
        if (grad != nullptr) {
            grad->resize(1);
            (*grad)(0) = -w(0) + (y.array() - w(0)).sum() / noise_var;
        }
        return -0.5 * w(0) * w(0) - 0.5 * r / noise_var;
    };
    const hmc::InitFn init = [](Rng &rng) { return Eigen::VectorXd::Constant(1, rng.normal()); };
    hmc::Config config;
    config.chains = 5;
    config.steps = 5000;
    config.burn_in = 1000;
    config.keep = 5 * 4000;
    config.leapfrog_steps = 10;
    config.step_size = 0.05;
    config.seed = 2024;
    const auto result = hmc::sample(log_density, init, config);

    const auto n = static_cast<double>(result.samples.size());
    double mean = 0.0;
    for (const auto &w : result.samples) { mean += w(0); }
    mean /= n;
    double var = 0.0;
    for (const auto &w : result.samples) { var += (w(0) - mean) * (w(0) - mean); }
    var /= n - 1.0;
    // Batch means over 200-draw batches (each inside one chain).
    constexpr std::size_t kBatch = 200;
    std::vector<double> batches;
    for (std::size_t s = 0; s + kBatch <= result.samples.size(); s += kBatch) {
        double b = 0.0;
        for (std::size_t i = s; i < s + kBatch; ++i) { b += result.samples[i](0); }
        batches.push_back(b / kBatch);
    }
    double bvar = 0.0;
    for (const double b : batches) { bvar += (b - mean) * (b - mean); }
    bvar /= static_cast<double>(batches.size() - 1);
    const double mcse = std::sqrt(bvar / static_cast<double>(batches.size()));
    const bool pass = std::abs(mean - post_mean) <= 3.0 * mcse && std::abs(var / post_var - 1.0) <= 0.1;
    return {pass, fmt::format("mean {:.5f} vs {:.5f} (3 MCSE={:.5f}); var {:.5f} vs {:.5f} (10%)", mean, post_mean,
                              3.0 * mcse, var, post_var)};
}

// ---- 5: gradient check ----
double gradient_error(const bnn::NetworkSpec &spec, const bnn::PriorSpec &prior, const Dataset &data,
                      const Eigen::VectorXd &w, const std::vector<Eigen::Index> &coords) {
    const Eigen::VectorXd grad = bnn::grad_log_posterior(spec, prior, data, kDefaultNoiseVar, w);
    Eigen::VectorXd fd(static_cast<Eigen::Index>(coords.size()));
    Eigen::VectorXd analytic(fd.size());
    constexpr double h = 1e-5;
    for (std::size_t k = 0; k < coords.size(); ++k) {
        Eigen::VectorXd plus = w;
        Eigen::VectorXd minus = w;
        plus(coords[k]) += h;
        minus(coords[k]) -= h;
        fd(static_cast<Eigen::Index>(k)) = (bnn::log_posterior(spec, prior, data, kDefaultNoiseVar, plus) -
                                            bnn::log_posterior(spec, prior, data, kDefaultNoiseVar, minus)) /
                                           (2.0 * h);
        analytic(static_cast<Eigen::Index>(k)) = grad(coords[k]);
    }
    return (analytic - fd).norm() / std::max(1.0, fd.norm());
}

Outcome gradient_check() {
    const auto data = gen_gaussian_mixture(0, 10);
    std::vector<std::pair<std::string, bnn::NetworkSpec>> specs;
    for (const auto act : {Activation::ReLU, Activation::Tanh, Activation::Erf}) {
        for (const int width : {5, 100}) {
            bnn::MlpSpec s;
            s.activation = act;
            s.hidden_widths = {width, width};
            specs.emplace_back(fmt::format("{}-{}", to_string(act), width), s);
        }
    }
    specs.emplace_back("rbfnet-500", bnn::RbfNetSpec{});
    Rng rng(55);
    double worst = 0.0;
    std::string worst_name;
    for (const auto &[name, spec] : specs) {
        bnn::PriorSpec prior;
        bnn::PriorSpec draw = prior;
        if (std::holds_alternative<bnn::RbfNetSpec>(spec)) {
            prior.sigma_w = 200.0;
            draw = prior;
            draw.sigma_w = 1.0;  // keep the likelihood in a well-conditioned range
            draw.sigma_mu = 3.0;
        }
        const auto P = bnn::parameter_count(spec);
        for (int rep = 0; rep < 10; ++rep) {
            const auto w = bnn::sample_prior(spec, draw, rng);
            // Every coordinate for small models; 150 random coordinates otherwise.
            std::vector<Eigen::Index> coords;
            if (P <= 200) {
                for (Eigen::Index i = 0; i < P; ++i) { coords.push_back(i); }
            } else {
                std::set<Eigen::Index> picked;
                while (picked.size() < 150) {
                    picked.insert(static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(P)));
                }
                coords.assign(picked.begin(), picked.end());
            }
            const double err = gradient_error(spec, prior, data, w, coords);
            if (err > worst) {
                worst = err;
                worst_name = name;
            }
        }
    }
    return {worst < 1e-5, fmt::format("worst relative error {:.3g} ({}) over {} models x 10 draws", worst, worst_name,
                                      specs.size())};
}

// ---- 6: finite/infinite consistency ----
Outcome hmc_vs_nngp() {
    const auto data = gen_gaussian_mixture(0, 10);
    const auto grid = make_grid(default_grid_mixture());
    bnn::MlpSpec spec;
    spec.hidden_widths = {100, 100};
    hmc::Config config;
    config.step_size = 1e-4;
    config.seed = 0;
    const auto run = bnn::hmc_sample(spec, bnn::PriorSpec{}, data, kDefaultNoiseVar, config);
    const auto hmc_field = bnn::predictive_moments(spec, run.samples, grid);
    kernel::Nngp nngp;
    nngp.depth = 2;
    const auto gp_field = field(nngp, data, kDefaultNoiseVar, grid);
    const auto cmp = diagnostics::field_compare(hmc_field, gp_field);
    double acceptance = 0.0;
    for (const auto &c : run.chains) { acceptance += c.acceptance_rate(); }
    acceptance /= static_cast<double>(run.chains.size());
    return {cmp.spearman_rho >= 0.8,
            fmt::format("spearman rho={:.4f} (>=0.8), mean acceptance {:.3f}, {} samples", cmp.spearman_rho,
                        acceptance, run.samples.size())};
}

// ---- 7: RBF-network kernel limit ----
Outcome rbf_net_limit() {
    kernel::RbfNet spec;
    spec.sigma_mu = 1e4;
    Rng rng(77);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        const Eigen::Vector2d x(12.0 * rng.uniform() - 6.0, 12.0 * rng.uniform() - 6.0);
        const Eigen::Vector2d x2(12.0 * rng.uniform() - 6.0, 12.0 * rng.uniform() - 6.0);
        const double sb2 = spec.sigma_b * spec.sigma_b;
        const double normalized = (rbf_net_kernel(spec, x, x2) - sb2) /
                                  std::sqrt((rbf_net_kernel(spec, x, x) - sb2) * (rbf_net_kernel(spec, x2, x2) - sb2));
        const double target = std::exp(-(x - x2).squaredNorm() / (4.0 * spec.sigma_g * spec.sigma_g));
        worst = std::max(worst, std::abs(normalized - target));
    }
    return {worst < 1e-4, fmt::format("max |normalized - exp(-r^2/4)| = {:.3g} (<1e-4)", worst)};
}

// ---- 8: invariant suites ----
Outcome invariants() {
    std::vector<std::string> failed;
    auto expect = [&failed](bool ok, const char *what) {
        if (!ok) { failed.emplace_back(what); }
    };
    const auto data = gen_gaussian_mixture(0, 10);
    const auto grid = make_grid(default_grid_mixture());
    kernel::Nngp mc;
    mc.mc_samples = 100000;
    const std::vector<KernelSpec> specs{kernel::Rbf{1.0}, kernel::Nngp{2}, kernel::RbfNet{}, kernel::DotProduct{}};

    for (const auto &spec : specs) {
        const auto K = gram(spec, data.X).values;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K, Eigen::EigenvaluesOnly);
        expect(K == K.transpose(), "gram symmetry");
        expect(eig.eigenvalues().minCoeff() >= -1e-10 * K.trace() / static_cast<double>(K.rows()), "gram PSD");
    }
    {
        const auto K = gram(mc, data.X, kDefaultNoiseVar).values;
        expect(K == K.transpose(), "MC gram symmetry");
        expect(Eigen::LLT<Eigen::MatrixXd>(K).info() == Eigen::Success, "MC gram Cholesky");
    }

    for (const auto &spec : specs) {
        Dataset subset;
        subset.X = data.X.topRows(12);
        subset.y = data.y.head(12);
        const auto small = field(spec, subset, kDefaultNoiseVar, grid);
        const auto big = field(spec, data, kDefaultNoiseVar, grid);
        expect(((big.std - small.std).array() <= 1e-8).all(), "variance monotone in data");
        const auto prior = prior_variance_field(spec, grid);
        expect(((big.std.array().square() - prior.array()) <= 1e-8 * prior.array().max(1.0)).all(),
               "variance below prior");
        Dataset shifted = data;
        shifted.y = shifted.y.array() * 3.0 + 1.0;
        expect(field(spec, shifted, kDefaultNoiseVar, grid).std == big.std, "variance independent of y");

        Rng rng(9);
        for (int t = 0; t < 10; ++t) {
            const Eigen::Vector2d x(12.0 * rng.uniform() - 6.0, 12.0 * rng.uniform() - 6.0);
            const auto kde = kde_weights(spec, data, kDefaultNoiseVar, x);
            const auto post = posterior(spec, data, kDefaultNoiseVar, x.transpose());
            expect(std::abs(kde.posterior_var - post.cov(0, 0)) <= 1e-10 * std::max(1.0, kde.prior_var),
                   "kde identity");
        }
    }

    const auto gaussian = [](const Eigen::VectorXd &w, Eigen::VectorXd *grad) {
        const Eigen::Vector3d prec(1.0, 4.0, 0.25);
        if (grad != nullptr) { *grad = -prec.cwiseProduct(w); }
        return -0.5 * w.dot(prec.cwiseProduct(w));
    };
    {
        Eigen::VectorXd w = Eigen::Vector3d(0.5, -1.0, 2.0);
        Eigen::VectorXd p = Eigen::Vector3d(1.0, 0.3, -0.7);
        const Eigen::VectorXd w0 = w;
        const Eigen::VectorXd p0 = p;
        hmc::leapfrog(w, p, 0.05, 50, gaussian);
        p = -p;
        hmc::leapfrog(w, p, 0.05, 50, gaussian);
        p = -p;
        expect((w - w0).norm() <= 1e-8 * w0.norm() && (p - p0).norm() <= 1e-8 * p0.norm(), "leapfrog reversibility");

        auto energy_error = [&](double eps, int steps) {
            Eigen::VectorXd a = w0;
            Eigen::VectorXd b = p0;
            hmc::leapfrog(a, b, eps, steps, gaussian);
            return std::abs((-gaussian(a, nullptr) + 0.5 * b.squaredNorm()) -
                            (-gaussian(w0, nullptr) + 0.5 * p0.squaredNorm()));
        };
        const double ratio = energy_error(0.1, 10) / energy_error(0.05, 20);
        expect(ratio >= 3.0 && ratio <= 5.0, "leapfrog O(eps^2)");
    }

    expect(gen_gaussian_mixture(5).X == gen_gaussian_mixture(5).X, "mixture determinism");
    expect(gen_two_rings(5).X == gen_two_rings(5).X, "rings determinism");
    expect(gen_two_rings(5).X != gen_two_rings(6).X, "rings seed sensitivity");

    if (failed.empty()) { return {true, "gram symmetry/PSD, variance monotone/y-free, kde 1e-10, leapfrog, datasets"}; }
    std::string list;
    for (const auto &f : failed) { list += (list.empty() ? "" : ", ") + f; }
    return {false, "failed: " + list};
}

// ---- 9: CLI replay ----
int shell(const std::string &command) {
    const int status = std::system((command + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_replay() {
    const std::string cli = OOD_CLI_PATH;
    const fs::path dir = fs::temp_directory_path() / "ood_acceptance" / "replay";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto p = [&dir](const std::string &name) { return (dir / name).string(); };
    io::write_text(dir / "rbf.json", R"({"kind": "RBF", "l": 1.0})");
    io::write_text(dir / "mc.json",
                   R"({"kind": "NNGP", "depth": 2, "activation": "ReLU", "mc_samples": 5000, "seed": 3})");

    struct Run {
        std::string args;
        fs::path record;
        fs::path output;  // file or directory
    };
    const std::vector<Run> runs{
        {"dataset --kind mixture --seed 0 --out " + p("mix.csv"), dir / "mix.csv.run.json", dir / "mix.csv"},
        {"dataset --kind rings --seed 1 --out " + p("rings.csv"), dir / "rings.csv.run.json", dir / "rings.csv"},
        {"gp-field --kernel " + p("rbf.json") + " --data " + p("mix.csv") + " --out " + p("gp"), dir / "gp" / "run.json",
         dir / "gp"},
        {"gp-field --kernel " + p("mc.json") + " --data " + p("mix.csv") + " --grid -6,6,8 --out " + p("gpmc"),
         dir / "gpmc" / "run.json", dir / "gpmc"},
        {"hmc-field --widths 5,5 --data " + p("mix.csv") + " --chains 2 --steps 60 --burn-in 20 --keep 40 --out " +
             p("hmc"),
         dir / "hmc" / "run.json", dir / "hmc"},
        {"diag mc-error --Ns 100,1000 --reps 3 --out " + p("mcerr"), dir / "mcerr" / "run.json", dir / "mcerr"},
        {"diag distance --kernel " + p("mc.json") + " --data " + p("mix.csv") + " --out " + p("dist"),
         dir / "dist" / "run.json", dir / "dist"},
        {"diag compare " + p("gp/field.csv") + " " + p("gp/field.csv") + " --out " + p("cmp"), dir / "cmp" / "run.json",
         dir / "cmp"},
    };
    std::vector<std::string> problems;
    int compared = 0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        const auto &run = runs[k];
        if (shell(cli + " " + run.args) != 0) {
            problems.push_back("failed: " + run.args.substr(0, run.args.find(' ', 6)));
            continue;
        }
        const fs::path replayed = dir / fmt::format("replay{}", k) / run.output.filename();
        if (shell(cli + " replay " + run.record.string() + " --out " + replayed.string()) != 0) {
            problems.push_back("replay failed: " + run.record.string());
            continue;
        }
        std::vector<std::pair<fs::path, fs::path>> files;
        if (fs::is_directory(run.output)) {
            for (const auto &entry : fs::directory_iterator(run.output)) {
                if (entry.path().extension() == ".csv") {
                    files.emplace_back(entry.path(), replayed / entry.path().filename());
                }
            }
        } else {
            files.emplace_back(run.output, replayed);
        }
        for (const auto &[a, b] : files) {
            ++compared;
            if (!fs::exists(b) || io::read_text(a) != io::read_text(b)) {
                problems.push_back("differs: " + a.filename().string());
            }
        }
    }
    if (problems.empty()) { return {true, fmt::format("{} commands, {} CSV files bit-identical", runs.size(), compared)}; }
    std::string list;
    for (const auto &pr : problems) { list += (list.empty() ? "" : "; ") + pr; }
    return {false, list};
}

}  // namespace

int main(int argc, char **argv) {
    bool skip_slow = false;
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--skip-slow") {
            skip_slow = true;
        } else if (arg == "--only" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--skip-slow] [--only N]\n";
            return 2;
        }
    }

    const std::vector<Criterion> criteria{
        {1, "RBF field returns to the prior away from the data", 1.0, false, rbf_field},
        {2, "ReLU NNGP std near the origin is relatively lower than RBF", 5.0, false, nngp_contrast},
        {3, "Monte Carlo ReLU kernel accuracy and N^-1/2 scaling", 120.0, false, mc_accuracy},
        {4, "HMC on a conjugate Gaussian model", 30.0, false, conjugate_hmc},
        {5, "Log-posterior gradients match finite differences", 30.0, false, gradient_check},
        {6, "Width-100 HMC field resembles the NNGP field", 0.0, true, hmc_vs_nngp},
        {7, "RBF-network kernel limit", 1.0, false, rbf_net_limit},
        {8, "Invariant suites", 60.0, false, invariants},
        {9, "CLI runs replay bit-identically", 0.0, false, cli_replay},
    };

    int failures = 0;
    for (const auto &c : criteria) {
        if (only != 0 && c.id != only) { continue; }
        if (only == 0 && skip_slow && c.slow) {
            std::cout << fmt::format("AC{} SKIP {} (slow; run `acceptance --only {}`)\n", c.id, c.title, c.id);
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception &e) {
            outcome = {false, fmt::format("threw: {}", e.what())};
        }
        const double elapsed = seconds_since(start);
        const bool in_time = c.budget_seconds <= 0.0 || elapsed < c.budget_seconds;
        const bool pass = outcome.pass && in_time;
        const std::string budget = c.budget_seconds > 0.0 ? fmt::format(" < {:g}s", c.budget_seconds) : "";
        std::cout << fmt::format("AC{} {} {}: {} [{:.2f}s{}]\n", c.id, pass ? "PASS" : "FAIL", c.title,
                                 outcome.detail, elapsed, budget)
                  << std::flush;
        if (!pass) { ++failures; }
    }
    return failures == 0 ? 0 : 1;
}
