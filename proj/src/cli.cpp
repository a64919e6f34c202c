#include "ood/cli.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ood/bnn.hpp"
#include "ood/datasets.hpp"
#include "ood/diagnostics.hpp"
#include "ood/error.hpp"
#include "ood/gp.hpp"
#include "ood/io.hpp"
#include "ood/kernels.hpp"

namespace ood::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char *kToolVersion = "1.0.0";

std::string paint(const Options &options, std::string_view text, const char *code) {
    if (!options.color) { return std::string(text); }
    return fmt::format("\x1b[{}m{}\x1b[0m", code, text);
}

// ---- grid and data helpers ----

json grid_to_json(const GridSpec &g) {
    return {{"lo", std::vector<double>(g.lo.data(), g.lo.data() + g.lo.size())},
            {"hi", std::vector<double>(g.hi.data(), g.hi.data() + g.hi.size())},
            {"resolution", g.resolution}};
}

GridSpec grid_from_json(const json &doc) {
    const auto lo = doc.at("lo").get<std::vector<double>>();
    const auto hi = doc.at("hi").get<std::vector<double>>();
    GridSpec g;
    g.lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    g.hi = Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
    g.resolution = doc.at("resolution").get<int>();
    return g;
}

/// "mixture", "rings" or "lo,hi,res" (square box of the given dimension).
GridSpec parse_grid(const std::string &text, int dim) {
    if (text == "mixture") { return default_grid_mixture(); }
    if (text == "rings") { return default_grid_rings(); }
    const auto parts = io::split(text);
    if (parts.size() != 3) { throw InvalidArgument(fmt::format("--grid expects 'lo,hi,res', got '{}'", text)); }
    const double lo = io::parse_double(parts[0]);
    const double hi = io::parse_double(parts[1]);
    const double res = io::parse_double(parts[2]);
    if (res != std::floor(res)) { throw InvalidArgument("--grid resolution must be an integer"); }
    GridSpec g = GridSpec::square(lo, hi, static_cast<int>(res), dim);
    make_grid(g);  // validates
    return g;
}

std::vector<int> parse_int_list(const std::string &text, const char *flag) {
    std::vector<int> out;
    for (auto part : io::split(text)) {
        const double v = io::parse_double(part);
        if (v != std::floor(v) || v < 1 || v > 2e9) {
            throw InvalidArgument(fmt::format("{} expects positive integers, got '{}'", flag, part));
        }
        out.push_back(static_cast<int>(v));
    }
    return out;
}

Dataset load_optional_data(const json &config, int fallback_dim) {
    if (config.contains("data") && !config.at("data").is_null()) {
        return load_csv(config.at("data").get<std::string>());
    }
    Dataset empty;
    empty.X.resize(0, fallback_dim);
    empty.y.resize(0);
    return empty;
}

std::string absolute_path(const std::string &path) { return fs::absolute(path).lexically_normal().string(); }

void write_run_json(const fs::path &path, const json &config) { io::write_text(path, config.dump(2) + "\n"); }

void write_field_outputs(const UncertaintyField &f, const GridSpec &grid, const fs::path &dir) {
    save_field_csv(f, dir / "field.csv");
    if (grid.lo.size() == 2) {
        save_field_pgm(f.std, grid.resolution, dir / "std.pgm");
        save_field_pgm(f.mean, grid.resolution, dir / "mean.pgm");
    }
}

// ---- commands ----

void cmd_dataset(const json &config, std::ostream &out, const Options &options) {
    const auto kind = config.at("kind").get<std::string>();
    const auto seed = config.at("seed").get<std::uint64_t>();
    const auto n = config.at("n").get<std::size_t>();
    Dataset data;
    if (kind == "mixture") {
        if (n < 2 || n % 2 != 0) { throw InvalidArgument("mixture size must be even and >= 2"); }
        data = gen_gaussian_mixture(seed, n / 2);
    } else if (kind == "rings") {
        data = gen_two_rings(seed, n);
    } else {
        throw InvalidArgument(fmt::format("unknown dataset kind '{}'", kind));
    }
    const fs::path path = config.at("out").get<std::string>();
    save_csv(data, path);
    write_run_json(fs::path(path.string() + ".run.json"), config);
    out << paint(options, "ok", "32") << fmt::format(" dataset {} n={} seed={} -> {}\n", kind, data.size(), seed,
                                                     path.string());
}

void cmd_gp_field(const json &config, std::ostream &out, const Options &options) {
    const auto spec = kernel_from_json(config.at("kernel"));
    const auto grid_spec = grid_from_json(config.at("grid"));
    const Dataset data = load_optional_data(config, static_cast<int>(grid_spec.lo.size()));
    const double noise_var = config.at("noise_var").get<double>();
    const Eigen::MatrixXd grid = make_grid(grid_spec);
    const fs::path dir = config.at("out").get<std::string>();

    const bool clip = config.value("clip_eigenvalues", false);
    UncertaintyField f;
    if (config.value("full_cov", false)) {
        const auto post = posterior(spec, data, noise_var, grid, clip);
        f.grid = grid;
        f.mean = post.mean;
        f.std = predictive_std(post);
        std::vector<std::string> header;
        for (Eigen::Index j = 0; j < grid.rows(); ++j) { header.push_back(fmt::format("c{}", j)); }
        io::write_csv(dir / "cov.csv", header, post.cov);
    } else {
        f = field(spec, data, noise_var, grid, clip);
    }
    write_field_outputs(f, grid_spec, dir);
    write_run_json(dir / "run.json", config);
    out << paint(options, "ok", "32")
        << fmt::format(" gp-field {} n={} std in [{}, {}] -> {}\n", describe(spec), data.size(),
                       io::format_double(f.std.minCoeff()), io::format_double(f.std.maxCoeff()), dir.string());
}

void cmd_hmc_field(const json &config, std::ostream &out, const Options &options) {
    const auto network = bnn::network_from_json(config.at("network"));
    const auto prior = bnn::prior_from_json(config.at("prior"));
    const auto grid_spec = grid_from_json(config.at("grid"));
    const int dim = std::visit([](const auto &s) { return s.input_dim; }, network);
    const Dataset data = load_optional_data(config, dim);
    const double noise_var = config.at("noise_var").get<double>();
    const auto &h = config.at("hmc");
    hmc::Config hc;
    hc.chains = h.at("chains").get<int>();
    hc.steps = h.at("steps").get<int>();
    hc.leapfrog_steps = h.at("leapfrog_steps").get<int>();
    hc.step_size = h.at("step_size").get<double>();
    hc.burn_in = h.at("burn_in").get<int>();
    hc.keep = h.at("keep").get<int>();
    hc.seed = h.at("seed").get<std::uint64_t>();
    const fs::path dir = config.at("out").get<std::string>();

    const auto run = bnn::hmc_sample(network, prior, data, noise_var, hc);
    const Eigen::MatrixXd grid = make_grid(grid_spec);
    const auto f = bnn::predictive_moments(network, run.samples, grid);
    write_field_outputs(f, grid_spec, dir);
    bnn::save_samples_csv(network, run.samples, dir / "samples.csv");

    json report{{"chains", json::array()}, {"samples", run.samples.size()}};
    for (std::size_t c = 0; c < run.chains.size(); ++c) {
        const auto &r = run.chains[c];
        report["chains"].push_back({{"chain", c},
                                    {"seed", r.seed},
                                    {"accepted", r.accepted},
                                    {"proposals", r.proposals},
                                    {"acceptance_rate", r.acceptance_rate()},
                                    {"init_attempts", r.init_attempts}});
    }
    report["config"] = h;
    io::write_text(dir / "hmc.json", report.dump(2) + "\n");
    write_run_json(dir / "run.json", config);

    std::string rates;
    for (const auto &r : run.chains) { rates += fmt::format("{}{:.3f}", rates.empty() ? "" : ",", r.acceptance_rate()); }
    out << paint(options, "ok", "32")
        << fmt::format(" hmc-field samples={} acceptance=[{}] std in [{}, {}] -> {}\n", run.samples.size(), rates,
                       io::format_double(f.std.minCoeff()), io::format_double(f.std.maxCoeff()), dir.string());
}

void cmd_diag_mc_error(const json &config, std::ostream &out, const Options &options) {
    const auto activation = activation_from_string(config.at("activation").get<std::string>());
    const auto grid = make_grid(grid_from_json(config.at("grid")));
    diagnostics::McErrorOptions opts;
    opts.sigma_w = config.at("sigma_w").get<double>();
    opts.sigma_b = config.at("sigma_b").get<double>();
    const auto curve = diagnostics::mc_error_study(activation, config.at("depth").get<int>(), grid,
                                                   config.at("Ns").get<std::vector<int>>(),
                                                   config.at("reps").get<int>(),
                                                   config.at("seed").get<std::uint64_t>(), opts);
    const fs::path dir = config.at("out").get<std::string>();
    diagnostics::save_error_curve_csv(curve, dir / "mc_error.csv");
    write_run_json(dir / "run.json", config);
    std::string summary;
    for (std::size_t i = 0; i < curve.sample_counts.size(); ++i) {
        summary += fmt::format(" N={}:{:.3e}", curve.sample_counts[i], curve.mean_abs_rel_error[i]);
    }
    out << paint(options, "ok", "32")
        << fmt::format(" mc-error {} depth={} rel_error{}\n", to_string(activation), curve.depth, summary);
}

void cmd_diag_distance(const json &config, std::ostream &out, const Options &options) {
    const auto spec = kernel_from_json(config.at("kernel"));
    const auto data = load_csv(config.at("data").get<std::string>());
    const auto scatter = diagnostics::distance_awareness(spec, data.X);
    const fs::path dir = config.at("out").get<std::string>();
    diagnostics::save_distance_csv(scatter, dir / "distance.csv");
    write_run_json(dir / "run.json", config);
    // Pairs that contradict distance-awareness: further apart but larger kernel value.
    std::size_t inversions = 0;
    for (std::size_t i = 0; i < scatter.pairs.size(); ++i) {
        for (std::size_t j = 0; j < scatter.pairs.size(); ++j) {
            if (scatter.pairs[i].distance < scatter.pairs[j].distance &&
                scatter.pairs[i].kernel_value < scatter.pairs[j].kernel_value) {
                ++inversions;
            }
        }
    }
    out << paint(options, "ok", "32")
        << fmt::format(" distance {} pairs={} inversions={}\n", describe(spec), scatter.pairs.size(), inversions);
}

void cmd_diag_compare(const json &config, std::ostream &out, const Options &options) {
    const auto a = load_field_csv(config.at("a").get<std::string>());
    const auto b = load_field_csv(config.at("b").get<std::string>());
    const auto cmp = diagnostics::field_compare(a, b);
    if (config.contains("out") && !config.at("out").is_null()) {
        const fs::path dir = config.at("out").get<std::string>();
        Eigen::MatrixXd row(1, 3);
        row << cmp.spearman_rho, cmp.max_abs_diff, cmp.mean_abs_diff;
        io::write_csv(dir / "compare.csv", {"spearman_rho", "max_abs_diff", "mean_abs_diff"}, row);
        write_run_json(dir / "run.json", config);
    }
    out << paint(options, "ok", "32")
        << fmt::format(" rho={} max_abs_diff={} mean_abs_diff={}\n", io::format_double(cmp.spearman_rho),
                       io::format_double(cmp.max_abs_diff), io::format_double(cmp.mean_abs_diff));
}

json base_config(const std::string &command) { return {{"command", command}, {"version", kToolVersion}}; }

}  // namespace

void execute(json config, const std::optional<fs::path> &out_override, std::ostream &out, const Options &options) {
    if (!config.is_object() || !config.contains("command")) {
        throw InvalidArgument("run configuration needs a \"command\" field");
    }
    if (out_override) { config["out"] = out_override->string(); }
    const auto command = config.at("command").get<std::string>();
    try {
        if (command == "dataset") {
            cmd_dataset(config, out, options);
        } else if (command == "gp-field") {
            cmd_gp_field(config, out, options);
        } else if (command == "hmc-field") {
            cmd_hmc_field(config, out, options);
        } else if (command == "diag mc-error") {
            cmd_diag_mc_error(config, out, options);
        } else if (command == "diag distance") {
            cmd_diag_distance(config, out, options);
        } else if (command == "diag compare") {
            cmd_diag_compare(config, out, options);
        } else {
            throw InvalidArgument(fmt::format("unknown command '{}'", command));
        }
    } catch (const json::exception &e) {
        throw InvalidArgument(fmt::format("bad run configuration: {}", e.what()));
    }
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err, const Options &options) {
    CLI::App app{"Epistemic uncertainty fields from GP regression, NNGP kernels and HMC-sampled networks", "ood"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    json config;
    std::string replay_path;
    std::optional<fs::path> replay_out;

    // dataset
    std::string ds_kind;
    std::uint64_t ds_seed = 0;
    int ds_n = 0;
    std::string ds_out;
    auto *ds = app.add_subcommand("dataset", "Generate a synthetic 2-D dataset as CSV");
    ds->add_option("--kind", ds_kind, "mixture or rings")->required()->check(CLI::IsMember({"mixture", "rings"}));
    ds->add_option("--seed", ds_seed, "PRNG seed");
    ds->add_option("--n", ds_n, "number of points (default 20 for mixture, 50 for rings)")->check(CLI::PositiveNumber);
    ds->add_option("--out", ds_out, "output CSV (default <kind>.csv)");

    // gp-field
    std::string gp_kernel;
    std::string gp_data;
    double gp_noise = kDefaultNoiseVar;
    std::string gp_grid = "mixture";
    std::optional<std::uint64_t> gp_seed;
    bool gp_full = false;
    bool gp_clip = false;
    std::string gp_out;
    auto *gp = app.add_subcommand("gp-field", "Exact GP posterior mean/std over a grid");
    gp->add_option("--kernel", gp_kernel, "kernel JSON file")->required();
    gp->add_option("--data", gp_data, "training CSV (omit for the prior)");
    gp->add_option("--noise-var", gp_noise, "likelihood variance")->check(CLI::PositiveNumber);
    gp->add_option("--grid", gp_grid, "mixture | rings | lo,hi,res");
    gp->add_option("--seed", gp_seed, "seed for Monte Carlo kernels (overrides the kernel file)");
    gp->add_flag("--full-cov", gp_full, "also write the full posterior covariance");
    gp->add_flag("--clip-eigenvalues", gp_clip, "project an indefinite kernel matrix onto the PSD cone");
    gp->add_option("--out", gp_out, "output directory")->required();

    // hmc-field
    std::string hm_arch = "mlp";
    std::string hm_widths = "5,5";
    int hm_width = 500;
    std::string hm_activation = "relu";
    std::string hm_prior = "width-aware";
    std::string hm_data;
    double hm_noise = kDefaultNoiseVar;
    std::string hm_grid = "mixture";
    std::optional<double> hm_sigma_w;
    double hm_sigma_b = 1.0;
    double hm_sigma_g = 1.0;
    double hm_sigma_mu = 10.0;
    bool hm_scale_rbf = false;
    int hm_chains = 5;
    int hm_steps = 5000;
    int hm_leapfrog = 50;
    std::optional<double> hm_step_size;
    int hm_burn_in = 1000;
    int hm_keep = 1000;
    std::uint64_t hm_seed = 0;
    std::string hm_out;
    auto *hm = app.add_subcommand("hmc-field", "HMC over network weights, predictive disagreement over a grid");
    hm->add_option("--arch", hm_arch, "mlp or rbfnet")->check(CLI::IsMember({"mlp", "rbfnet"}));
    hm->add_option("--widths", hm_widths, "MLP hidden widths, comma separated");
    hm->add_option("--width", hm_width, "RBF network hidden width")->check(CLI::PositiveNumber);
    hm->add_option("--activation", hm_activation, "relu, erf or tanh")
        ->check(CLI::IsMember({"relu", "erf", "tanh"}, CLI::ignore_case));
    hm->add_option("--prior", hm_prior, "width-aware or standard")->check(CLI::IsMember({"width-aware", "standard"}));
    hm->add_option("--data", hm_data, "training CSV (omit to sample the prior)");
    hm->add_option("--noise-var", hm_noise, "likelihood variance")->check(CLI::PositiveNumber);
    hm->add_option("--grid", hm_grid, "mixture | rings | lo,hi,res");
    hm->add_option("--sigma-w", hm_sigma_w, "weight prior scale (default 1, or 200 for rbfnet)");
    hm->add_option("--sigma-b", hm_sigma_b, "bias prior scale");
    hm->add_option("--sigma-g", hm_sigma_g, "RBF basis width");
    hm->add_option("--sigma-mu", hm_sigma_mu, "RBF centre prior scale");
    hm->add_flag("--scale-rbf-output", hm_scale_rbf, "divide the RBF output-weight prior variance by the width");
    hm->add_option("--chains", hm_chains);
    hm->add_option("--steps", hm_steps);
    hm->add_option("--leapfrog", hm_leapfrog, "leapfrog steps per proposal");
    hm->add_option("--step-size", hm_step_size, "leapfrog step (default 1e-3, or 1e-4 from width 50)");
    hm->add_option("--burn-in", hm_burn_in);
    hm->add_option("--keep", hm_keep, "samples kept across all chains");
    hm->add_option("--seed", hm_seed);
    hm->add_option("--out", hm_out, "output directory")->required();

    // diag
    auto *diag = app.add_subcommand("diag", "Kernel and field diagnostics");
    diag->require_subcommand(1);

    std::string me_activation = "relu";
    int me_depth = 2;
    std::string me_ns = "100,1000,10000,100000";
    int me_reps = 10;
    std::string me_grid = "-6,6,5";
    double me_sigma_w = 1.0;
    double me_sigma_b = 1.0;
    std::uint64_t me_seed = 0;
    std::string me_out;
    auto *me = diag->add_subcommand("mc-error", "Monte Carlo kernel error against the analytic recursion");
    me->add_option("--activation", me_activation, "relu or erf")->check(CLI::IsMember({"relu", "erf"}, CLI::ignore_case));
    me->add_option("--depth", me_depth)->check(CLI::PositiveNumber);
    me->add_option("--Ns", me_ns, "sample counts, comma separated");
    me->add_option("--reps", me_reps)->check(CLI::PositiveNumber);
    me->add_option("--grid", me_grid, "evaluation points: mixture | rings | lo,hi,res");
    me->add_option("--sigma-w", me_sigma_w);
    me->add_option("--sigma-b", me_sigma_b);
    me->add_option("--seed", me_seed);
    me->add_option("--out", me_out, "output directory")->required();

    std::string di_kernel;
    std::string di_data;
    std::optional<std::uint64_t> di_seed;
    std::string di_out;
    auto *di = diag->add_subcommand("distance", "Kernel value against Euclidean distance for all training pairs");
    di->add_option("--kernel", di_kernel, "kernel JSON file")->required();
    di->add_option("--data", di_data, "training CSV")->required();
    di->add_option("--seed", di_seed, "seed for Monte Carlo kernels");
    di->add_option("--out", di_out, "output directory")->required();

    std::string cmp_a;
    std::string cmp_b;
    std::string cmp_out;
    std::optional<std::uint64_t> cmp_seed;
    auto *cmp = diag->add_subcommand("compare", "Spearman correlation and differences of two std fields");
    cmp->add_option("field_a", cmp_a, "field CSV")->required();
    cmp->add_option("field_b", cmp_b, "field CSV")->required();
    cmp->add_option("--out", cmp_out, "output directory for compare.csv and run.json");
    cmp->add_option("--seed", cmp_seed, "unused; accepted for uniformity");

    // replay
    std::string rp_out;
    auto *rp = app.add_subcommand("replay", "Rerun a command from its run.json");
    rp->add_option("config", replay_path, "run.json")->required();
    rp->add_option("--out", rp_out, "new output location");

    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i) { args.emplace_back(argv[i]); }
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion &) {
        out << kToolVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        const CLI::App *failing = &app;
        for (auto *sub : app.get_subcommands()) {
            failing = sub;
            for (auto *nested : sub->get_subcommands()) { failing = nested; }
        }
        err << failing->help();
        return kUsage;
    }

    try {
        if (ds->parsed()) {
            const int n = ds_n > 0 ? ds_n : (ds_kind == "mixture" ? 20 : 50);
            config = base_config("dataset");
            config["kind"] = ds_kind;
            config["seed"] = ds_seed;
            config["n"] = n;
            config["out"] = ds_out.empty() ? ds_kind + ".csv" : ds_out;
        } else if (gp->parsed()) {
            json kdoc = json::parse(io::read_text(gp_kernel));
            if (gp_seed) { kdoc["seed"] = *gp_seed; }
            const auto spec = kernel_from_json(kdoc);
            int dim = input_dim(spec).value_or(2);
            Dataset probe;
            if (!gp_data.empty()) {
                probe = load_csv(gp_data);
                dim = static_cast<int>(probe.dim());
            }
            config = base_config("gp-field");
            config["kernel"] = to_json(spec);
            config["data"] = gp_data.empty() ? json(nullptr) : json(absolute_path(gp_data));
            config["noise_var"] = gp_noise;
            config["grid"] = grid_to_json(parse_grid(gp_grid, dim));
            config["full_cov"] = gp_full;
            config["clip_eigenvalues"] = gp_clip;
            config["out"] = gp_out;
        } else if (hm->parsed()) {
            bnn::NetworkSpec network;
            if (hm_arch == "mlp") {
                bnn::MlpSpec s;
                s.hidden_widths = parse_int_list(hm_widths, "--widths");
                s.activation = activation_from_string(hm_activation);
                network = s;
            } else {
                bnn::RbfNetSpec s;
                s.hidden_width = hm_width;
                s.sigma_g = hm_sigma_g;
                network = s;
            }
            if (!hm_data.empty()) {
                const auto probe = load_csv(hm_data);
                const int d = static_cast<int>(probe.dim());
                std::visit([d](auto &s) { s.input_dim = d; }, network);
            }
            bnn::validate(network);
            bnn::PriorSpec prior;
            prior.kind = hm_prior == "standard" ? bnn::PriorKind::Standard : bnn::PriorKind::WidthAware;
            prior.sigma_w = hm_sigma_w.value_or(hm_arch == "rbfnet" ? 200.0 : 1.0);
            prior.sigma_b = hm_sigma_b;
            prior.sigma_mu = hm_sigma_mu;
            prior.scale_rbf_output = hm_scale_rbf;
            bnn::validate(prior);
            const int dim = std::visit([](const auto &s) { return s.input_dim; }, network);
            config = base_config("hmc-field");
            config["network"] = bnn::to_json(network);
            config["prior"] = bnn::to_json(prior);
            config["data"] = hm_data.empty() ? json(nullptr) : json(absolute_path(hm_data));
            config["noise_var"] = hm_noise;
            config["grid"] = grid_to_json(parse_grid(hm_grid, dim));
            config["hmc"] = {{"chains", hm_chains},
                             {"steps", hm_steps},
                             {"leapfrog_steps", hm_leapfrog},
                             {"step_size", hm_step_size.value_or(bnn::default_step_size(network))},
                             {"burn_in", hm_burn_in},
                             {"keep", hm_keep},
                             {"seed", hm_seed}};
            config["out"] = hm_out;
        } else if (me->parsed()) {
            config = base_config("diag mc-error");
            config["activation"] = std::string(to_string(activation_from_string(me_activation)));
            config["depth"] = me_depth;
            config["Ns"] = parse_int_list(me_ns, "--Ns");
            config["reps"] = me_reps;
            config["grid"] = grid_to_json(parse_grid(me_grid, 2));
            config["sigma_w"] = me_sigma_w;
            config["sigma_b"] = me_sigma_b;
            config["seed"] = me_seed;
            config["out"] = me_out;
        } else if (di->parsed()) {
            json kdoc = json::parse(io::read_text(di_kernel));
            if (di_seed) { kdoc["seed"] = *di_seed; }
            config = base_config("diag distance");
            config["kernel"] = to_json(kernel_from_json(kdoc));
            config["data"] = absolute_path(di_data);
            config["out"] = di_out;
        } else if (cmp->parsed()) {
            config = base_config("diag compare");
            config["a"] = absolute_path(cmp_a);
            config["b"] = absolute_path(cmp_b);
            config["out"] = cmp_out.empty() ? json(nullptr) : json(cmp_out);
        } else if (rp->parsed()) {
            config = json::parse(io::read_text(replay_path));
            if (!rp_out.empty()) { replay_out = rp_out; }
        }
        execute(config, replay_out, out, options);
        return kOk;
    } catch (const NumericalError &e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const SamplerError &e) {
        err << "sampler failure (chain " << e.chain() << "): " << e.what() << "\n";
        return kSampler;
    } catch (const InvalidArgument &e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const json::exception &e) {
        err << "error: invalid JSON: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace ood::cli
