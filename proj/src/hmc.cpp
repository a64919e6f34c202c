#include "ood/hmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <fmt/format.h>

#include "ood/error.hpp"
#include "parallel.hpp"

namespace ood::hmc {

void Config::validate() const {
    if (chains < 1) { throw InvalidArgument("hmc: chains must be >= 1"); }
    if (steps < 1) { throw InvalidArgument("hmc: steps must be >= 1"); }
    if (leapfrog_steps < 0) { throw InvalidArgument("hmc: leapfrog_steps must be >= 0"); }
    if (!(step_size > 0.0)) { throw InvalidArgument("hmc: step_size must be positive"); }
    if (burn_in < 0 || burn_in >= steps) { throw InvalidArgument("hmc: need 0 <= burn_in < steps"); }
    const long available = static_cast<long>(chains) * (steps - burn_in);
    if (keep < 1 || keep > available) {
        throw InvalidArgument(fmt::format("hmc: keep must be in [1, {}], got {}", available, keep));
    }
}

double leapfrog(Eigen::VectorXd &w, Eigen::VectorXd &p, double step_size, int steps,
                const LogDensityFn &log_density) {
    if (steps <= 0) { return log_density(w, nullptr); }
    Eigen::VectorXd grad(w.size());
    log_density(w, &grad);
    p.noalias() += 0.5 * step_size * grad;
    double logp = 0.0;
    for (int s = 0; s < steps; ++s) {
        w.noalias() += step_size * p;
        logp = log_density(w, &grad);
        const double scale = s + 1 < steps ? step_size : 0.5 * step_size;
        p.noalias() += scale * grad;
    }
    return logp;
}

std::vector<long> thinning_indices(long total, int keep) {
    std::vector<long> idx(static_cast<std::size_t>(keep));
    for (int i = 0; i < keep; ++i) {
        idx[static_cast<std::size_t>(i)] = static_cast<long>((static_cast<__int128>(i) * total) / keep);
    }
    return idx;
}

namespace {

struct ChainOutput {
    std::vector<Eigen::VectorXd> kept;
    ChainReport report;
};

ChainOutput run_chain(const LogDensityFn &log_density, const InitFn &init, const Config &config, int chain,
                      const std::vector<long> &keep_local) {
    ChainOutput out;
    out.report.seed = derive_seed(config.seed, static_cast<std::uint64_t>(chain));
    Rng rng(out.report.seed);
    Rng init_rng = rng.split(0);
    Rng momentum_rng = rng.split(1);
    Rng accept_rng = rng.split(2);

    Eigen::VectorXd w;
    double logp = -std::numeric_limits<double>::infinity();
    constexpr int kMaxInitAttempts = 100;
    for (int attempt = 1; attempt <= kMaxInitAttempts; ++attempt) {
        w = init(init_rng);
        logp = log_density(w, nullptr);
        out.report.init_attempts = attempt;
        if (std::isfinite(logp)) { break; }
    }
    if (!std::isfinite(logp)) {
        throw SamplerError(fmt::format("chain {}: log density non-finite at {} initial states", chain,
                                       kMaxInitAttempts),
                           chain);
    }

    out.kept.reserve(keep_local.size());
    auto next_keep = keep_local.begin();
    Eigen::VectorXd p(w.size());
    for (int step = 0; step < config.steps; ++step) {
        for (Eigen::Index i = 0; i < p.size(); ++i) { p(i) = momentum_rng.normal(); }
        const double h0 = -logp + 0.5 * p.squaredNorm();
        Eigen::VectorXd w_new = w;
        Eigen::VectorXd p_new = p;
        const double logp_new = leapfrog(w_new, p_new, config.step_size, config.leapfrog_steps, log_density);
        const double h1 = -logp_new + 0.5 * p_new.squaredNorm();
        if (!std::isfinite(h1)) {
            throw SamplerError(fmt::format("chain {}: non-finite Hamiltonian at step {}", chain, step), chain);
        }
        ++out.report.proposals;
        const double u = accept_rng.uniform_open_left();
        if (std::log(u) < h0 - h1) {
            w = std::move(w_new);
            logp = logp_new;
            ++out.report.accepted;
        }
        const long post = static_cast<long>(step) - config.burn_in;
        while (next_keep != keep_local.end() && *next_keep == post) {
            out.kept.push_back(w);
            ++next_keep;
        }
    }
    return out;
}

}  // namespace

Result sample(const LogDensityFn &log_density, const InitFn &init, const Config &config) {
    config.validate();
    const long per_chain = config.steps - config.burn_in;
    const auto indices = thinning_indices(per_chain * config.chains, config.keep);
    std::vector<std::vector<long>> local(static_cast<std::size_t>(config.chains));
    for (const long idx : indices) { local[static_cast<std::size_t>(idx / per_chain)].push_back(idx % per_chain); }

    std::vector<ChainOutput> outputs(static_cast<std::size_t>(config.chains));
    detail::parallel_for(config.chains, [&](long c) {
        outputs[static_cast<std::size_t>(c)] =
            run_chain(log_density, init, config, static_cast<int>(c), local[static_cast<std::size_t>(c)]);
    }, config.parallel);

    Result result;
    result.samples.reserve(indices.size());
    for (auto &out : outputs) {
        for (auto &w : out.kept) { result.samples.push_back(std::move(w)); }
        result.chains.push_back(out.report);
    }
    return result;
}

}  // namespace ood::hmc
