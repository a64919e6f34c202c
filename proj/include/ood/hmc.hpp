#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ood/rng.hpp"

namespace ood::hmc {

/// Returns log p(w) up to a constant; fills `grad` with its gradient when non-null.
using LogDensityFn = std::function<double(const Eigen::VectorXd &w, Eigen::VectorXd *grad)>;

/// Draws an initial state for a chain.
using InitFn = std::function<Eigen::VectorXd(Rng &rng)>;

struct Config {
    int chains = 5;
    int steps = 5000;
    int leapfrog_steps = 50;
    double step_size = 1e-3;
    int burn_in = 1000;
    int keep = 1000;
    std::uint64_t seed = 0;
    /// Run chains on separate threads; results are identical either way.
    bool parallel = true;

    void validate() const;
};

struct ChainReport {
    std::uint64_t seed = 0;
    int accepted = 0;
    int proposals = 0;
    int init_attempts = 0;

    [[nodiscard]] double acceptance_rate() const noexcept {
        return proposals > 0 ? static_cast<double>(accepted) / proposals : 0.0;
    }
};

struct Result {
    /// Kept draws, pooled chain-major and thinned to Config::keep.
    std::vector<Eigen::VectorXd> samples;
    std::vector<ChainReport> chains;
};

/**
 * `steps` velocity-Verlet updates with unit mass:
 * p += eps/2 grad; w += eps p; p += eps/2 grad. The gradient is of the log
 * density, i.e. the negative potential. Steps = 0 leaves (w, p) unchanged.
 * Returns the log density at the final position.
 */
double leapfrog(Eigen::VectorXd &w, Eigen::VectorXd &p, double step_size, int steps,
                const LogDensityFn &log_density);

/// Indices into the pooled post-burn-in sequence of `total` draws, evenly spaced.
std::vector<long> thinning_indices(long total, int keep);

/**
 * Multi-chain HMC. Each chain gets the stream derive_seed(seed, chain); the
 * initial state is redrawn up to 100 times until the log density is finite.
 * A proposal with a non-finite Hamiltonian throws SamplerError naming the chain.
 */
Result sample(const LogDensityFn &log_density, const InitFn &init, const Config &config);

}  // namespace ood::hmc
