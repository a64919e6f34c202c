#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ood/error.hpp"
#include "ood/hmc.hpp"
#include "ood/rng.hpp"

using namespace ood;

namespace {

/// log N(w | 0, diag(var)), unnormalized.
hmc::LogDensityFn gaussian(const Eigen::VectorXd &var, double offset = 0.0) {
    return [var, offset](const Eigen::VectorXd &w, Eigen::VectorXd *grad) {
        if (grad != nullptr) { *grad = -w.cwiseQuotient(var); }
        return offset - 0.5 * w.cwiseQuotient(var).dot(w);
    };
}

hmc::InitFn normal_init(Eigen::Index dim) {
    return [dim](Rng &rng) {
        Eigen::VectorXd w(dim);
        for (Eigen::Index i = 0; i < dim; ++i) { w(i) = rng.normal(); }
        return w;
    };
}

double hamiltonian(const hmc::LogDensityFn &fn, const Eigen::VectorXd &w, const Eigen::VectorXd &p) {
    return -fn(w, nullptr) + 0.5 * p.squaredNorm();
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::vector<double> scalars(const hmc::Result &r) {
    std::vector<double> out;
    out.reserve(r.samples.size());
    for (const auto &w : r.samples) { out.push_back(w(0)); }
    return out;
}

}  // namespace

TEST_CASE("zero leapfrog steps leave the state unchanged") {
    const auto fn = gaussian(Eigen::Vector2d(1.0, 4.0));
    Eigen::VectorXd w = Eigen::Vector2d(0.3, -1.2);
    Eigen::VectorXd p = Eigen::Vector2d(1.1, 0.4);
    const Eigen::VectorXd w0 = w;
    const Eigen::VectorXd p0 = p;
    const double logp = hmc::leapfrog(w, p, 0.1, 0, fn);
    CHECK(w == w0);
    CHECK(p == p0);
    CHECK(logp == fn(w0, nullptr));
}

TEST_CASE("leapfrog is reversible") {
    const auto fn = gaussian(Eigen::Vector3d(1.0, 0.25, 9.0));
    Rng rng(2);
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::VectorXd w(3);
        Eigen::VectorXd p(3);
        for (int i = 0; i < 3; ++i) {
            w(i) = 2.0 * rng.normal();
            p(i) = rng.normal();
        }
        const Eigen::VectorXd w0 = w;
        const Eigen::VectorXd p0 = p;
        hmc::leapfrog(w, p, 0.05, 50, fn);
        p = -p;
        hmc::leapfrog(w, p, 0.05, 50, fn);
        p = -p;
        CHECK((w - w0).norm() <= 1e-8 * w0.norm());
        CHECK((p - p0).norm() <= 1e-8 * p0.norm());
    }
}

TEST_CASE("leapfrog energy error is second order") {
    const auto fn = gaussian(Eigen::Vector3d(1.0, 0.5, 2.0));
    const Eigen::VectorXd w0 = Eigen::Vector3d(0.8, -0.6, 1.5);
    const Eigen::VectorXd p0 = Eigen::Vector3d(-0.4, 1.0, 0.7);
    const double h0 = hamiltonian(fn, w0, p0);
    auto energy_error = [&](double eps, int steps) {
        Eigen::VectorXd w = w0;
        Eigen::VectorXd p = p0;
        hmc::leapfrog(w, p, eps, steps, fn);
        return std::abs(hamiltonian(fn, w, p) - h0);
    };
    // Same trajectory length, halved step size.
    const double coarse = energy_error(0.1, 13);
    const double fine = energy_error(0.05, 26);
    const double finer = energy_error(0.025, 52);
    CHECK(coarse / fine >= 3.0);
    CHECK(coarse / fine <= 5.0);
    CHECK(fine / finer >= 3.0);
    CHECK(fine / finer <= 5.0);
}

TEST_CASE("thinning indices are evenly spaced") {
    const auto idx = hmc::thinning_indices(20000, 1000);
    REQUIRE(idx.size() == 1000);
    CHECK(idx.front() == 0);
    CHECK(idx.back() == 19980);
    for (std::size_t i = 1; i < idx.size(); ++i) { CHECK(idx[i] - idx[i - 1] == 20); }
    const auto uneven = hmc::thinning_indices(10, 3);
    CHECK(uneven == std::vector<long>{0, 3, 6});
    const auto all = hmc::thinning_indices(7, 7);
    CHECK(all == std::vector<long>{0, 1, 2, 3, 4, 5, 6});
}

TEST_CASE("config validation") {
    hmc::Config good;
    CHECK_NOTHROW(good.validate());
    auto bad = good;
    bad.burn_in = bad.steps;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = good;
    bad.keep = good.chains * (good.steps - good.burn_in) + 1;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = good;
    bad.step_size = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = good;
    bad.chains = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("one-dimensional standard normal target") {
    hmc::Config config;
    config.chains = 5;
    config.steps = 5000;
    config.burn_in = 500;
    config.keep = 5 * 4500;
    config.leapfrog_steps = 10;
    config.step_size = 0.1;
    config.seed = 11;
    const auto result = hmc::sample(gaussian(Eigen::VectorXd::Ones(1)), normal_init(1), config);
    const auto xs = scalars(result);
    REQUIRE(xs.size() == 22500);

    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (const double x : xs) { mean += x; }
    mean /= n;
    double var = 0.0;
    for (const double x : xs) { var += (x - mean) * (x - mean); }
    var /= n - 1.0;

    // Batch-means standard error (90 batches of 250 consecutive draws within a chain).
    constexpr std::size_t kBatch = 250;
    std::vector<double> batch_means;
    for (std::size_t start = 0; start + kBatch <= xs.size(); start += kBatch) {
        double s = 0.0;
        for (std::size_t i = start; i < start + kBatch; ++i) { s += xs[i]; }
        batch_means.push_back(s / kBatch);
    }
    double bvar = 0.0;
    for (const double b : batch_means) { bvar += (b - mean) * (b - mean); }
    bvar /= static_cast<double>(batch_means.size() - 1);
    const double mcse = std::sqrt(bvar / static_cast<double>(batch_means.size()));

    CHECK(std::abs(mean) < 3.0 * mcse);
    CHECK(std::abs(var - 1.0) < 0.1);
    for (const auto &chain : result.chains) {
        CHECK(chain.proposals == 5000);
        CHECK(chain.acceptance_rate() > 0.9);
        CHECK(chain.init_attempts == 1);
    }
}

TEST_CASE("tiny step sizes accept almost everything") {
    hmc::Config config;
    config.chains = 2;
    config.steps = 2000;
    config.burn_in = 0;
    config.keep = 10;
    config.leapfrog_steps = 5;
    config.step_size = 1e-6;
    const auto result = hmc::sample(gaussian(Eigen::Vector2d(1.0, 0.01)), normal_init(2), config);
    for (const auto &chain : result.chains) { CHECK(chain.acceptance_rate() >= 0.999); }
}

TEST_CASE("adding a constant to the log density changes nothing") {
    hmc::Config config;
    config.chains = 3;
    config.steps = 400;
    config.burn_in = 100;
    config.keep = 300;
    config.leapfrog_steps = 8;
    config.step_size = 0.4;
    config.seed = 5;
    const Eigen::Vector2d var(1.0, 3.0);
    const auto a = hmc::sample(gaussian(var), normal_init(2), config);
    const auto b = hmc::sample(gaussian(var, 1234.5), normal_init(2), config);
    for (std::size_t c = 0; c < a.chains.size(); ++c) { CHECK(a.chains[c].accepted == b.chains[c].accepted); }
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) { CHECK(a.samples[i] == b.samples[i]); }
}

TEST_CASE("stationary distribution matches the target") {
    hmc::Config config;
    config.chains = 1;
    config.steps = 1000000;
    config.burn_in = 100;
    config.keep = static_cast<int>(config.steps - config.burn_in);
    config.leapfrog_steps = 10;
    config.step_size = 0.1;
    config.seed = 3;
    const auto result = hmc::sample(gaussian(Eigen::VectorXd::Ones(1)), normal_init(1), config);
    auto xs = scalars(result);
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double cdf = standard_normal_cdf(xs[i]);
        ks = std::max({ks, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
    }
    CHECK(ks < 0.01);
}

TEST_CASE("sampling is deterministic and independent of scheduling") {
    hmc::Config config;
    config.chains = 4;
    config.steps = 300;
    config.burn_in = 50;
    config.keep = 100;
    config.leapfrog_steps = 5;
    config.step_size = 0.3;
    config.seed = 42;
    const auto fn = gaussian(Eigen::Vector3d(1.0, 2.0, 0.5));
    const auto a = hmc::sample(fn, normal_init(3), config);
    const auto b = hmc::sample(fn, normal_init(3), config);
    config.parallel = false;
    const auto c = hmc::sample(fn, normal_init(3), config);
    REQUIRE(a.samples.size() == 100);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i] == b.samples[i]);
        CHECK(a.samples[i] == c.samples[i]);
    }
    for (std::size_t k = 0; k < a.chains.size(); ++k) {
        CHECK(a.chains[k].seed == derive_seed(42, k));
        CHECK(a.chains[k].accepted == c.chains[k].accepted);
    }
    config.seed = 43;
    const auto d = hmc::sample(fn, normal_init(3), config);
    CHECK(d.samples[5] != a.samples[5]);
}

TEST_CASE("sampler failures carry the chain index") {
    hmc::Config config;
    config.chains = 2;
    config.steps = 10;
    config.burn_in = 0;
    config.keep = 5;
    config.parallel = false;
    const hmc::LogDensityFn never_finite = [](const Eigen::VectorXd &, Eigen::VectorXd *grad) {
        if (grad != nullptr) { grad->setZero(); }
        return -std::numeric_limits<double>::infinity();
    };
    try {
        hmc::sample(never_finite, normal_init(1), config);
        FAIL("expected a SamplerError");
    } catch (const SamplerError &e) {
        CHECK(e.chain() == 0);
    }

    // Finite start, divergent trajectory.
    const hmc::LogDensityFn explodes = [](const Eigen::VectorXd &w, Eigen::VectorXd *grad) {
        if (grad != nullptr) { *grad = 1e300 * w; }
        return 1e300 * w.squaredNorm();
    };
    config.step_size = 1.0;
    CHECK_THROWS_AS(hmc::sample(explodes, normal_init(1), config), SamplerError);
}
