// Shared fixtures for the test binaries: the three catalog experiments built
// by hand (the io presets are compared against these field-for-field) and a
// deterministic random-scenario generator used by the property tests.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ncw/ncw.hpp"

namespace support {

// 53-bit uniform doubles from a 32-bit Mersenne twister (two draws per
// variate), so every platform with IEEE doubles sees the same sequence.
class Rng {
  public:
    explicit Rng(std::uint32_t seed) : eng_(seed) {}

    double uniform01() {
        const double hi = static_cast<double>(eng_() >> 5);   // 27 bits
        const double lo = static_cast<double>(eng_() >> 6);   // 26 bits
        return (hi * 67108864.0 + lo) / 9007199254740992.0;   // / 2^53
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint32_t pick(std::uint32_t n) { return eng_() % n; }  // small n only

  private:
    std::mt19937 eng_;
};

inline ncw::core::AgentSpec agent1(double r) { return {0.15, 0.4, 30.0, r}; }
inline ncw::core::AgentSpec agent2(double r) { return {0.1, 0.3, 20.0, r}; }

// Two-agent catalog: the experiments differ only in Blue strength and the
// Blue-to-agent rates.
inline ncw::core::Scenario exp1_scenario() {
    return {160.0, 120.0, 0.5, {agent1(0.3), agent2(0.2)}};
}
inline ncw::core::Scenario exp2_scenario() {
    return {160.0, 120.0, 0.5, {agent1(0.15), agent2(0.4)}};
}
inline ncw::core::Scenario exp3_scenario() {
    return {200.0, 120.0, 0.5, {agent1(0.3), agent2(0.4)}};
}

// Random but always-valid scenario; n is drawn from {1..4}.  Draw order is
// part of the contract: changing it would silently re-seed every property
// test downstream.
inline ncw::core::Scenario random_scenario(Rng& rng) {
    ncw::core::Scenario scn;
    const std::size_t n = 1 + rng.pick(4);
    scn.b0_strength = rng.uniform(50.0, 500.0);
    scn.r0_strength = rng.uniform(50.0, 500.0);
    scn.r_R = rng.uniform(0.05, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        ncw::core::AgentSpec ag;
        ag.a0 = rng.uniform(10.0, 100.0);
        ag.r = rng.uniform(0.0, 1.0);
        ag.alpha_d = rng.uniform(0.0, 0.5);
        ag.alpha_c = ag.alpha_d + rng.uniform(0.0, 0.5);
        scn.agents.push_back(ag);
    }
    scn.validate();
    return scn;
}

// Random interior point of the allocation simplex (strictly positive).
inline ncw::core::Allocation random_allocation(Rng& rng, std::size_t arity) {
    std::vector<double> p(arity);
    double sum = 0.0;
    for (double& v : p) {
        v = 1e-6 + rng.uniform01();
        sum += v;
    }
    for (double& v : p) v /= sum;
    return ncw::core::Allocation(std::move(p));
}

}  // namespace support
