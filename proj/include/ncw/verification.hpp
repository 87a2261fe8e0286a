// Independent optimality oracles.  The planner trusts the argmax rule; this
// module re-derives its claims by brute force: (1) the scalarized objective
// F_gamma attains its simplex minimum at the claimed vertex for every tested
// gamma, (2) the bi-objective structure behind that claim holds (C1 >= 0 with
// equality at vertices, C2 is the linear threat form on the simplex), and
// (3) the simulated Blue trajectory under the argmax vertex dominates every
// lattice allocation's trajectory over the shared stage-1 window.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncw/dynamics.hpp"
#include "ncw/lanchester_core.hpp"
#include "ncw/strategy.hpp"

namespace ncw::verification {

// All allocations whose components are multiples of `step` (which must divide
// 1) summing to 1, in deterministic order: the first component descends from
// 1, then the second, and so on.
inline std::vector<core::Allocation> simplex_lattice(std::size_t arity, double step) {
    if (arity == 0) throw std::invalid_argument("simplex_lattice: arity must be >= 1");
    if (!(step > 0.0 && step <= 1.0))
        throw std::invalid_argument("simplex_lattice: step must be in (0, 1]");
    const long long m = std::llround(1.0 / step);
    if (m < 1 || std::abs(static_cast<double>(m) * step - 1.0) > 1e-9)
        throw std::invalid_argument("simplex_lattice: step must divide 1");

    std::vector<core::Allocation> lattice;
    std::vector<double> point(arity, 0.0);
    const std::function<void(std::size_t, long long)> fill = [&](std::size_t j, long long left) {
        if (j + 1 == arity) {
            point[j] = static_cast<double>(left) / static_cast<double>(m);
            lattice.push_back(core::Allocation(point));
            return;
        }
        for (long long k = left; k >= 0; --k) {
            point[j] = static_cast<double>(k) / static_cast<double>(m);
            fill(j + 1, left - k);
        }
    };
    fill(0, m);
    return lattice;
}

// `count` equispaced gamma values spanning [0, 1] inclusive.
inline std::vector<double> gamma_grid(std::size_t count) {
    if (count < 2) throw std::invalid_argument("gamma_grid: need at least 2 values");
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i)
        g[i] = static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

// Interaction coefficients a_i = r_R * r_i * (alpha_c^i - alpha_d^i) / A0^i
// (the quadratic part of C1); eliminated agents carry 0.
inline std::vector<double> interaction_coefficients(const core::EffectiveScenario& eff) {
    const core::Scenario& scn = eff.base();
    std::vector<double> a(scn.n_agents(), 0.0);
    for (std::size_t i = 0; i < scn.n_agents(); ++i) {
        if (eff.is_eliminated(static_cast<int>(i) + 1)) continue;
        const core::AgentSpec& ag = scn.agents[i];
        a[i] = scn.r_R * ag.r * (ag.alpha_c - ag.alpha_d) / ag.a0;
    }
    return a;
}

// F_gamma(x) = gamma * sum_i a_i x_0 x_i - (1 - gamma) * sum_j b_j x_j.
// At any vertex the quadratic term vanishes, leaving -(1-gamma) b_j.
inline double scalarized_objective(double gamma, const std::vector<double>& a,
                                   const core::ThreatRates& b, const core::Allocation& x) {
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("scalarized_objective: gamma must be in [0, 1]");
    if (b.arity() != x.arity() || a.size() + 1 != x.arity())
        throw std::invalid_argument("scalarized_objective: arity mismatch");
    double quad = 0.0, lin = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) quad += a[i] * x[0] * x[i + 1];
    for (std::size_t j = 0; j < x.arity(); ++j) lin += b.b[j] * x[j];
    return gamma * quad - (1.0 - gamma) * lin;
}

struct ScalarizationReport {
    struct PerGamma {
        double gamma = 0.0;
        double grid_min = 0.0;
        core::Allocation grid_argmin;  // first lattice point attaining the minimum
        double vertex_value = 0.0;
    };
    double simplex_step = 0.0;
    core::EntityId vertex_target;   // argmax of the threatening rates
    core::Allocation vertex;        // its indicator allocation
    std::vector<PerGamma> rows;
    bool pass = false;  // vertex <= grid minimum + 1e-9 for every gamma
};

// Exhaustive lattice evaluation of F_gamma for each gamma; passes iff the
// argmax-rate vertex attains the grid minimum (within 1e-9) every time.  The
// argmax is recomputed here rather than taken from the planner, so the check
// stands on its own.
inline ScalarizationReport verify_scalarized_min(const std::vector<double>& a,
                                                 const core::ThreatRates& b,
                                                 const std::vector<double>& gammas,
                                                 double simplex_step) {
    if (b.arity() != a.size() + 1)
        throw std::invalid_argument("verify_scalarized_min: arity mismatch");
    if (gammas.empty()) throw std::invalid_argument("verify_scalarized_min: no gamma values");

    std::size_t best = 0;  // strict >, so ties go to Red then the lowest index
    for (std::size_t j = 1; j < b.arity(); ++j)
        if (b.b[j] > b.b[best]) best = j;

    ScalarizationReport report{simplex_step,
                               best == 0 ? core::EntityId::red()
                                         : core::EntityId::agent(static_cast<int>(best)),
                               core::Allocation::vertex(b.arity(), best),
                               {},
                               true};

    const std::vector<core::Allocation> lattice = simplex_lattice(b.arity(), simplex_step);
    for (double gamma : gammas) {
        ScalarizationReport::PerGamma row{gamma, 0.0, lattice.front(), 0.0};
        row.grid_min = scalarized_objective(gamma, a, b, lattice.front());
        for (const core::Allocation& x : lattice) {
            const double v = scalarized_objective(gamma, a, b, x);
            if (v < row.grid_min) {
                row.grid_min = v;
                row.grid_argmin = x;
            }
        }
        row.vertex_value = scalarized_objective(gamma, a, b, report.vertex);
        if (!(row.vertex_value <= row.grid_min + 1e-9)) report.pass = false;
        report.rows.push_back(std::move(row));
    }
    return report;
}

// Structural facts the optimality argument rests on, checked on a lattice:
//   (i)  C1 is exactly 0 at every vertex and nonnegative on the simplex;
//   (ii) C2 restricted to the simplex equals the linear form sum_j b_j p_j
//        to 1e-12 relative, hence is maximized at the argmax-rate vertex.
inline bool verify_moo_structure(const core::EffectiveScenario& eff, const core::ThreatRates& rates,
                                 double step = 0.05) {
    if (rates.arity() != eff.n_agents() + 1)
        throw std::invalid_argument("verify_moo_structure: arity mismatch");
    const core::ForceState start = core::initial_state(eff);
    const std::size_t arity = rates.arity();

    for (std::size_t j = 0; j < arity; ++j) {
        const core::EnergyCoefficients c =
            core::energy_coefficients(eff, core::Allocation::vertex(arity, j), start);
        if (c.c1 != 0.0) return false;
    }

    for (const core::Allocation& p : simplex_lattice(arity, step)) {
        const core::EnergyCoefficients c = core::energy_coefficients(eff, p, start);
        if (!(c.c1 >= 0.0)) return false;
        double linear = 0.0;
        for (std::size_t j = 0; j < arity; ++j) linear += rates.b[j] * p[j];
        if (std::abs(c.c2 - linear) > 1e-12 * std::abs(c.c2)) return false;
    }
    return true;
}

struct DominanceReport {
    struct Margin {
        core::Allocation allocation;
        double margin = 0.0;  // min over shared sample times of B*(t) - B(t)
    };
    double grid_step = 0.0;
    core::Allocation optimal;       // the argmax-rule stage-1 vertex
    std::vector<Margin> margins;    // lattice order
    double worst_margin = 0.0;
    core::Allocation worst_allocation;
    bool pass = false;  // every margin >= -1e-6 * B0
};

// Simulates stage 1 under the argmax vertex and under every lattice
// allocation, comparing Blue strengths at the shared uniform sample times up
// to the earlier first-elimination time of each pair.  Fixed-step
// integration makes the margins reproducible bit for bit.
inline DominanceReport dominance_check(const core::Scenario& scn, double grid_step,
                                       const dynamics::IntegratorConfig& cfg) {
    scn.validate();
    cfg.validate();
    core::EffectiveScenario eff(scn);
    const core::ForceState start = core::initial_state(eff);
    const core::ThreatRates rates = core::threat_rates(eff);
    const strategy::StagePlan plan = strategy::optimal_allocation(rates, eff.eliminated());

    const dynamics::Trajectory best = dynamics::integrate_stage(eff, plan.allocation, start, cfg);
    const auto window_end = [](const dynamics::Trajectory& t) {
        if (auto first = t.first_event_time()) return *first;
        return t.samples.empty() ? 0.0 : t.samples.back().t;
    };
    const double best_end = window_end(best);

    DominanceReport report{grid_step, plan.allocation, {}, 0.0, plan.allocation, true};
    bool first = true;
    for (const core::Allocation& p : simplex_lattice(scn.n_agents() + 1, grid_step)) {
        const dynamics::Trajectory other = dynamics::integrate_stage(eff, p, start, cfg);
        const double window = std::min(best_end, window_end(other));
        std::size_t k_max = static_cast<std::size_t>(std::floor(window / cfg.dt + 1e-9));
        k_max = std::min({k_max, best.samples.size() - 1, other.samples.size() - 1});
        double margin = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k <= k_max; ++k)
            margin = std::min(margin, best.samples[k].b - other.samples[k].b);
        report.margins.push_back({p, margin});
        if (first || margin < report.worst_margin) {
            report.worst_margin = margin;
            report.worst_allocation = p;
            first = false;
        }
    }
    report.pass = report.worst_margin >= -1e-6 * scn.b0_strength;
    return report;
}

}  // namespace ncw::verification
