#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "ncw/ncw.hpp"
#include "support.hpp"

using namespace ncw;

namespace {

void require_rates(const core::ThreatRates& got, const std::vector<double>& want,
                   double tol = 1e-12) {
    REQUIRE(got.b.size() == want.size());
    for (std::size_t j = 0; j < want.size(); ++j) {
        INFO("rate index " << j);
        REQUIRE(std::abs(got.b[j] - want[j]) <= tol);
    }
}

}  // namespace

TEST_CASE("entity ids format and compare") {
    REQUIRE(core::to_string(core::EntityId::blue()) == "Blue");
    REQUIRE(core::to_string(core::EntityId::red()) == "Red");
    REQUIRE(core::to_string(core::EntityId::agent(2)) == "A2");
    REQUIRE(core::EntityId::red() == core::EntityId::red());
    REQUIRE(core::EntityId::agent(1) != core::EntityId::agent(2));
    REQUIRE(core::EntityId::red() != core::EntityId::agent(1));
}

TEST_CASE("complementing attrition is affine in agent strength") {
    const core::AgentSpec ag = support::agent1(0.3);  // alpha_d 0.15, alpha_c 0.4, a0 30
    REQUIRE(core::complementing_attrition(ag, 0.0) == 0.15);
    REQUIRE(core::complementing_attrition(ag, 30.0) == 0.4);
    REQUIRE(std::abs(core::complementing_attrition(ag, 15.0) - 0.275) < 1e-15);
    // Affinity: midpoint value equals mean of endpoint values.
    const double mid = core::complementing_attrition(ag, 7.5);
    REQUIRE(std::abs(mid - 0.5 * (0.15 + core::complementing_attrition(ag, 15.0))) < 1e-15);
    REQUIRE_THROWS_AS(core::complementing_attrition(ag, -0.01), std::domain_error);
    REQUIRE_THROWS_AS(core::complementing_attrition(ag, 30.01), std::domain_error);
}

TEST_CASE("threat rates match hand-computed catalog values") {
    // b0 = (sum alpha_c + delta) * r_R, b_i = r_i (alpha_c - alpha_d) R0 / A0_i.
    require_rates(core::threat_rates(core::EffectiveScenario(support::exp1_scenario())),
                  {0.35, 0.3, 0.24});
    require_rates(core::threat_rates(core::EffectiveScenario(support::exp2_scenario())),
                  {0.35, 0.15, 0.48});
    require_rates(core::threat_rates(core::EffectiveScenario(support::exp3_scenario())),
                  {0.35, 0.3, 0.48});
}

TEST_CASE("folding an eliminated agent reroutes its disconnected fire") {
    SECTION("experiment 2, agent 2 folded") {
        const core::EffectiveScenario eff =
            core::fold_eliminated(core::EffectiveScenario(support::exp2_scenario()), 2);
        REQUIRE(eff.delta() == 0.1);
        REQUIRE(eff.is_eliminated(2));
        require_rates(core::threat_rates(eff), {0.25, 0.15, 0.0});
    }
    SECTION("experiment 3, agent 2 folded") {
        const core::EffectiveScenario eff =
            core::fold_eliminated(core::EffectiveScenario(support::exp3_scenario()), 2);
        require_rates(core::threat_rates(eff), {0.25, 0.3, 0.0});
    }
    SECTION("experiment 1, agent 1 folded") {
        const core::EffectiveScenario eff =
            core::fold_eliminated(core::EffectiveScenario(support::exp1_scenario()), 1);
        REQUIRE(eff.delta() == 0.15);
        require_rates(core::threat_rates(eff), {0.225, 0.0, 0.24});
    }
    SECTION("order of elimination does not change delta") {
        core::EffectiveScenario a(support::exp3_scenario());
        a.eliminate(1);
        a.eliminate(2);
        core::EffectiveScenario b(support::exp3_scenario());
        b.eliminate(2);
        b.eliminate(1);
        REQUIRE(a.delta() == b.delta());
        REQUIRE(a.delta() == 0.25);
        // Everything folded: only suppressed fire threatens Blue.
        require_rates(core::threat_rates(a), {0.125, 0.0, 0.0});
    }
}

TEST_CASE("effective scenario rejects bad folds") {
    core::EffectiveScenario eff(support::exp1_scenario());
    REQUIRE_THROWS_AS(eff.eliminate(0), std::invalid_argument);
    REQUIRE_THROWS_AS(eff.eliminate(3), std::invalid_argument);
    eff.eliminate(2);
    REQUIRE_THROWS_AS(eff.eliminate(2), std::invalid_argument);
}

TEST_CASE("energy coefficients reproduce hand-worked stages") {
    const double tol = 1e-12;
    SECTION("experiment 1, all fire at Red") {
        const core::EffectiveScenario eff(support::exp1_scenario());
        const core::EnergyCoefficients c = core::energy_coefficients(
            eff, core::Allocation::vertex(3, 0), core::initial_state(eff));
        REQUIRE(c.c1 == 0.0);
        REQUIRE(std::abs(c.c2 - 0.35) <= tol);
        REQUIRE(std::abs(c.c3 - 84.0) <= tol);
        REQUIRE(c.c4 == 25600.0);
    }
    SECTION("experiment 2, all fire at agent 2") {
        const core::EffectiveScenario eff(support::exp2_scenario());
        const core::EnergyCoefficients c = core::energy_coefficients(
            eff, core::Allocation::vertex(3, 2), core::initial_state(eff));
        REQUIRE(c.c1 == 0.0);
        REQUIRE(std::abs(c.c2 - 0.48) <= tol);
        REQUIRE(std::abs(c.c3 - 84.0) <= tol);
        REQUIRE(c.c4 == 25600.0);
    }
    SECTION("experiment 3 second stage starts from the stage-entry state") {
        core::EffectiveScenario eff(support::exp3_scenario());
        eff.eliminate(2);
        core::ForceState start;
        start.t = 0.2631192520656666;
        start.b = std::sqrt(32800.0);
        start.r = 120.0;
        start.a = {30.0, 0.0};
        start.x = 0.0;  // exposure clock restarts each stage
        const core::EnergyCoefficients c =
            core::energy_coefficients(eff, core::Allocation::vertex(3, 1), start);
        REQUIRE(c.c1 == 0.0);
        REQUIRE(std::abs(c.c2 - 0.3) <= tol);
        REQUIRE(std::abs(c.c3 - 60.0) <= tol);
        REQUIRE(std::abs(c.c4 - 32800.0) <= 32800.0 * 1e-15);
    }
    SECTION("mixed allocation turns on the cubic term") {
        const core::EffectiveScenario eff(support::exp1_scenario());
        const core::EnergyCoefficients c = core::energy_coefficients(
            eff, core::Allocation({0.7, 0.2, 0.1}), core::initial_state(eff));
        REQUIRE(std::abs(c.c1 - 0.000245) <= 1e-15);
        REQUIRE(std::abs(c.c2 - 0.329) <= tol);
        REQUIRE(std::abs(c.c3 - 84.0) <= tol);
    }
}

TEST_CASE("vertex allocations zero the cubic coefficient exactly") {
    support::Rng rng(7101);
    for (int trial = 0; trial < 25; ++trial) {
        const core::Scenario scn = support::random_scenario(rng);
        const core::EffectiveScenario eff(scn);
        const core::ForceState start = core::initial_state(eff);
        for (std::size_t j = 0; j <= scn.n_agents(); ++j) {
            const core::EnergyCoefficients c = core::energy_coefficients(
                eff, core::Allocation::vertex(scn.n_agents() + 1, j), start);
            REQUIRE(c.c1 == 0.0);  // p0 * p_i vanishes at every vertex
            REQUIRE(c.c4 == scn.b0_strength * scn.b0_strength);
        }
    }
}

TEST_CASE("quadratic coefficient equals the threat-rate linear form") {
    // At the initial state c2 == sum_j b_j p_j; this ties the energy relation
    // to the targeting rule and must hold to near round-off.
    support::Rng rng(20260815);
    for (int trial = 0; trial < 100; ++trial) {
        core::EffectiveScenario eff(support::random_scenario(rng));
        if (trial % 3 == 0 && eff.n_agents() > 1) eff.eliminate(1);  // also post-fold
        const core::ThreatRates rates = core::threat_rates(eff);
        const core::Allocation p = support::random_allocation(rng, eff.n_agents() + 1);
        const core::EnergyCoefficients c =
            core::energy_coefficients(eff, p, core::initial_state(eff));
        double form = 0.0;
        for (std::size_t j = 0; j < rates.arity(); ++j) form += rates.b[j] * p[j];
        REQUIRE(std::abs(c.c2 - form) <= 1e-12 * std::max(1.0, std::abs(c.c2)));
    }
}

TEST_CASE("energy relation evaluates as a polynomial in exposure") {
    core::EnergyCoefficients c{0.0, 0.48, 84.0, 25600.0};
    // Q(X) = c2 X^2 - 2 c3 X + c4 at the stage-ending exposure X = 50.
    REQUIRE(std::abs(c.blue_squared(50.0) - 18400.0) <= 1e-9);
    REQUIRE(c.blue_squared(0.0) == 25600.0);
    c.c1 = 0.000245;  // cubic term: -(2/3) c1 X^3
    const double x = 100.0;
    const double want = -(2.0 / 3.0) * 0.000245 * x * x * x + 0.48 * x * x - 168.0 * x + 25600.0;
    REQUIRE(std::abs(c.blue_squared(x) - want) <= 1e-9);
}

TEST_CASE("initial state respects eliminations") {
    core::EffectiveScenario eff(support::exp1_scenario());
    eff.eliminate(2);
    const core::ForceState s = core::initial_state(eff);
    REQUIRE(s.t == 0.0);
    REQUIRE(s.b == 160.0);
    REQUIRE(s.r == 120.0);
    REQUIRE(s.a == std::vector<double>{30.0, 0.0});
    REQUIRE(s.x == 0.0);
}

TEST_CASE("allocation construction enforces the simplex") {
    REQUIRE_THROWS_AS(core::Allocation(std::vector<double>{}), std::invalid_argument);
    REQUIRE_THROWS_AS(core::Allocation({0.5, -0.1, 0.6}), std::invalid_argument);
    REQUIRE_THROWS_AS(core::Allocation({0.5, 0.4}), std::invalid_argument);  // sum 0.9
    REQUIRE_THROWS_AS(core::Allocation({0.5, std::nan("")}), std::invalid_argument);

    // A sum within 1e-9 of 1 is accepted and renormalized to exactly 1.
    const core::Allocation near(std::vector<double>{0.5, 0.5 + 4e-10});
    double sum = 0.0;
    for (double v : near.p()) sum += v;
    REQUIRE(sum == 1.0);

    // Normalization is a bitwise fixed point: feeding a constructed
    // allocation's own components back in changes nothing, so values survive
    // any number of serialize/parse cycles.
    REQUIRE(core::Allocation(near.p()) == near);
    const core::Allocation classic(std::vector<double>{0.7, 0.2, 0.1});
    REQUIRE(classic.p() == std::vector<double>{0.7, 0.2, 0.1});
    REQUIRE(core::Allocation(classic.p()) == classic);

    const core::Allocation v = core::Allocation::vertex(3, 1);
    REQUIRE(v.p() == std::vector<double>{0.0, 1.0, 0.0});
    REQUIRE(v == core::Allocation({0.0, 1.0, 0.0}));
    REQUIRE(v.arity() == 3);
    REQUIRE(v[1] == 1.0);
    REQUIRE_THROWS_AS(core::Allocation::vertex(3, 3), std::invalid_argument);
}

TEST_CASE("scenario validation names the offending field") {
    core::Scenario scn = support::exp1_scenario();
    scn.agents[0].alpha_c = 0.1;  // below alpha_d = 0.15
    REQUIRE_THROWS_WITH(scn.validate(), Catch::Matchers::ContainsSubstring(
                                            "agents[1].alpha_c < alpha_d"));

    scn = support::exp1_scenario();
    scn.agents[1].a0 = 0.0;
    REQUIRE_THROWS_WITH(scn.validate(),
                        Catch::Matchers::ContainsSubstring("agents[2].a0"));

    scn = support::exp1_scenario();
    scn.r_R = 0.0;
    REQUIRE_THROWS_WITH(scn.validate(), Catch::Matchers::ContainsSubstring("r_R"));

    scn = support::exp1_scenario();
    scn.b0_strength = -5.0;
    REQUIRE_THROWS_WITH(scn.validate(), Catch::Matchers::ContainsSubstring("b0_strength"));
}

TEST_CASE("energy coefficient preconditions") {
    const core::EffectiveScenario eff(support::exp1_scenario());
    const core::ForceState start = core::initial_state(eff);

    REQUIRE_THROWS_AS(core::energy_coefficients(eff, core::Allocation({1.0, 0.0}), start),
                      std::invalid_argument);  // arity 2 vs agents 2

    core::ForceState moved = start;
    moved.x = 1.0;
    REQUIRE_THROWS_AS(core::energy_coefficients(eff, core::Allocation::vertex(3, 0), moved),
                      std::invalid_argument);

    core::ForceState dead = start;
    dead.a[0] = 0.0;  // remaining agent with zero strength: rate basis undefined
    REQUIRE_THROWS_AS(core::energy_coefficients(eff, core::Allocation::vertex(3, 0), dead),
                      std::invalid_argument);
}
