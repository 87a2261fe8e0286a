// Stage planning: the argmax-of-threatening-rates allocation rule, the
// multi-stage campaign loop (recompute rates -> pick vertex -> integrate ->
// fold the eliminated agent -> repeat), policy playback for comparison runs,
// and the constant-coefficient square-law endgame closed form.

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ncw/dynamics.hpp"
#include "ncw/lanchester_core.hpp"

namespace ncw::strategy {

enum class Outcome { blue_wins, blue_annihilated, stalemate };

inline std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::blue_wins: return "BlueWins";
        case Outcome::blue_annihilated: return "BlueAnnihilated";
        case Outcome::stalemate: return "Stalemate";
    }
    return "?";
}

// One stage's decision record.  `target` is set when the allocation came from
// the argmax rule (it is then the indicator vertex of that entity); policy
// playback leaves it empty since an arbitrary allocation names no entity.
struct StagePlan {
    std::optional<core::EntityId> target;
    core::Allocation allocation;
    core::ThreatRates rates;  // threatening rates at stage start
};

struct StageRecord {
    StagePlan plan;
    dynamics::Trajectory trajectory;
};

struct CampaignResult {
    std::vector<StageRecord> stages;
    Outcome outcome = Outcome::stalemate;
    core::ForceState final_state;
};

// The argmax vertex rule: target the entity with the largest threatening
// rate.  Ties break toward Red (index 0), then the lowest agent index --
// at a tie every maximizer is optimal, and hitting Red can end the battle
// outright.  Eliminated agents are never selected (their rate is 0; if all
// rates are 0 the tie-break yields Red, which is always selectable).
inline StagePlan optimal_allocation(const core::ThreatRates& rates,
                                    const std::set<int>& eliminated) {
    if (rates.b.empty()) throw std::invalid_argument("optimal_allocation: empty rates");
    std::size_t best = 0;
    for (std::size_t j = 1; j < rates.b.size(); ++j) {
        if (eliminated.count(static_cast<int>(j)) != 0) continue;
        if (rates.b[j] > rates.b[best]) best = j;
    }
    StagePlan plan{best == 0 ? core::EntityId::red() : core::EntityId::agent(static_cast<int>(best)),
                   core::Allocation::vertex(rates.b.size(), best), rates};
    return plan;
}

// Constant-coefficient endgame (all agents eliminated, full fire on Red):
//   dB/dt = -delta R,  dR/dt = -r_R B   conserves   r_R B^2 - delta R^2.
// Blue wins iff r_R b^2 > delta r^2, ending at sqrt(b^2 - (delta/r_R) r^2);
// exact balance grinds both sides to zero (stalemate).
struct SquareLawResult {
    Outcome outcome = Outcome::stalemate;
    double final_blue = 0.0;
};

inline SquareLawResult square_law_final(double b, double r, double r_R, double delta) {
    if (!(std::isfinite(b) && b >= 0.0) || !(std::isfinite(r) && r >= 0.0))
        throw std::invalid_argument("square_law_final: strengths must be finite and >= 0");
    if (!(std::isfinite(r_R) && r_R > 0.0))
        throw std::invalid_argument("square_law_final: r_R must be > 0");
    if (!(std::isfinite(delta) && delta >= 0.0))
        throw std::invalid_argument("square_law_final: delta must be >= 0");
    const double lhs = r_R * b * b, rhs = delta * r * r;
    if (lhs > rhs) return {Outcome::blue_wins, std::sqrt(b * b - (delta / r_R) * r * r)};
    if (lhs < rhs) return {Outcome::blue_annihilated, 0.0};
    return {Outcome::stalemate, 0.0};
}

namespace detail {

// Shared staging loop.  `choose` maps (stage index, rates, eliminated set) to
// the stage's plan; the loop integrates, classifies the ending event, folds
// eliminated agents, and carries the end state (exposure reset) into the next
// stage.  Red's elimination ends the battle even if an agent falls at the
// same instant; Blue and Red falling together is a stalemate.
template <typename Choose>
CampaignResult run_campaign(const core::Scenario& scn, const dynamics::IntegratorConfig& cfg,
                            Choose&& choose) {
    scn.validate();
    cfg.validate();
    core::EffectiveScenario eff(scn);
    core::ForceState state = core::initial_state(eff);

    CampaignResult result;
    const std::size_t max_stages = scn.n_agents() + 1;  // each non-final stage folds an agent
    for (std::size_t stage = 0; stage < max_stages; ++stage) {
        const core::ThreatRates rates = core::threat_rates(eff);
        StagePlan plan = choose(stage, rates, eff.eliminated());
        dynamics::Trajectory traj =
            dynamics::integrate_stage(eff, plan.allocation, state, cfg);

        const core::ForceState end_state =
            traj.samples.empty() ? state : traj.samples.back();
        result.stages.push_back({std::move(plan), std::move(traj)});
        const std::vector<dynamics::Event>& events =
            result.stages.back().trajectory.events;

        bool blue_down = false, red_down = false;
        std::vector<int> agents_down;
        for (const dynamics::Event& e : events) {
            switch (e.entity.kind) {
                case core::EntityId::Kind::blue: blue_down = true; break;
                case core::EntityId::Kind::red: red_down = true; break;
                case core::EntityId::Kind::agent: agents_down.push_back(e.entity.index); break;
            }
        }

        result.final_state = end_state;
        if (events.empty()) {  // horizon reached
            result.outcome = Outcome::stalemate;
            return result;
        }
        if (blue_down && red_down) {
            result.outcome = Outcome::stalemate;
            return result;
        }
        if (blue_down) {
            result.outcome = Outcome::blue_annihilated;
            return result;
        }
        if (red_down) {
            result.outcome = Outcome::blue_wins;
            return result;
        }
        for (int j : agents_down) eff.eliminate(j);  // ascending event order
        state = end_state;
        state.x = 0.0;  // exposure is per-stage
    }
    // Unreachable for well-formed inputs: after n folds only Blue/Red remain,
    // so the (n+1)-th stage must end the battle or hit the horizon.
    result.outcome = Outcome::stalemate;
    return result;
}

}  // namespace detail

// Plans and fights the whole campaign with the argmax rule, recomputing
// threatening rates at every stage boundary.
inline CampaignResult plan_campaign(const core::Scenario& scn,
                                    const dynamics::IntegratorConfig& cfg) {
    return detail::run_campaign(
        scn, cfg, [](std::size_t, const core::ThreatRates& rates, const std::set<int>& elim) {
            return optimal_allocation(rates, elim);
        });
}

// Replays a fixed allocation sequence through the same staging loop; the last
// allocation is reused if the battle outlives the list.  Stage rates are
// still recorded for inspection, but never drive the choice.
inline CampaignResult simulate_policy(const core::Scenario& scn,
                                      const std::vector<core::Allocation>& policy,
                                      const dynamics::IntegratorConfig& cfg) {
    if (policy.empty()) throw std::invalid_argument("simulate_policy: policy must be non-empty");
    for (const core::Allocation& p : policy)
        if (p.arity() != scn.n_agents() + 1)
            throw std::invalid_argument("simulate_policy: allocation arity mismatch");
    return detail::run_campaign(
        scn, cfg, [&](std::size_t stage, const core::ThreatRates& rates, const std::set<int>&) {
            const core::Allocation& p = policy[std::min(stage, policy.size() - 1)];
            return StagePlan{std::nullopt, p, rates};
        });
}

}  // namespace ncw::strategy
