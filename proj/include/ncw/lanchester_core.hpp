// Core domain types and closed-form quantities for the NCW-type nonlinear
// Lanchester model: a Blue force B fights a Red force R whose per-trooper
// attrition against Blue is boosted by n supply agents A^1..A^n.  Within one
// stage (constant fire allocation) the system is
//
//   dB/dt = -(sum_i f_i(A^i) + delta) * R      f_i(a) = alpha_d + (alpha_c - alpha_d) * a / a0
//   dR/dt = -p0 * r_R * B
//   dA^i/dt = -p_i * r_i * B
//   dX/dt = B                                  X = accumulated Blue exposure
//
// where delta is the constant attrition offset folded in from eliminated
// agents.  This header owns the types plus the stage-level closed forms:
// threatening rates (the argmax of which picks the stage target) and the
// energy coefficients of B(X)^2 = -(2/3)c1 X^3 + c2 X^2 - 2 c3 X + c4.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ncw::core {

// ---------------------------------------------------------------------------
// Entity identities (used by events, stage targets, and reports)
// ---------------------------------------------------------------------------

struct EntityId {
    enum class Kind { blue, red, agent };

    Kind kind = Kind::red;
    int index = 0;  // 1-based agent index; 0 for blue/red

    static EntityId blue() { return {Kind::blue, 0}; }
    static EntityId red() { return {Kind::red, 0}; }
    static EntityId agent(int i) { return {Kind::agent, i}; }

    friend bool operator==(const EntityId& a, const EntityId& b) {
        return a.kind == b.kind && a.index == b.index;
    }
    friend bool operator!=(const EntityId& a, const EntityId& b) { return !(a == b); }
};

inline std::string to_string(const EntityId& e) {
    switch (e.kind) {
        case EntityId::Kind::blue: return "Blue";
        case EntityId::Kind::red: return "Red";
        case EntityId::Kind::agent: return "A" + std::to_string(e.index);
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Scenario parameterization
// ---------------------------------------------------------------------------

// One supply agent: its attrition-boost range [alpha_d, alpha_c], initial
// strength a0, and the rate r at which Blue fire attrits it.
struct AgentSpec {
    double alpha_d = 0.0;  // disconnected attrition rate (agent at strength 0)
    double alpha_c = 0.0;  // fully connected attrition rate (agent at full strength)
    double a0 = 0.0;       // initial agent strength, > 0
    double r = 0.0;        // Blue-to-agent attrition rate, >= 0

    // Throws std::invalid_argument naming the offending field; `path` is the
    // caller's field prefix, e.g. "agents[1]" (agent indices are 1-based).
    void validate(const std::string& path) const {
        if (!(std::isfinite(alpha_d) && std::isfinite(alpha_c) && std::isfinite(a0) &&
              std::isfinite(r)))
            throw std::invalid_argument(path + ": all fields must be finite");
        if (alpha_d < 0.0) throw std::invalid_argument(path + ".alpha_d must be >= 0");
        if (alpha_c < alpha_d) throw std::invalid_argument(path + ".alpha_c < alpha_d");
        if (!(a0 > 0.0)) throw std::invalid_argument(path + ".a0 must be > 0");
        if (r < 0.0) throw std::invalid_argument(path + ".r must be >= 0");
    }
};

// Full battle parameterization.  Agent order is identity: agents[i-1] is A^i
// (1-based in prose and diagnostics, stable in storage).
struct Scenario {
    double b0_strength = 0.0;  // initial Blue troops, > 0
    double r0_strength = 0.0;  // initial Red troops, > 0
    double r_R = 0.0;          // Blue-to-Red attrition rate, > 0
    std::vector<AgentSpec> agents;

    std::size_t n_agents() const { return agents.size(); }

    void validate() const {
        if (!(std::isfinite(b0_strength) && b0_strength > 0.0))
            throw std::invalid_argument("b0_strength must be > 0");
        if (!(std::isfinite(r0_strength) && r0_strength > 0.0))
            throw std::invalid_argument("r0_strength must be > 0");
        if (!(std::isfinite(r_R) && r_R > 0.0))
            throw std::invalid_argument("r_R must be > 0");
        for (std::size_t i = 0; i < agents.size(); ++i)
            agents[i].validate("agents[" + std::to_string(i + 1) + "]");
    }
};

// A Scenario plus the set of eliminated agents and the folded constant
// attrition offset delta = sum of alpha_d over eliminated agents.  delta is
// recomputed from scratch (ascending agent index) on every fold so that it is
// exactly that sum regardless of elimination order.
class EffectiveScenario {
  public:
    explicit EffectiveScenario(Scenario base) : base_(std::move(base)) { base_.validate(); }

    const Scenario& base() const { return base_; }
    const std::set<int>& eliminated() const { return eliminated_; }
    double delta() const { return delta_; }

    bool is_eliminated(int agent_index) const { return eliminated_.count(agent_index) != 0; }
    std::size_t n_agents() const { return base_.n_agents(); }

    // Marks agent j (1-based) eliminated and folds its alpha_d into delta.
    // Double elimination and out-of-range indices are rejected.
    void eliminate(int j) {
        if (j < 1 || static_cast<std::size_t>(j) > base_.n_agents())
            throw std::invalid_argument("eliminate: agent index " + std::to_string(j) +
                                        " out of range");
        if (!eliminated_.insert(j).second)
            throw std::invalid_argument("eliminate: agent " + std::to_string(j) +
                                        " already eliminated");
        double d = 0.0;  // std::set iterates ascending, so this sum is canonical
        for (int i : eliminated_) d += base_.agents[static_cast<std::size_t>(i) - 1].alpha_d;
        delta_ = d;
    }

  private:
    Scenario base_;
    std::set<int> eliminated_;  // 1-based agent indices
    double delta_ = 0.0;
};

// ---------------------------------------------------------------------------
// Stage-level value types
// ---------------------------------------------------------------------------

// Instantaneous battle state.  `x` is the accumulated Blue exposure
// X = integral of B since the *stage* start (campaigns reset it per stage).
struct ForceState {
    double t = 0.0;
    double b = 0.0;
    double r = 0.0;
    std::vector<double> a;  // a[i-1] is the strength of A^i
    double x = 0.0;
};

// Blue's fire-proportion vector (p[0] toward Red, p[i] toward A^i), constant
// within a stage.  Construction rejects vectors farther than 1e-9 from the
// simplex and then normalizes exactly, so downstream code can rely on sum 1.
class Allocation {
  public:
    explicit Allocation(std::vector<double> p) : p_(std::move(p)) {
        if (p_.empty()) throw std::invalid_argument("allocation must have at least one entry");
        std::size_t top = 0;
        for (std::size_t j = 0; j < p_.size(); ++j) {
            if (!std::isfinite(p_[j]) || p_[j] < 0.0)
                throw std::invalid_argument("allocation[" + std::to_string(j) +
                                            "] must be finite and >= 0");
            if (p_[j] > p_[top]) top = j;
        }
        // Sum with the largest entry added last, and normalize by pinning that
        // entry to the exact complement of the rest.  Plain division by the sum
        // is not a fixed point (it can oscillate by one ulp per pass), whereas
        // this form re-sums to exactly 1.0, so constructing from already
        // normalized components -- e.g. after a serialize/parse cycle -- leaves
        // them bitwise untouched.
        double rest = 0.0;
        for (std::size_t j = 0; j < p_.size(); ++j)
            if (j != top) rest += p_[j];
        const double sum = rest + p_[top];
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("allocation must sum to 1 within 1e-9 (got sum " +
                                        std::to_string(sum) + ")");
        if (sum != 1.0) {
            for (double& v : p_) v /= sum;
            double scaled_rest = 0.0;
            for (std::size_t j = 0; j < p_.size(); ++j)
                if (j != top) scaled_rest += p_[j];
            p_[top] = 1.0 - scaled_rest;
        }
    }

    // The simplex vertex e_j of the given arity (index 0 targets Red).
    static Allocation vertex(std::size_t arity, std::size_t j) {
        if (j >= arity) throw std::invalid_argument("vertex index out of range");
        std::vector<double> p(arity, 0.0);
        p[j] = 1.0;
        return Allocation(std::move(p));
    }

    const std::vector<double>& p() const { return p_; }
    double operator[](std::size_t j) const { return p_[j]; }
    std::size_t arity() const { return p_.size(); }  // n+1

    friend bool operator==(const Allocation& a, const Allocation& b) { return a.p_ == b.p_; }

  private:
    std::vector<double> p_;
};

// Threatening rates (b[0] for Red, b[i] for A^i).  The argmax entry names the
// stage target; eliminated agents carry rate 0 so the argmax is total.
struct ThreatRates {
    std::vector<double> b;

    std::size_t arity() const { return b.size(); }
};

// Coefficients of the within-stage energy relation
//   B(X)^2 = -(2/3) c1 X^3 + c2 X^2 - 2 c3 X + c4,
// the closed form that both the planner's reasoning and the conservation
// oracle are built on.
struct EnergyCoefficients {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;

    double blue_squared(double x) const {
        return ((-(2.0 / 3.0) * c1 * x + c2) * x - 2.0 * c3) * x + c4;
    }
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// f_i(a): the agent's contribution to Red's per-trooper attrition, affine from
// alpha_d (agent destroyed) to alpha_c (agent at full strength).  Rejects
// strengths outside the model domain [0, a0].
inline double complementing_attrition(const AgentSpec& agent, double a) {
    if (!(a >= 0.0 && a <= agent.a0))
        throw std::domain_error("complementing_attrition: strength " + std::to_string(a) +
                                " outside [0, " + std::to_string(agent.a0) + "]");
    return agent.alpha_d + (agent.alpha_c - agent.alpha_d) * a / agent.a0;
}

// The fresh (t = 0, X = 0) battle state of an effective scenario; eliminated
// agents enter at strength exactly 0.
inline ForceState initial_state(const EffectiveScenario& eff) {
    ForceState s;
    s.t = 0.0;
    s.b = eff.base().b0_strength;
    s.r = eff.base().r0_strength;
    s.a.resize(eff.n_agents());
    for (std::size_t i = 0; i < eff.n_agents(); ++i)
        s.a[i] = eff.is_eliminated(static_cast<int>(i) + 1) ? 0.0 : eff.base().agents[i].a0;
    s.x = 0.0;
    return s;
}

// Threatening rates from the scenario's *initial* strengths:
//   b0 = (sum of alpha_c over remaining agents + delta) * r_R
//   b_i = r_i * (alpha_c^i - alpha_d^i) * R0 / A0^i     (0 if eliminated)
// b0 measures what Red costs Blue per unit exposure; b_i measures how fast
// agent i's boost can be taken away per unit exposure.
inline ThreatRates threat_rates(const EffectiveScenario& eff) {
    const Scenario& scn = eff.base();
    ThreatRates rates;
    rates.b.assign(scn.n_agents() + 1, 0.0);
    double sum_alpha_c = 0.0;
    for (std::size_t i = 0; i < scn.n_agents(); ++i) {
        const AgentSpec& ag = scn.agents[i];
        if (eff.is_eliminated(static_cast<int>(i) + 1)) continue;  // rate stays 0
        sum_alpha_c += ag.alpha_c;
        rates.b[i + 1] = ag.r * (ag.alpha_c - ag.alpha_d) * scn.r0_strength / ag.a0;
    }
    rates.b[0] = (sum_alpha_c + eff.delta()) * scn.r_R;
    return rates;
}

// Value-returning fold: eff with agent j eliminated and its alpha_d added to
// delta.  The base Scenario is never mutated; remaining agents' effective
// rate pair becomes (alpha_d + delta, alpha_c + delta) in presentation terms
// without changing alpha_c - alpha_d.
inline EffectiveScenario fold_eliminated(const EffectiveScenario& eff, int j) {
    EffectiveScenario out = eff;
    out.eliminate(j);
    return out;
}

// Energy coefficients of one stage starting at `start` (which must sit on a
// stage boundary: start.x == 0).  R0 / A0^i in the closed-form derivation are
// the *stage-start* strengths; for the first stage these coincide with the
// scenario's initial values, and entities that have not been fired upon keep
// them across stages.
inline EnergyCoefficients energy_coefficients(const EffectiveScenario& eff, const Allocation& p,
                                              const ForceState& start) {
    const Scenario& scn = eff.base();
    if (p.arity() != scn.n_agents() + 1)
        throw std::invalid_argument("energy_coefficients: allocation arity mismatch");
    if (start.a.size() != scn.n_agents())
        throw std::invalid_argument("energy_coefficients: state arity mismatch");
    if (start.x != 0.0)
        throw std::invalid_argument("energy_coefficients: start.x must be 0 (stage boundary)");
    if (!(start.b >= 0.0) || !(start.r >= 0.0))
        throw std::invalid_argument("energy_coefficients: negative strength");

    EnergyCoefficients c;
    const double R = start.r;
    double sum_alpha_c = 0.0;
    for (std::size_t i = 0; i < scn.n_agents(); ++i) {
        if (eff.is_eliminated(static_cast<int>(i) + 1)) continue;
        const AgentSpec& ag = scn.agents[i];
        const double Ai = start.a[i];
        if (!(Ai > 0.0))
            throw std::invalid_argument("energy_coefficients: agents[" + std::to_string(i + 1) +
                                        "] strength must be > 0 at stage start");
        const double d = ag.alpha_c - ag.alpha_d;
        c.c1 += p[0] * p[i + 1] * scn.r_R * ag.r * d / Ai;
        c.c2 += p[i + 1] * ag.r * d * R / Ai;
        sum_alpha_c += ag.alpha_c;
    }
    c.c2 += p[0] * scn.r_R * (sum_alpha_c + eff.delta());
    c.c3 = R * (sum_alpha_c + eff.delta());
    c.c4 = start.b * start.b;
    return c;
}

}  // namespace ncw::core
