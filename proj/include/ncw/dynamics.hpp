// Stage dynamics: classical fixed-step 4th-order integration of the battle
// ODEs with elimination-event detection, plus closed-form oracles derived
// from the energy relation B(X)^2 = -(2/3)c1 X^3 + c2 X^2 - 2 c3 X + c4:
// a conservation residual, exposure-at-elimination, the smallest positive
// root of B(X)^2 (Blue annihilation), and an adaptive-quadrature stage clock
//   t(x_end) = integral_0^{x_end} dX / B(X).
//
// Everything here is deterministic: fixed step, index-based sample times,
// fixed-iteration bisection for events, and a fixed-rule adaptive quadrature.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ncw/lanchester_core.hpp"

namespace ncw::dynamics {

struct IntegratorConfig {
    double dt = 1e-3;        // fixed step size (time units)
    double event_tol = 1e-9; // time tolerance for grouping simultaneous eliminations
    double t_max = 100.0;    // hard horizon

    void validate() const {
        if (!(std::isfinite(dt) && dt > 0.0))
            throw std::invalid_argument("IntegratorConfig.dt must be > 0");
        if (!(std::isfinite(event_tol) && event_tol > 0.0))
            throw std::invalid_argument("IntegratorConfig.event_tol must be > 0");
        if (!(std::isfinite(t_max) && t_max > 0.0))
            throw std::invalid_argument("IntegratorConfig.t_max must be > 0");
    }
};

// Time derivative of (b, r, a, x) at one state.
struct Derivative {
    double db = 0.0;
    double dr = 0.0;
    std::vector<double> da;
    double dx = 0.0;
};

struct Event {
    double t = 0.0;
    core::EntityId entity;
};

// Diagnostic: the instantaneous threatening-rate argmax moved from one entity
// to another mid-stage (the stage allocation stays fixed regardless).
struct RateCrossing {
    double t = 0.0;
    core::EntityId from;
    core::EntityId to;
};

struct Trajectory {
    std::vector<core::ForceState> samples;  // uniform grid plus the event point
    std::vector<Event> events;              // eliminations that ended the stage
    core::Allocation stage_allocation;
    std::vector<RateCrossing> rate_crossings;  // inspection only; never acted on
    bool horizon_reached = false;              // t_max hit without an event

    std::optional<double> first_event_time() const {
        if (events.empty()) return std::nullopt;
        return events.front().t;
    }
};

namespace detail {

// Flattened stage system over y = [b, r, a_1..a_n, x].  The complementing
// attrition is evaluated by its affine formula without clamping so the vector
// field extends smoothly past zero crossings (needed by the event bisection);
// eliminated agents contribute only through the folded delta and stay frozen.
struct StageSystem {
    double r_R = 0.0;
    double p0 = 0.0;
    double delta = 0.0;
    std::vector<double> alpha_d;    // remaining agents: alpha_d, else 0
    std::vector<double> slope;      // remaining agents: (alpha_c - alpha_d)/a0, else 0
    std::vector<double> fire;       // p_i * r_i, 0 for eliminated agents
    std::vector<char> remaining;    // 1 if agent participates
    std::size_t n = 0;

    StageSystem(const core::EffectiveScenario& eff, const core::Allocation& p) {
        const core::Scenario& scn = eff.base();
        n = scn.n_agents();
        if (p.arity() != n + 1)
            throw std::invalid_argument("allocation arity mismatch: expected " +
                                        std::to_string(n + 1) + ", got " +
                                        std::to_string(p.arity()));
        r_R = scn.r_R;
        p0 = p[0];
        delta = eff.delta();
        alpha_d.assign(n, 0.0);
        slope.assign(n, 0.0);
        fire.assign(n, 0.0);
        remaining.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (eff.is_eliminated(static_cast<int>(i) + 1)) continue;
            const core::AgentSpec& ag = scn.agents[i];
            remaining[i] = 1;
            alpha_d[i] = ag.alpha_d;
            slope[i] = (ag.alpha_c - ag.alpha_d) / ag.a0;
            fire[i] = p[i + 1] * ag.r;
        }
    }

    void derive(const std::vector<double>& y, std::vector<double>& dy) const {
        const double b = y[0], r = y[1];
        double f_total = delta;
        for (std::size_t i = 0; i < n; ++i)
            if (remaining[i]) f_total += alpha_d[i] + slope[i] * y[2 + i];
        dy[0] = -f_total * r;
        dy[1] = -p0 * r_R * b;
        for (std::size_t i = 0; i < n; ++i) dy[2 + i] = remaining[i] ? -fire[i] * b : 0.0;
        dy[2 + n] = b;
    }

    // One classical RK4 step of size h from y into out (out may alias scratch
    // but not y).
    void rk4(const std::vector<double>& y, double h, std::vector<double>& out,
             std::vector<double>& k1, std::vector<double>& k2, std::vector<double>& k3,
             std::vector<double>& k4, std::vector<double>& tmp) const {
        const std::size_t m = y.size();
        derive(y, k1);
        for (std::size_t j = 0; j < m; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
        derive(tmp, k2);
        for (std::size_t j = 0; j < m; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
        derive(tmp, k3);
        for (std::size_t j = 0; j < m; ++j) tmp[j] = y[j] + h * k3[j];
        derive(tmp, k4);
        for (std::size_t j = 0; j < m; ++j)
            out[j] = y[j] + (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
};

// --- Gauss-Kronrod 7/15 pair on [-1, 1] ------------------------------------
// Abscissae/weights of the classic embedded rule; the 7-point Gauss nodes are
// xgk[1], xgk[3], xgk[5], xgk[7].  Exactness (degree 22 / 13) is covered by a
// unit test, which pins these constants down completely.
inline constexpr double kGkNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGaussWeights[4] = {0.129484966168870, 0.279705391489277,
                                            0.381830050505119, 0.417959183673469};

template <typename F>
std::pair<double, double> gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = kKronrodWeights[7] * fc;
    double resg = kGaussWeights[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double x = h * kGkNodes[j];
        const double f1 = f(c - x), f2 = f(c + x);
        resk += kKronrodWeights[j] * (f1 + f2);
        if (j % 2 == 1) resg += kGaussWeights[j / 2] * (f1 + f2);
    }
    return {resk * h, resg * h};
}

// Adaptive bisection on the Gauss-Kronrod error estimate, relative tolerance
// on each panel.  Depth 48 caps pathological (near-divergent) integrands.
template <typename F>
double adaptive_gk(F&& f, double a, double b, double rel_tol, int depth = 0) {
    auto [k, g] = gk15(f, a, b);
    if (depth >= 48 || std::abs(k - g) <= rel_tol * std::abs(k)) return k;
    const double m = 0.5 * (a + b);
    return adaptive_gk(f, a, m, rel_tol, depth + 1) + adaptive_gk(f, m, b, rel_tol, depth + 1);
}

}  // namespace detail

// Time derivative of the stage system at state s under allocation p.  States
// outside [0, initial] are accepted and evaluated by the affine extension of
// the attrition functions (the integrator relies on this during event
// localization); callers wanting model-domain enforcement should use
// core::complementing_attrition directly.
inline Derivative rhs(const core::EffectiveScenario& eff, const core::Allocation& p,
                      const core::ForceState& s) {
    if (s.a.size() != eff.n_agents())
        throw std::invalid_argument("rhs: state arity mismatch");
    detail::StageSystem sys(eff, p);
    std::vector<double> y(2 + eff.n_agents() + 1);
    y[0] = s.b;
    y[1] = s.r;
    std::copy(s.a.begin(), s.a.end(), y.begin() + 2);
    y[2 + eff.n_agents()] = s.x;
    std::vector<double> dy(y.size());
    sys.derive(y, dy);
    Derivative d;
    d.db = dy[0];
    d.dr = dy[1];
    d.da.assign(dy.begin() + 2, dy.begin() + 2 + static_cast<std::ptrdiff_t>(eff.n_agents()));
    d.dx = dy[2 + eff.n_agents()];
    return d;
}

// Exposure at which each fired-upon entity reaches zero, from the linear laws
// R(X) = R_start - p0 r_R X and A^i(X) = A^i_start - p_i r_i X.  Entities
// receiving no fire map to +infinity.  Entries are ordered Red first, then
// remaining agents ascending; eliminated agents are omitted.
inline std::vector<std::pair<core::EntityId, double>> elimination_exposure(
    const core::EffectiveScenario& eff, const core::Allocation& p, const core::ForceState& start) {
    if (p.arity() != eff.n_agents() + 1 || start.a.size() != eff.n_agents())
        throw std::invalid_argument("elimination_exposure: arity mismatch");
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<std::pair<core::EntityId, double>> out;
    const double red_fire = p[0] * eff.base().r_R;
    out.emplace_back(core::EntityId::red(), red_fire > 0.0 ? start.r / red_fire : inf);
    for (std::size_t i = 0; i < eff.n_agents(); ++i) {
        if (eff.is_eliminated(static_cast<int>(i) + 1)) continue;
        const double fire = p[i + 1] * eff.base().agents[i].r;
        out.emplace_back(core::EntityId::agent(static_cast<int>(i) + 1),
                         fire > 0.0 ? start.a[i] / fire : inf);
    }
    return out;
}

// Integrates one stage from `start` until the first tracked strength (Blue,
// Red, or a remaining agent) crosses zero, or until cfg.t_max.  Sample times
// are index-based (start.t + k*dt) to avoid accumulation drift.  The crossing
// is localized by fixed-count bisection on the step size, the crossing entity
// is clamped to exactly 0 in the final sample, and eliminations within
// cfg.event_tol of the earliest one are reported as simultaneous events at
// the same time.
inline Trajectory integrate_stage(const core::EffectiveScenario& eff, const core::Allocation& p,
                                  const core::ForceState& start, const IntegratorConfig& cfg) {
    cfg.validate();
    if (start.a.size() != eff.n_agents())
        throw std::invalid_argument("integrate_stage: state arity mismatch");
    detail::StageSystem sys(eff, p);
    const std::size_t n = eff.n_agents();

    Trajectory traj{{}, {}, p, {}, false};

    // Tracked entities: strength index in y -> identity.
    std::vector<std::pair<std::size_t, core::EntityId>> tracked;
    tracked.emplace_back(0, core::EntityId::blue());
    tracked.emplace_back(1, core::EntityId::red());
    for (std::size_t i = 0; i < n; ++i)
        if (sys.remaining[i]) tracked.emplace_back(2 + i, core::EntityId::agent(static_cast<int>(i) + 1));

    // Degenerate entry: anything tracked already at (or below) zero ends the
    // stage immediately with an empty trajectory.
    {
        const double entry[2] = {start.b, start.r};
        bool dead = false;
        for (const auto& [idx, id] : tracked) {
            const double v = idx < 2 ? entry[idx] : start.a[idx - 2];
            if (v <= 0.0) {
                traj.events.push_back({start.t, id});
                dead = true;
            }
        }
        if (dead) return traj;
    }

    const std::size_t m = 2 + n + 1;
    std::vector<double> y(m), y_next(m), k1(m), k2(m), k3(m), k4(m), tmp(m), y_mid(m);
    y[0] = start.b;
    y[1] = start.r;
    std::copy(start.a.begin(), start.a.end(), y.begin() + 2);
    y[2 + n] = start.x;

    auto make_state = [&](double t, const std::vector<double>& v) {
        core::ForceState s;
        s.t = t;
        s.b = v[0];
        s.r = v[1];
        s.a.assign(v.begin() + 2, v.begin() + 2 + static_cast<std::ptrdiff_t>(n));
        s.x = v[2 + n];
        return s;
    };

    // Instantaneous threatening rates (stage-start formulas evaluated with the
    // current Red strength over original initial strengths); only the argmax
    // is tracked, for the rate-crossing diagnostic.
    const core::Scenario& scn = eff.base();
    double b0_inst = 0.0;
    {
        double sum_alpha_c = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (sys.remaining[i]) sum_alpha_c += scn.agents[i].alpha_c;
        b0_inst = (sum_alpha_c + eff.delta()) * scn.r_R;
    }
    std::vector<double> inst(n + 1, 0.0);
    auto rate_argmax = [&](double red_strength) {
        inst[0] = b0_inst;
        for (std::size_t i = 0; i < n; ++i) {
            const core::AgentSpec& ag = scn.agents[i];
            inst[i + 1] = sys.remaining[i]
                              ? ag.r * (ag.alpha_c - ag.alpha_d) * red_strength / ag.a0
                              : 0.0;
        }
        std::size_t best = 0;
        for (std::size_t j = 1; j < inst.size(); ++j)
            if (inst[j] > inst[best]) best = j;
        return best;
    };
    auto entity_of = [](std::size_t j) {
        return j == 0 ? core::EntityId::red() : core::EntityId::agent(static_cast<int>(j));
    };

    traj.samples.push_back(make_state(start.t, y));
    std::size_t prev_target = rate_argmax(y[1]);

    auto check_finite = [&](double t) {
        for (double v : y_next)
            if (!std::isfinite(v))
                throw std::runtime_error("integrate_stage: non-finite state at t=" +
                                         std::to_string(t) + " (diverging step size?)");
    };

    for (std::size_t k = 0;; ++k) {
        const double t_k = start.t + static_cast<double>(k) * cfg.dt;
        if (t_k >= cfg.t_max) {
            traj.horizon_reached = true;
            break;
        }
        double t_next = start.t + static_cast<double>(k + 1) * cfg.dt;
        double h = cfg.dt;
        bool final_step = false;
        if (t_next >= cfg.t_max) {
            h = cfg.t_max - t_k;
            t_next = cfg.t_max;
            final_step = true;
        }

        sys.rk4(y, h, y_next, k1, k2, k3, k4, tmp);
        check_finite(t_next);

        // Crossing scan: monotone-nonincreasing strengths make "<= 0 at the
        // step end" a complete crossing test for the step.
        std::vector<std::pair<std::size_t, core::EntityId>> candidates;
        for (const auto& tr : tracked)
            if (y_next[tr.first] <= 0.0) candidates.push_back(tr);

        if (candidates.empty()) {
            y.swap(y_next);
            traj.samples.push_back(make_state(t_next, y));
            const std::size_t target = rate_argmax(y[1]);
            if (target != prev_target) {
                traj.rate_crossings.push_back({t_next, entity_of(prev_target), entity_of(target)});
                prev_target = target;
            }
            if (final_step) {
                traj.horizon_reached = true;
                break;
            }
            continue;
        }

        // Localize each candidate's root of strength(h') over h' in (0, h] by
        // fixed-count bisection (strength is positive at h' = 0).  52 halvings
        // drive the bracket to one ulp of the step, far inside event_tol.
        std::vector<double> roots(candidates.size());
        for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
            const std::size_t idx = candidates[ci].first;
            double lo = 0.0, hi = h;
            for (int it = 0; it < 52; ++it) {
                const double mid = 0.5 * (lo + hi);
                sys.rk4(y, mid, y_mid, k1, k2, k3, k4, tmp);
                (y_mid[idx] > 0.0 ? lo : hi) = mid;
            }
            roots[ci] = hi;
        }
        const double h_star = *std::min_element(roots.begin(), roots.end());

        sys.rk4(y, h_star, y_next, k1, k2, k3, k4, tmp);
        check_finite(t_k + h_star);
        const double t_star = t_k + h_star;
        for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
            if (roots[ci] <= h_star + cfg.event_tol) {  // simultaneous elimination
                y_next[candidates[ci].first] = 0.0;
                traj.events.push_back({t_star, candidates[ci].second});
            }
        }
        // candidates follow tracked order (blue, red, agents ascending) already
        traj.samples.push_back(make_state(t_star, y_next));
        break;
    }
    return traj;
}

// Max over samples of |B^2 - Q(X)| / c4 against the stage's energy relation.
inline double energy_invariant_residual(const Trajectory& traj,
                                        const core::EnergyCoefficients& coeff) {
    if (!(coeff.c4 > 0.0))
        throw std::invalid_argument("energy_invariant_residual: c4 must be > 0");
    double worst = 0.0;
    for (const core::ForceState& s : traj.samples)
        worst = std::max(worst, std::abs(s.b * s.b - coeff.blue_squared(s.x)) / coeff.c4);
    return worst;
}

// Smallest X > 0 with B(X)^2 = 0, or nullopt if Blue never reaches zero in
// exposure.  Uses the closed-form quadratic where possible, otherwise sign
// analysis at the critical points of the cubic plus bisection.
inline std::optional<double> blue_annihilation_exposure(const core::EnergyCoefficients& c) {
    if (!(c.c4 > 0.0))
        throw std::invalid_argument("blue_annihilation_exposure: c4 must be > 0");
    auto q = [&](double x) { return c.blue_squared(x); };

    auto bisect = [&](double lo, double hi) {  // q(lo) > 0 >= q(hi)
        for (int it = 0; it < 200 && (hi - lo) > 1e-16 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (q(mid) > 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };

    if (c.c1 == 0.0) {
        if (c.c2 == 0.0) {
            if (c.c3 == 0.0) return std::nullopt;           // constant positive
            return c.c4 / (2.0 * c.c3);                     // linear decay
        }
        const double disc = c.c3 * c.c3 - c.c2 * c.c4;      // quarter discriminant
        if (disc < 0.0) return std::nullopt;
        return c.c4 / (c.c3 + std::sqrt(disc));             // stable smaller root (> 0)
    }

    // Cubic with negative leading coefficient: a positive root always exists.
    // Critical points solve c1 x^2 - c2 x + c3 = 0.
    const double discq = c.c2 * c.c2 - 4.0 * c.c1 * c.c3;
    if (discq > 0.0) {
        const double s = std::sqrt(discq);
        const double x_lo = (c.c2 - s) / (2.0 * c.c1);  // local min of Q
        const double x_hi = (c.c2 + s) / (2.0 * c.c1);  // local max of Q
        if (x_lo > 0.0 && q(x_lo) <= 0.0) return bisect(0.0, x_lo);
        // No root before the dip bottoms out; the tail past the local max
        // goes to -infinity, so bracket outward from there.
        double lo = std::max(x_hi, 0.0), hi = std::max(2.0 * lo, 1.0);
        while (q(hi) > 0.0) hi *= 2.0;
        return bisect(lo, hi);
    }
    // Monotone nonincreasing: single root, bracket by doubling.
    double hi = 1.0;
    while (q(hi) > 0.0) hi *= 2.0;
    return bisect(0.0, hi);
}

// Stage clock: t = integral_0^{x_end} dX / sqrt(Q(X)) by adaptive
// Gauss-Kronrod quadrature to relative tolerance 1e-8.  When x_end itself is
// the smallest positive root of Q (stage ends by Blue annihilation) the
// substitution u = sqrt(x_r - X) removes the endpoint singularity exactly:
// Q(x_r - u^2)/u^2 is a polynomial in u with positive constant term.  A root
// strictly inside (0, x_end) means Blue dies before reaching x_end.
inline double stage_time_oracle(const core::EnergyCoefficients& c, double x_end) {
    if (!(x_end >= 0.0) || !std::isfinite(x_end))
        throw std::invalid_argument("stage_time_oracle: x_end must be finite and >= 0");
    if (x_end == 0.0) return 0.0;
    if (!(c.c4 > 0.0)) throw std::domain_error("stage_time_oracle: Blue already at zero (c4 <= 0)");

    constexpr double rel_tol = 1e-8;
    const std::optional<double> root = blue_annihilation_exposure(c);
    const double tol = 1e-9 * std::max(1.0, x_end);

    if (root && *root < x_end - tol)
        throw std::domain_error("stage_time_oracle: Blue annihilated at X=" +
                                std::to_string(*root) + " before target exposure X=" +
                                std::to_string(x_end));

    if (root && *root <= x_end + tol) {
        // Singular endpoint.  W(u) = Q(x_r - u^2) / u^2 expanded exactly:
        const double xr = *root;
        const double q0 = 2.0 * c.c1 * xr * xr - 2.0 * c.c2 * xr + 2.0 * c.c3;  // -Q'(xr)
        const double q2 = c.c2 - 2.0 * c.c1 * xr;                               // Q''(xr)/2
        const double q4 = (2.0 / 3.0) * c.c1;
        if (!(q0 > 0.0))
            throw std::domain_error(
                "stage_time_oracle: degenerate (double) root - stage does not end in finite time");
        auto w = [&](double u) {
            const double u2 = u * u;
            return 2.0 / std::sqrt(q0 + (q2 + q4 * u2) * u2);
        };
        return detail::adaptive_gk(w, 0.0, std::sqrt(xr), rel_tol);
    }

    auto f = [&](double x) { return 1.0 / std::sqrt(c.blue_squared(x)); };
    return detail::adaptive_gk(f, 0.0, x_end, rel_tol);
}

}  // namespace ncw::dynamics
