#include "coop/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace coop {

namespace {

constexpr std::size_t kResidualGridPoints = 1025;
constexpr double kInvPhi = 0.6180339887498949;  // 1/golden ratio

double relative_change(double next, double prev) {
    return std::abs(next - prev) / std::max(1.0, std::abs(prev));
}

double frac(double x) { return x - std::floor(x); }

// Deterministic starting profile number k: midpoint, lower bounds, upper bounds,
// then low-discrepancy interior points.
ActionProfile seed_profile(const Game& game, std::size_t k) {
    ActionProfile a(std::vector<double>(game.size()));
    for (std::size_t i = 0; i < game.size(); ++i) {
        const double lo = game.lower[i];
        const double hi = game.upper[i];
        double t = 0.5;
        switch (k) {
            case 0: t = 0.5; break;
            case 1: t = 0.0; break;
            case 2: t = 1.0; break;
            default: {
                const double m = static_cast<double>(k - 2);
                t = 0.05 + 0.9 * frac(0.5 + m * kInvPhi * static_cast<double>(i + 1) + m * m * 0.1);
            }
        }
        a[i] = lo + t * (hi - lo);
    }
    return a;
}

struct StartOutcome {
    ActionProfile actions;
    bool converged = false;
    std::size_t iterations = 0;
};

StartOutcome run_from(const Game& game, ActionProfile a, const SolveSettings& settings) {
    StartOutcome out;
    const double lambda = settings.damping;
    ActionProfile next = a;
    for (std::size_t it = 1; it <= settings.max_iterations; ++it) {
        double change = 0.0;
        for (std::size_t i = 0; i < game.size(); ++i) {
            const double br = best_response(game, a, i, settings);
            next[i] = std::clamp((1.0 - lambda) * a[i] + lambda * br, game.lower[i], game.upper[i]);
            change = std::max(change, relative_change(next[i], a[i]));
        }
        a = next;
        out.iterations = it;
        if (change < settings.tolerance) {
            out.converged = true;
            break;
        }
    }
    out.actions = std::move(a);
    return out;
}

bool profiles_agree(const ActionProfile& x, const ActionProfile& y, double tol) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (relative_change(x[i], y[i]) > tol) return false;
    }
    return true;
}

}  // namespace

Game make_game(const Scenario& s) {
    if (auto v = validate_scenario(s); !v.empty()) throw ValidationError(std::move(v));
    InterdependenceMatrix D = s.matrix_override ? *s.matrix_override : compute_matrix(s.network);
    return make_game(s, std::move(D), shares_from_power(s.bargaining));
}

Game make_game(const Scenario& s, InterdependenceMatrix D, ShareVector shares) {
    Game g;
    g.order = canonical_actor_order(s);
    if (D.order != g.order) throw DomainError("interdependence matrix order differs from the scenario's actors");
    if (shares.alpha.size() != g.order.size()) throw DomainError("share vector size differs from the actor count");
    g.D = std::move(D);
    g.payoff = PayoffModel::from_scenario(s, std::move(shares));
    for (const auto& actor : g.order) {
        const ActionBounds b = s.bounds_of(actor);
        g.lower.push_back(b.lo);
        g.upper.push_back(b.hi);
    }
    return g;
}

void SolveSettings::validate() const {
    if (!(tolerance > 0.0)) throw DomainError("tolerance must be > 0");
    if (max_iterations == 0) throw DomainError("max_iterations must be > 0");
    if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("damping must be in (0, 1]");
    if (multi_start_count == 0) throw DomainError("multi_start_count must be > 0");
    if (inner_bracket_points < 3) throw DomainError("inner_bracket_points must be >= 3");
}

double EquilibriumResult::mean_action() const {
    if (actions.size() == 0) return 0.0;
    double sum = 0.0;
    for (double x : actions.actions) sum += x;
    return sum / static_cast<double>(actions.size());
}

double utility(const Game& game, const ActionProfile& a, std::size_t i) {
    const PayoffVector p = payoffs(game.payoff, a);
    double u = p.pi[i];
    for (std::size_t j = 0; j < game.size(); ++j) {
        if (j != i) u += game.D.at(i, j) * p.pi[j];
    }
    return u;
}

double utility_gradient(const Game& game, const ActionProfile& a, std::size_t i) {
    double grad = payoff_partial(game.payoff, a, i, i);
    for (std::size_t j = 0; j < game.size(); ++j) {
        if (j != i && game.D.at(i, j) != 0.0) grad += game.D.at(i, j) * payoff_partial(game.payoff, a, j, i);
    }
    return grad;
}

double best_response(const Game& game, const ActionProfile& a, std::size_t i, const SolveSettings& settings) {
    const double lo = game.lower[i];
    const double hi = game.upper[i];
    ActionProfile trial = a;
    auto u_at = [&](double x) {
        trial[i] = x;
        return utility(game, trial, i);
    };
    auto slope_at = [&](double x) {
        trial[i] = x;
        return utility_gradient(game, trial, i);
    };

    // Coarse scan.
    const std::size_t n = std::max<std::size_t>(3, settings.inner_bracket_points);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    std::size_t best_k = 0;
    double best_u = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const double u = u_at(k + 1 == n ? hi : lo + static_cast<double>(k) * step);
        if (u > best_u) {
            best_u = u;
            best_k = k;
        }
    }
    double left = best_k == 0 ? lo : lo + static_cast<double>(best_k - 1) * step;
    double right = best_k + 1 >= n ? hi : std::min(hi, lo + static_cast<double>(best_k + 1) * step);

    // Golden-section refinement of the bracket around the best scan point.
    const double width_tol = settings.tolerance * (hi - lo);
    double c = right - kInvPhi * (right - left);
    double d = left + kInvPhi * (right - left);
    double uc = u_at(c);
    double ud = u_at(d);
    for (int iter = 0; iter < 400 && right - left > width_tol; ++iter) {
        if (uc >= ud) {
            right = d;
            d = c;
            ud = uc;
            c = right - kInvPhi * (right - left);
            uc = u_at(c);
        } else {
            left = c;
            c = d;
            uc = ud;
            d = left + kInvPhi * (right - left);
            ud = u_at(d);
        }
    }
    double x = 0.5 * (left + right);

    // First-order polish: bisect on the sign of dU_i/da_i inside the final bracket.
    // The golden bracket can miss the root by a few widths when U_i is flat, so
    // widen each side geometrically until the slope changes sign.
    try {
        double l = left;
        double r = right;
        double w = std::max(right - left, 1e-12 * (hi - lo));
        for (int k = 0; k < 60 && l > lo && slope_at(l) <= 0.0; ++k, w *= 2.0) l = std::max(lo, l - w);
        w = std::max(right - left, 1e-12 * (hi - lo));
        for (int k = 0; k < 60 && r < hi && slope_at(r) >= 0.0; ++k, w *= 2.0) r = std::min(hi, r + w);
        if (l < r && slope_at(l) > 0.0 && slope_at(r) < 0.0) {
            for (int iter = 0; iter < 200; ++iter) {
                const double mid = 0.5 * (l + r);
                if (mid <= l || mid >= r) break;
                (slope_at(mid) > 0.0 ? l : r) = mid;
            }
            const double polished = 0.5 * (l + r);
            const double u_golden = u_at(x);
            if (u_at(polished) >= u_golden - 1e-12 * std::max(1.0, std::abs(u_golden))) x = polished;
        }
    } catch (const BoundaryDerivative&) {
        // keep the golden-section point
    }

    double best_x = x;
    double best = u_at(x);
    for (double edge : {lo, hi}) {
        const double u = u_at(edge);
        if (u > best) {
            best = u;
            best_x = edge;
        }
    }
    return best_x;
}

DeviationCheck verify_epsilon_equilibrium(const Game& game, const ActionProfile& a, std::size_t grid_points) {
    if (grid_points < 2) throw DomainError("grid_points must be >= 2");
    DeviationCheck out;
    out.max_gain = -std::numeric_limits<double>::infinity();
    out.max_relative_gain = -std::numeric_limits<double>::infinity();
    ActionProfile trial = a;
    for (std::size_t i = 0; i < game.size(); ++i) {
        const double stay = utility(game, a, i);
        const double lo = game.lower[i];
        const double hi = game.upper[i];
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < grid_points; ++k) {
            trial[i] = k + 1 == grid_points ? hi : lo + (hi - lo) * static_cast<double>(k) / double(grid_points - 1);
            best = std::max(best, utility(game, trial, i));
        }
        trial[i] = a[i];
        const double gain = best - stay;
        out.gain.push_back(gain);
        out.relative_gain.push_back(gain / std::max(1.0, std::abs(stay)));
        out.max_gain = std::max(out.max_gain, gain);
        out.max_relative_gain = std::max(out.max_relative_gain, out.relative_gain.back());
    }
    return out;
}

EquilibriumResult solve(const Game& game, const SolveSettings& settings) {
    settings.validate();

    std::vector<StartOutcome> starts;
    starts.reserve(settings.multi_start_count);
    for (std::size_t k = 0; k < settings.multi_start_count; ++k) {
        starts.push_back(run_from(game, seed_profile(game, k), settings));
    }

    const StartOutcome* chosen = &starts.front();
    for (const auto& s : starts) {
        if (s.converged) {
            chosen = &s;
            break;
        }
    }

    EquilibriumResult r;
    r.order = game.order;
    r.actions = chosen->actions;
    r.iterations = chosen->iterations;
    // Damped steps approach a bound only geometrically; land on it when the slope pushes outward.
    for (std::size_t i = 0; i < game.size(); ++i) {
        const double near = 10.0 * settings.tolerance * (game.upper[i] - game.lower[i]);
        for (double edge : {game.lower[i], game.upper[i]}) {
            if (std::abs(r.actions[i] - edge) > near || r.actions[i] == edge) continue;
            ActionProfile trial = r.actions;
            trial[i] = edge;
            if (utility(game, trial, i) >= utility(game, r.actions, i)) r.actions = trial;
        }
    }
    r.payoffs = payoffs(game.payoff, r.actions);
    r.value = total_value(game.payoff.value, r.actions);
    for (std::size_t i = 0; i < game.size(); ++i) r.utilities.push_back(utility(game, r.actions, i));

    r.multi_start_agreement = chosen->converged;
    for (const auto& s : starts) {
        if (!s.converged) continue;
        ++r.converged_starts;
        if (!profiles_agree(s.actions, chosen->actions, 100.0 * settings.tolerance)) r.multi_start_agreement = false;
    }

    r.residual = std::max(0.0, verify_epsilon_equilibrium(game, r.actions, kResidualGridPoints).max_relative_gain);
    r.converged = chosen->converged && r.residual < settings.tolerance;

    for (std::size_t i = 0; i < game.size(); ++i) {
        const double span = game.upper[i] - game.lower[i];
        const double x = r.actions[i];
        if (x <= game.lower[i] + 1e-9 * span) {
            r.boundary_flags.push_back(BoundaryFlag::at_lower);
        } else if (x >= game.upper[i] - 1e-9 * span) {
            r.boundary_flags.push_back(BoundaryFlag::at_upper);
        } else {
            r.boundary_flags.push_back(BoundaryFlag::interior);
        }
    }
    return r;
}

EquilibriumResult solve(const Scenario& s, const SolveSettings& settings) {
    return solve(make_game(s), settings);
}

std::string to_string(BoundaryFlag flag) {
    switch (flag) {
        case BoundaryFlag::interior: return "interior";
        case BoundaryFlag::at_lower: return "at_lower";
        case BoundaryFlag::at_upper: return "at_upper";
    }
    return "interior";
}

}  // namespace coop
