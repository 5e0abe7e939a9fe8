#pragma once

#include <cstddef>
#include <vector>

#include "coop/appropriation.hpp"
#include "coop/interdependence.hpp"
#include "coop/model.hpp"

namespace coop {

/// A scenario compiled into canonical-order vectors: the solvable game.
struct Game {
    std::vector<ActorId> order;
    InterdependenceMatrix D;
    PayoffModel payoff;
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t size() const noexcept { return order.size(); }
};

/// Validates `s` (throws ValidationError), then takes D from matrix_override or
/// the network, and shares from the bargaining powers.
Game make_game(const Scenario& s);
Game make_game(const Scenario& s, InterdependenceMatrix D, ShareVector shares);

struct SolveSettings {
    double tolerance = 1e-8;  // max relative action change between sweeps
    std::size_t max_iterations = 10000;
    double damping = 0.5;
    std::size_t multi_start_count = 5;
    std::size_t inner_bracket_points = 64;

    /// Throws DomainError when a field is out of range.
    void validate() const;
    bool operator==(const SolveSettings&) const = default;
};

enum class BoundaryFlag { interior, at_lower, at_upper };

struct EquilibriumResult {
    std::vector<ActorId> order;
    ActionProfile actions;
    PayoffVector payoffs;
    std::vector<double> utilities;
    ValueBreakdown value;
    bool converged = false;
    std::size_t iterations = 0;
    // Largest relative utility gain, gain / max(1, |U_i|), any actor finds on a
    // 1025-point unilateral grid at the returned profile (never negative).
    double residual = 0.0;
    bool multi_start_agreement = false;
    std::size_t converged_starts = 0;
    std::vector<BoundaryFlag> boundary_flags;

    double mean_action() const;
};

/// U_i = pi_i + sum_{j != i} D_ij pi_j
double utility(const Game& game, const ActionProfile& a, std::size_t i);

/// dU_i/da_i from the analytic value and payoff derivatives.
/// Propagates BoundaryDerivative from the value function.
double utility_gradient(const Game& game, const ActionProfile& a, std::size_t i);

/// argmax of U_i over actor i's bounds with the other actions held at `a`.
double best_response(const Game& game, const ActionProfile& a, std::size_t i, const SolveSettings& settings);

EquilibriumResult solve(const Game& game, const SolveSettings& settings = {});
EquilibriumResult solve(const Scenario& s, const SolveSettings& settings = {});

struct DeviationCheck {
    std::vector<double> gain;           // best grid utility minus U_i(a), per actor
    std::vector<double> relative_gain;  // gain / max(1, |U_i(a)|)
    double max_gain = 0.0;
    double max_relative_gain = 0.0;
};

/// Scans `grid_points` evenly spaced unilateral deviations per actor.
DeviationCheck verify_epsilon_equilibrium(const Game& game, const ActionProfile& a, std::size_t grid_points);

std::string to_string(BoundaryFlag flag);

}  // namespace coop
