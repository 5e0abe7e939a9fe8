#include <doctest.h>

#include <cmath>

#include "coop/equilibrium.hpp"
#include "helpers.hpp"

using namespace coop;

TEST_CASE("utility examples") {
    Scenario s = testing::two_actor(PowerForm{0.75}, 0.8, 0.0, 0.0, AppropriationMode::separable);
    Game g = make_game(s);
    const ActionProfile a{10.0, 20.0};
    const auto p = payoffs(g.payoff, a);
    CHECK(utility(g, a, 0) == p.pi[0]);
    CHECK(utility(g, a, 1) == p.pi[1]);

    g.D.at(0, 1) = 1.0;
    g.D.at(1, 0) = 1.0;
    const ActionProfile same{12.0, 12.0};
    const auto ps = payoffs(g.payoff, same);
    CHECK(utility(g, same, 0) == doctest::Approx(2.0 * ps.pi[0]));

    const Game slcd = make_game(testing::load("slcd_rounded.json"));
    const ActionProfile op{22.9, 22.9};
    const auto pp = payoffs(slcd.payoff, op);
    // order [Samsung, Sony]; Sony depends on Samsung at 0.8
    CHECK(utility(slcd, op, 1) == doctest::Approx(pp.pi[1] + 0.8 * pp.pi[0]));
}

TEST_CASE("gradient roots at closed forms") {
    const Game power = make_game(testing::two_actor(PowerForm{0.75}, 0.0, 0.5, 0.5, AppropriationMode::separable));
    const double root = std::pow(0.75, 4.0);
    CHECK(std::abs(utility_gradient(power, {root, 3.0}, 0)) < 1e-12);
    const Game log = make_game(testing::two_actor(LogarithmicForm{20.0}, 0.0, 0.5, 0.5, AppropriationMode::separable));
    CHECK(std::abs(utility_gradient(log, {19.0, 3.0}, 0)) < 1e-12);
}

TEST_CASE("best response examples") {
    const SolveSettings settings;
    const Game power = make_game(testing::two_actor(PowerForm{0.75}, 0.0, 0.7, 0.2, AppropriationMode::separable));
    for (double other : {0.0, 5.0, 60.0}) {
        CHECK(best_response(power, {50.0, other}, 0, settings) == doctest::Approx(std::pow(0.75, 4.0)).epsilon(1e-8));
    }

    // Strictly decreasing utility: a cost far above any marginal value.
    Scenario steep = testing::two_actor(LogarithmicForm{0.5}, 0.0, 0.0, 0.0, AppropriationMode::separable);
    steep.action_bounds = {{ActorId{"A"}, {2.0, 10.0}}, {ActorId{"B"}, {2.0, 10.0}}};
    CHECK(best_response(make_game(steep), {5.0, 5.0}, 0, settings) == 2.0);

    const Game pooled = make_game(testing::two_actor(LogarithmicForm{20.0}, 0.0, 0.0, 0.0, AppropriationMode::pooled));
    CHECK(best_response(pooled, {1.0, 30.0}, 0, settings) == doctest::Approx(9.0).epsilon(1e-8));
}

TEST_CASE("S-LCD equilibria") {
    const Scenario s = testing::load("slcd_rounded.json");
    const auto coop = solve(s);
    CHECK(coop.converged);
    CHECK(coop.multi_start_agreement);
    CHECK(std::abs(coop.mean_action() - 26.7) < 0.5);
    for (auto f : coop.boundary_flags) CHECK(f == BoundaryFlag::interior);

    const auto base = solve(with_zero_interdependence(s));
    CHECK(base.converged);
    CHECK(std::abs(base.mean_action() - 22.9) < 0.2);

    const auto pooled = solve([&] {
        Scenario p = s;
        p.appropriation_mode = AppropriationMode::pooled;
        return p;
    }());
    CHECK(pooled.converged);
    CHECK(std::abs(pooled.mean_action() - coop.mean_action()) > 0.1);
}

TEST_CASE("separable gamma zero makes D inert") {
    for (double d : {0.0, 0.3, 0.9}) {
        const auto r = solve(testing::two_actor(PowerForm{0.75}, 0.0, d, d, AppropriationMode::separable));
        for (double a : r.actions.actions) CHECK(std::abs(a - std::pow(0.75, 4.0)) < 1e-6);
        const auto l = solve(testing::two_actor(LogarithmicForm{20.0}, 0.0, d, d, AppropriationMode::separable));
        for (double a : l.actions.actions) CHECK(std::abs(a - 19.0) < 1e-6);
    }
}

TEST_CASE("non-convergence is data") {
    SolveSettings tight;
    tight.max_iterations = 1;
    const auto r = solve(testing::load("slcd_rounded.json"), tight);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 1);

    SolveSettings bad;
    bad.tolerance = 0.0;
    CHECK_THROWS_AS(solve(testing::load("slcd.json"), bad), DomainError);
    CHECK_THROWS_AS(solve(Scenario{}), ValidationError);
}

TEST_CASE("epsilon-equilibrium oracle") {
    const Scenario s = testing::load("slcd_rounded.json");
    const Game g = make_game(s);
    const auto r = solve(g);
    const auto check = verify_epsilon_equilibrium(g, r.actions, 1025);
    for (std::size_t i = 0; i < 2; ++i) CHECK(check.gain[i] < 1e-6 * std::max(1.0, std::abs(r.utilities[i])));

    const auto off = verify_epsilon_equilibrium(g, {0.0, 0.0}, 1025);
    CHECK(off.max_gain > 0.0);

    // Single actor at its closed-form optimum.
    Scenario one;
    one.network.actors = {ActorId{"X"}};
    one.value = {LogarithmicForm{20.0}, SynergyKind::geometric_mean, 0.0};
    one.bargaining.power = {{ActorId{"X"}, 1.0}};
    one.endowments = {{ActorId{"X"}, 100.0}};
    const Game solo = make_game(one);
    CHECK(verify_epsilon_equilibrium(solo, {19.0}, 1025).max_gain <= 1e-9);
    CHECK(solve(solo).actions[0] == doctest::Approx(19.0).epsilon(1e-8));
}

TEST_CASE("boundary equilibria are flagged") {
    Scenario s = testing::two_actor(PowerForm{0.75}, 2.0, 0.9, 0.9, AppropriationMode::pooled);
    s.action_bounds = {{ActorId{"A"}, {0.0, 0.1}}, {ActorId{"B"}, {0.0, 0.1}}};
    const auto r = solve(s);
    CHECK(r.boundary_flags[0] == BoundaryFlag::at_upper);
}

TEST_CASE("gradient matches finite differences") {
    std::mt19937_64 rng(314159);
    std::uniform_real_distribution<double> act(0.5, 95.0);
    for (auto kind : {SynergyKind::geometric_mean, SynergyKind::minimum, SynergyKind::additive}) {
        for (auto mode : {AppropriationMode::separable, AppropriationMode::pooled}) {
            for (bool power : {true, false}) {
                for (int k = 0; k < 30; ++k) {
                    Scenario s = testing::random_two_actor(rng, power, mode);
                    s.value.synergy = kind;
                    const Game g = make_game(s);
                    ActionProfile a{act(rng), act(rng)};
                    if (kind == SynergyKind::minimum && std::abs(a[0] - a[1]) < 1e-2) a[1] += 1.0;
                    const double h = 1e-5 * std::max(1.0, a[0]);
                    ActionProfile hi = a, lo = a;
                    hi[0] += h;
                    lo[0] -= h;
                    const double fd = (utility(g, hi, 0) - utility(g, lo, 0)) / (2 * h);
                    const double an = utility_gradient(g, a, 0);
                    CHECK(std::abs(an - fd) / std::max(1.0, std::abs(an)) < 1e-6);
                }
            }
        }
    }
}

TEST_CASE("permutation symmetry") {
    // Renaming actors so the canonical order flips must permute the solution.
    Scenario s = testing::load("slcd_rounded.json");
    const auto r = solve(s);
    Scenario renamed = s;
    auto rename = [](const ActorId& a) { return ActorId{a.value == "Sony" ? "AaSony" : a.value}; };
    renamed.network.actors = {ActorId{"AaSony"}, ActorId{"Samsung"}};
    renamed.network.dependums.clear();
    for (const auto& [a, l] : s.network.dependums) renamed.network.dependums[rename(a)] = l;
    for (auto& link : renamed.network.links) {
        link.depender = rename(link.depender);
        link.dependee = rename(link.dependee);
    }
    renamed.bargaining.power = {{ActorId{"AaSony"}, 0.9}, {ActorId{"Samsung"}, 1.1}};
    renamed.endowments = {{ActorId{"AaSony"}, 100.0}, {ActorId{"Samsung"}, 100.0}};
    renamed.action_bounds = {{ActorId{"AaSony"}, {0.0, 100.0}}, {ActorId{"Samsung"}, {0.0, 100.0}}};
    InterdependenceMatrix m({ActorId{"AaSony"}, ActorId{"Samsung"}});
    m.at(0, 1) = 0.8;
    m.at(1, 0) = 0.6;
    renamed.matrix_override = m;
    const auto q = solve(renamed);
    CHECK(q.actions[0] == doctest::Approx(r.actions[1]).epsilon(1e-9));
    CHECK(q.actions[1] == doctest::Approx(r.actions[0]).epsilon(1e-9));
}

TEST_CASE("comparative statics and determinism") {
    const Scenario base = testing::load("slcd_rounded.json");
    const auto r1 = solve(base);
    const auto r2 = solve(base);
    CHECK(r1.actions == r2.actions);

    // Endowment invariance of interior equilibria (the fixture's bounds are explicit).
    for (double e : {10.0, 25.0, 50.0, 200.0}) {
        Scenario s = base;
        for (auto& [a, v] : s.endowments) v = e;
        const auto r = solve(s);
        for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(r.actions[i] - r1.actions[i]) < 1e-9);
    }

    // Higher gamma and higher common D do not lower the symmetric action.
    double prev = 0.0;
    for (double gamma : {0.0, 0.5, 1.0, 1.5, 2.0}) {
        const auto r = solve(testing::two_actor(LogarithmicForm{20.0}, gamma, 0.3, 0.3, AppropriationMode::separable));
        CHECK(r.mean_action() >= prev - 1e-9);
        prev = r.mean_action();
    }
    prev = 0.0;
    for (double d : {0.0, 0.3, 0.6, 0.9}) {
        const auto r = solve(testing::two_actor(PowerForm{0.75}, 0.5, d, d, AppropriationMode::pooled));
        CHECK(r.mean_action() >= prev - 1e-9);
        prev = r.mean_action();
    }
}
