#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"

using namespace coop;

TEST_CASE("axis parsing") {
    const auto g = parse_axis("gamma=0:2.5:0.05");
    CHECK(g.parameter == SweepParameter::gamma);
    CHECK(g.values.size() == 51);
    CHECK(g.values.back() == 2.5);

    const auto b = parse_axis("beta=0.5,0.6,0.75");
    CHECK(b.values == std::vector<double>{0.5, 0.6, 0.75});

    CHECK(parse_axis("mode=separable,pooled").values == std::vector<double>{0.0, 1.0});
    CHECK(parse_axis("D_scale=0.5:0.5:0.1").values.size() == 1);

    CHECK_THROWS_AS(parse_axis("gamma"), DomainError);
    CHECK_THROWS_AS(parse_axis("delta=1,2"), DomainError);
    CHECK_THROWS_AS(parse_axis("gamma=1:0:0.1"), DomainError);
    CHECK_THROWS_AS(parse_axis("gamma=0:1:0"), DomainError);
    CHECK_THROWS_AS(parse_axis("gamma=a,b"), DomainError);
}

TEST_CASE("grid size and cap") {
    SweepSpec spec;
    spec.base = testing::load("slcd.json");
    spec.axes = {parse_axis("gamma=0:2.5:0.05")};
    CHECK(grid_size(spec) == 51);
    spec.axes.push_back(parse_axis("endowment=100,200"));
    spec.cap = 100;
    CHECK_THROWS_AS(grid_size(spec), SizeError);
    spec.cap = 102;
    CHECK(grid_size(spec) == 102);
    spec.axes.push_back(SweepAxis{SweepParameter::beta, {}});
    CHECK_THROWS_AS(grid_size(spec), DomainError);
}

TEST_CASE("study grid row count") {
    SweepSpec spec;
    spec.base = testing::load("no_links.json");
    spec.axes = {parse_axis("beta=0.5,0.6,0.7,0.75,0.8,0.9"), parse_axis("gamma=0,0.5,1.0,1.5,2.0"),
                 parse_axis("endowment=100,200")};
    // Six by five by two is sixty.
    CHECK(grid_size(spec) == 60);
}

TEST_CASE("single-point sweep equals a direct solve") {
    SweepSpec spec;
    spec.base = testing::load("slcd_rounded.json");
    spec.axes = {parse_axis("gamma=0.65")};
    const auto result = run_sweep(spec);
    REQUIRE(result.rows.size() == 1);
    const auto direct = solve(spec.base);
    CHECK(result.rows[0].actions == direct.actions);
    CHECK(result.rows[0].total_value == direct.value.total);
}

TEST_CASE("sweep csv layout and determinism") {
    SweepSpec spec;
    spec.base = testing::load("slcd_rounded.json");
    spec.axes = {parse_axis("gamma=0,0.65"), parse_axis("mode=separable,pooled")};
    std::size_t calls = 0;
    const auto r1 = run_sweep(spec, [&](std::size_t, std::size_t total) {
        ++calls;
        CHECK(total == 4);
    });
    CHECK(calls == 4);
    const std::string csv = sweep_to_csv(r1);
    CHECK(csv.rfind("gamma,mode,action_Samsung,action_Sony,total_value,converged\n", 0) == 0);
    CHECK(csv.find("\r") == std::string::npos);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(csv.find("\n0,separable,") != std::string::npos);
    CHECK(csv == sweep_to_csv(run_sweep(spec)));
}

TEST_CASE("endowment sweep leaves interior actions unchanged") {
    SweepSpec spec;
    spec.base = testing::load("slcd_rounded.json");
    spec.axes = {parse_axis("endowment=10,25,50,100,200")};
    const auto r = run_sweep(spec);
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(row.actions[i] - r.rows[0].actions[i]) < 1e-9);
    }
}

TEST_CASE("D_scale and cost axes apply") {
    const Scenario base = testing::load("slcd_rounded.json");
    const std::vector<SweepAxis> axes{parse_axis("D_scale=0.5"), parse_axis("cost=0.01")};
    const Scenario s = apply_grid_point(base, axes, {0.5, 0.01});
    CHECK(s.matrix_override->at(1, 0) == doctest::Approx(0.4));
    CHECK(std::get<QuadraticCost>(s.cost_model).c == 0.01);
    CHECK(std::holds_alternative<LinearCost>(apply_grid_point(base, {parse_axis("cost=0")}, {0.0}).cost_model));
}

TEST_CASE("interdependence study") {
    for (const ValueForm form : {ValueForm{PowerForm{}}, ValueForm{LogarithmicForm{}}}) {
        const auto sep = experiment_interdependence(form);
        CHECK(sep.action_change_percent == doctest::Approx(0.0).epsilon(1e-9));

        const auto pooled = experiment_interdependence(form, {0.0, 0.3, 0.6, 0.9}, AppropriationMode::pooled);
        CHECK(pooled.action_change_percent > 0.0);
        for (std::size_t k = 1; k < pooled.mean_actions.size(); ++k) {
            CHECK(pooled.mean_actions[k] >= pooled.mean_actions[k - 1]);
        }

        CHECK(experiment_interdependence(form, {0.6}).action_change_percent == 0.0);
    }
}

TEST_CASE("complementarity study") {
    for (const ValueForm form : {ValueForm{PowerForm{}}, ValueForm{LogarithmicForm{}}}) {
        const auto r = experiment_complementarity(form);
        CHECK(r.synergy_values.front() == 0.0);
        for (std::size_t k = 1; k < r.total_values.size(); ++k) {
            CHECK(r.total_values[k] > r.total_values[k - 1]);
            CHECK(r.mean_actions[k] >= r.mean_actions[k - 1] - 1e-9);
        }
        CHECK(r.value_change_percent > 0.0);
    }
}

TEST_CASE("counterfactual edits") {
    const Scenario s = testing::load("slcd.json");
    CounterfactualEdit edit;
    edit.criticality_overrides.push_back({{ActorId{"Sony"}, ActorId{"Samsung"}, "lcd_panels"}, 0.5});
    edit.bargaining_overrides = BargainingSpec{{{ActorId{"Sony"}, 1.15}, {ActorId{"Samsung"}, 1.1}}};

    const auto report = run_counterfactual(s, edit);
    // order [Samsung, Sony]
    CHECK(std::abs(report.base_matrix.at(1, 0) - 0.86) < 1e-12);
    CHECK(std::abs(report.edited_matrix.at(1, 0) - 0.61) < 1e-12);
    CHECK(std::abs(report.matrix_delta().at(1, 0) + 0.25) < 1e-12);
    CHECK(std::abs(percent_change(0.86, 0.61) + 29.0697674418604) < 1e-9);
    CHECK(std::abs(report.base_shares.alpha[1] - 0.45) < 1e-12);
    CHECK(std::abs(report.edited_shares.alpha[1] - 1.15 / 2.25) < 1e-12);

    const auto identity = run_counterfactual(s, CounterfactualEdit{});
    for (const auto& d : identity.deltas) {
        CHECK(d.action_delta() == 0.0);
        CHECK(d.payoff_delta() == 0.0);
        CHECK(d.share_delta() == 0.0);
    }
    for (double v : identity.matrix_delta().entries) CHECK(v == 0.0);

    // Stacking: applying a second edit starts from the edited base.
    const Scenario once = apply_edit(s, edit);
    CounterfactualEdit weight;
    weight.weight_overrides.push_back({ActorId{"Sony"}, "other_goals", 0.6});
    const auto stacked = run_counterfactual(once, weight);
    CHECK(std::abs(stacked.base_matrix.at(1, 0) - 0.61) < 1e-12);
    CHECK(std::abs(stacked.edited_matrix.at(1, 0) - 0.61 / 1.5) < 1e-12);
}

TEST_CASE("invalid edits") {
    const Scenario s = testing::load("slcd.json");
    CounterfactualEdit bad;
    bad.criticality_overrides.push_back({{ActorId{"Sony"}, ActorId{"Samsung"}, "lcd_panels"}, 1.3});
    CHECK(validate_edit(s, bad).at(0).code == "criticality_out_of_range");
    CHECK_THROWS_AS(apply_edit(s, bad), ValidationError);

    CounterfactualEdit missing;
    missing.criticality_overrides.push_back({{ActorId{"Sony"}, ActorId{"Samsung"}, "brand"}, 0.5});
    CHECK(validate_edit(s, missing).at(0).code == "unknown_link");

    CounterfactualEdit neg;
    neg.gamma_override = -1.0;
    CHECK_FALSE(validate_edit(s, neg).empty());
}

TEST_CASE("network edits drop a matrix override") {
    const Scenario s = testing::load("slcd_rounded.json");
    CounterfactualEdit edit;
    edit.criticality_overrides.push_back({{ActorId{"Sony"}, ActorId{"Samsung"}, "lcd_panels"}, 0.5});
    const auto report = run_counterfactual(s, edit);
    CHECK(report.matrix_override_dropped);
    CHECK(std::abs(report.edited_matrix.at(1, 0) - 0.61) < 1e-12);

    CounterfactualEdit shares_only;
    shares_only.bargaining_overrides = BargainingSpec{{{ActorId{"Sony"}, 1.15}}};
    const Scenario merged = apply_edit(s, shares_only);
    CHECK(merged.matrix_override.has_value());
    CHECK(merged.bargaining.power.at(ActorId{"Samsung"}) == 1.1);
}

TEST_CASE("rubric grading") {
    ValidationRubric r;
    CHECK_NOTHROW(r.validate());
    CHECK(grade_metric(30.0, r.baseline_range, 20.0, r) == 20.0);
    CHECK(grade_metric(10.0, r.baseline_range, 20.0, r) == 0.0);

    r.grading = Grading::linear_decay;
    r.decay_width = 10.0;
    CHECK(grade_metric(15.0, r.baseline_range, 20.0, r) == doctest::Approx(10.0));
    CHECK(grade_metric(0.0, r.baseline_range, 20.0, r) == 0.0);

    ValidationRubric off;
    off.baseline_points = 30.0;
    CHECK_THROWS_AS(off.validate(), DomainError);

    // Moving a metric into range never lowers its points.
    ValidationRubric decay;
    decay.grading = Grading::linear_decay;
    decay.decay_width = 5.0;
    for (double x = 0.0; x < 20.0; x += 0.5) {
        CHECK(grade_metric(20.0, decay.baseline_range, 20.0, decay) >= grade_metric(x, decay.baseline_range, 20.0, decay));
    }
}

TEST_CASE("scoring") {
    ScoreMetrics m;
    m.baseline_mean_action = 30.0;
    m.cooperative_mean_action = 45.0;
    m.coop_increase_percent = 50.0;
    m.counterfactual_mean_action = 40.0;
    m.counterfactual_reduction_percent = 10.0;
    const auto full = grade_metrics(m, {});
    CHECK(full.total == 60.0);
    CHECK(full.max_total == 60.0);

    m.baseline_mean_action = 500.0;
    m.coop_increase_percent = 900.0;
    m.counterfactual_reduction_percent = 90.0;
    CHECK(grade_metrics(m, {}).total == 0.0);

    const Scenario s = testing::load("slcd_rounded.json");
    const auto sc = score_scenario(s, {}, {});
    CHECK(std::abs(sc.metrics.baseline_mean_action - 22.9) < 0.2);
    CHECK(std::abs(sc.metrics.coop_increase_percent - 16.7) < 2.0);
    CHECK(sc.families.at(2).missing);
    CHECK(sc.families.at(2).points == 0.0);
    CHECK(std::find(sc.flags.begin(), sc.flags.end(), "counterfactual_reduction_missing") != sc.flags.end());

    CHECK_THROWS_AS(score_scenario(testing::load("no_links.json"), {}, {}), DomainError);
}
