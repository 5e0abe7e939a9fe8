#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coop/equilibrium.hpp"
#include "coop/model.hpp"

namespace coop {

// ---------------------------------------------------------------------------
// Parameter sweeps

enum class SweepParameter { gamma, beta, theta, endowment, D_scale, cost, mode };

std::string to_string(SweepParameter p);
SweepParameter sweep_parameter_from_string(const std::string& s);

/// One grid axis. Values are numeric; the `mode` axis encodes 0 = separable,
/// 1 = pooled, and the `cost` axis encodes 0 = linear, c > 0 = quadratic(c).
struct SweepAxis {
    SweepParameter parameter = SweepParameter::gamma;
    std::vector<double> values;

    bool operator==(const SweepAxis&) const = default;
};

/// Parses `name=start:stop:step` (endpoints inclusive within 1e-9) or
/// `name=v1,v2,...`. The mode axis also accepts `separable` / `pooled`.
/// Throws DomainError on malformed input.
SweepAxis parse_axis(const std::string& text);

inline constexpr std::size_t kDefaultGridCap = 100000;

struct SweepSpec {
    Scenario base;
    std::vector<SweepAxis> axes;
    SolveSettings settings;
    std::size_t cap = kDefaultGridCap;
};

struct SweepRow {
    std::vector<double> parameters;  // axis order
    ActionProfile actions;
    double total_value = 0.0;
    std::vector<double> payoffs;
    bool converged = false;
};

struct SweepResult {
    std::vector<SweepAxis> axes;
    std::vector<ActorId> order;
    std::vector<SweepRow> rows;  // lexicographic grid order, first axis slowest
};

/// Cross-product size. Throws SizeError above the cap, DomainError for empty or
/// non-finite value lists.
std::size_t grid_size(const SweepSpec& spec);

/// The base scenario with one grid point's parameter values applied.
Scenario apply_grid_point(const Scenario& base, const std::vector<SweepAxis>& axes,
                          const std::vector<double>& point);

/// Every pre-solve check of run_sweep (cap, settings, per-point validation)
/// without solving. Returns the grid size.
std::size_t check_sweep(const SweepSpec& spec);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Solves every grid point (in parallel, assembled in grid order). Size and
/// validation errors surface before any solve; non-convergence is a row flag.
SweepResult run_sweep(const SweepSpec& spec, const ProgressFn& progress = {});

/// Header: axis names, action_<actor>..., total_value, converged. 12 significant digits, LF.
std::string sweep_to_csv(const SweepResult& result);

// ---------------------------------------------------------------------------
// Study designs on a symmetric two-actor template

/// Two actors "A" and "B", equal bargaining power, e_i = endowment, bounds
/// [0, endowment], no dependency links, and a symmetric matrix_override with
/// off-diagonal D.
Scenario symmetric_template(const ValueForm& form, double gamma, double D, AppropriationMode mode,
                            double endowment = 100.0);

struct ExperimentSummary {
    SweepResult sweep;
    std::vector<double> mean_actions;
    std::vector<double> total_values;
    std::vector<double> synergy_values;
    double action_change_percent = 0.0;  // first to last grid value
    double value_change_percent = 0.0;
};

ExperimentSummary experiment_interdependence(const ValueForm& form,
                                             const std::vector<double>& D_values = {0.0, 0.3, 0.6, 0.9},
                                             AppropriationMode mode = AppropriationMode::separable,
                                             const SolveSettings& settings = {});

ExperimentSummary experiment_complementarity(const ValueForm& form,
                                             const std::vector<double>& gamma_values = {0.0, 0.5, 1.0, 1.5, 2.0},
                                             double D = 0.3,
                                             AppropriationMode mode = AppropriationMode::separable,
                                             const SolveSettings& settings = {});

// ---------------------------------------------------------------------------
// Counterfactual edits

struct CriticalityOverride {
    LinkKey link;
    double criticality = 0.0;
    bool operator==(const CriticalityOverride&) const = default;
};

struct WeightOverride {
    ActorId actor;
    std::string dependum_id;
    double weight = 0.0;
    bool operator==(const WeightOverride&) const = default;
};

struct CounterfactualEdit {
    std::vector<CriticalityOverride> criticality_overrides;
    std::vector<WeightOverride> weight_overrides;
    std::optional<BargainingSpec> bargaining_overrides;
    std::optional<double> gamma_override;

    bool empty() const;
    bool touches_network() const;
    bool operator==(const CounterfactualEdit&) const = default;
};

/// Checks the edit's values and references against `s` without applying it.
std::vector<Violation> validate_edit(const Scenario& s, const CounterfactualEdit& edit);

/// Applies the edit. Network edits drop any matrix_override so D is recomputed
/// from the edited network. Throws ValidationError for invalid edits.
Scenario apply_edit(const Scenario& s, const CounterfactualEdit& edit);

struct ActorDelta {
    ActorId actor;
    double base_action = 0.0, edited_action = 0.0;
    double base_payoff = 0.0, edited_payoff = 0.0;
    double base_utility = 0.0, edited_utility = 0.0;
    double base_share = 0.0, edited_share = 0.0;

    double action_delta() const { return edited_action - base_action; }
    double payoff_delta() const { return edited_payoff - base_payoff; }
    double utility_delta() const { return edited_utility - base_utility; }
    double share_delta() const { return edited_share - base_share; }
};

struct CounterfactualReport {
    EquilibriumResult base;
    EquilibriumResult edited;
    InterdependenceMatrix base_matrix;
    InterdependenceMatrix edited_matrix;
    ShareVector base_shares;
    ShareVector edited_shares;
    std::vector<ActorDelta> deltas;
    bool matrix_override_dropped = false;
    double mean_action_reduction_percent = 0.0;  // (base - edited) / base * 100

    /// edited - base, per entry.
    InterdependenceMatrix matrix_delta() const;
};

CounterfactualReport run_counterfactual(const Scenario& s, const CounterfactualEdit& edit,
                                        const SolveSettings& settings = {});

// ---------------------------------------------------------------------------
// Validation scoring

struct MetricRange {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return x >= lo && x <= hi; }
    bool operator==(const MetricRange&) const = default;
};

enum class Grading { step, linear_decay };

struct ValidationRubric {
    MetricRange baseline_range{20.0, 60.0};
    MetricRange coop_increase_range{20.0, 100.0};          // percent
    MetricRange counterfactual_reduction_range{5.0, 25.0};  // percent
    double baseline_points = 20.0;
    double coop_increase_points = 20.0;
    double counterfactual_reduction_points = 20.0;
    Grading grading = Grading::step;
    double decay_width = 0.0;  // linear_decay only

    double max_total() const { return baseline_points + coop_increase_points + counterfactual_reduction_points; }
    /// Throws DomainError for empty ranges, negative points, a total other than 60,
    /// or a nonpositive decay width.
    void validate() const;
    bool operator==(const ValidationRubric&) const = default;
};

/// Points earned by `metric` in `range`: full inside; outside, 0 under step
/// grading and points * max(0, 1 - distance / width) under linear decay.
double grade_metric(double metric, const MetricRange& range, double points, const ValidationRubric& rubric);

struct FamilyScore {
    std::string family;
    double metric = 0.0;
    double points = 0.0;
    double max_points = 0.0;
    bool in_range = false;
    bool missing = false;
};

struct ScoreMetrics {
    double baseline_mean_action = 0.0;
    double cooperative_mean_action = 0.0;
    double coop_increase_percent = 0.0;
    std::optional<double> counterfactual_mean_action;
    std::optional<double> counterfactual_reduction_percent;
    bool all_converged = true;
};

struct ValidationScore {
    ScoreMetrics metrics;
    std::vector<FamilyScore> families;  // baseline, coop_increase, counterfactual_reduction
    double total = 0.0;
    double max_total = 0.0;
    std::vector<std::string> flags;
};

ValidationScore grade_metrics(const ScoreMetrics& metrics, const ValidationRubric& rubric);

/// Baseline = equilibrium with D zeroed, cooperative = full D, counterfactual =
/// equilibrium after `edit`. Without an edit the reduction family scores 0 and
/// is flagged. Throws DomainError if D is identically zero.
ValidationScore score_scenario(const Scenario& s, const ValidationRubric& rubric, const SolveSettings& settings,
                               const std::optional<CounterfactualEdit>& edit = std::nullopt);

/// D actually used by the solver: matrix_override when present, else computed.
InterdependenceMatrix effective_matrix(const Scenario& s);

/// The scenario with its interdependence forced to zero.
Scenario with_zero_interdependence(const Scenario& s);

double percent_change(double from, double to);

}  // namespace coop
