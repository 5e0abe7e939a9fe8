#pragma once

#include <cstddef>
#include <vector>

#include "coop/model.hpp"
#include "coop/valuation.hpp"

namespace coop {

/// Synergy shares alpha_i in canonical actor order; positive and summing to 1.
struct ShareVector {
    std::vector<double> alpha;
    bool operator==(const ShareVector&) const = default;
};

struct PayoffVector {
    std::vector<double> pi;
};

/// alpha_i = beta_i / sum_j beta_j. Throws DomainError if any beta_i <= 0.
ShareVector shares_from_power(const BargainingSpec& b);

double cost(const CostModel& model, double a);
double cost_derivative(const CostModel& model, double a);

/// Everything needed to turn an action profile into private payoffs.
struct PayoffModel {
    ValueSpec value;
    CostModel cost_model = LinearCost{};
    AppropriationMode mode = AppropriationMode::separable;
    std::vector<double> endowments;
    ShareVector shares;

    static PayoffModel from_scenario(const Scenario& s, ShareVector shares);
};

/// separable: pi_i = e_i - c(a_i) + f_i(a_i) + alpha_i * gamma * g(a)
/// pooled:    pi_i = e_i - c(a_i) + alpha_i * V(a)
PayoffVector payoffs(const PayoffModel& model, const ActionProfile& a);
PayoffVector payoffs(const Scenario& s, const ShareVector& shares, const ActionProfile& a);

/// d pi_j / d a_i under the model's appropriation mode.
double payoff_partial(const PayoffModel& model, const ActionProfile& a, std::size_t j, std::size_t i);

/// Exact Shapley values of the coalition game v(S) = V(a restricted to S, others 0).
/// Throws SizeError for more than 10 actors.
std::vector<double> shapley_bargaining_estimate(const Scenario& s, const ActionProfile& a);
std::vector<double> shapley_values(const ValueSpec& spec, const ActionProfile& a);

}  // namespace coop
