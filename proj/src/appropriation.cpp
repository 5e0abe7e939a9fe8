#include "coop/appropriation.hpp"

#include <cmath>
#include <string>

namespace coop {

ShareVector shares_from_power(const BargainingSpec& b) {
    if (b.power.empty()) throw DomainError("bargaining spec has no actors");
    double total = 0.0;
    for (const auto& [actor, beta] : b.power) {
        if (!(beta > 0.0) || !std::isfinite(beta)) {
            throw DomainError("bargaining power of '" + actor.value + "' must be > 0");
        }
        total += beta;
    }
    ShareVector out;
    out.alpha.reserve(b.power.size());
    for (const auto& [actor, beta] : b.power) out.alpha.push_back(beta / total);
    return out;
}

double cost(const CostModel& model, double a) {
    if (const auto* q = std::get_if<QuadraticCost>(&model)) return q->c * a * a;
    return a;
}

double cost_derivative(const CostModel& model, double a) {
    if (const auto* q = std::get_if<QuadraticCost>(&model)) return 2.0 * q->c * a;
    return 1.0;
}

PayoffModel PayoffModel::from_scenario(const Scenario& s, ShareVector shares) {
    PayoffModel m;
    m.value = s.value;
    m.cost_model = s.cost_model;
    m.mode = s.appropriation_mode;
    for (const auto& actor : canonical_actor_order(s)) {
        auto it = s.endowments.find(actor);
        m.endowments.push_back(it == s.endowments.end() ? 0.0 : it->second);
    }
    m.shares = std::move(shares);
    return m;
}

PayoffVector payoffs(const PayoffModel& model, const ActionProfile& a) {
    const ValueBreakdown v = total_value(model.value, a);
    PayoffVector out;
    out.pi.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double base = model.endowments[i] - cost(model.cost_model, a[i]);
        const double alpha = model.shares.alpha[i];
        out.pi[i] = model.mode == AppropriationMode::pooled
                        ? base + alpha * v.total
                        : base + v.individual[i] + alpha * v.synergy_value;
    }
    return out;
}

PayoffVector payoffs(const Scenario& s, const ShareVector& shares, const ActionProfile& a) {
    return payoffs(PayoffModel::from_scenario(s, shares), a);
}

double payoff_partial(const PayoffModel& model, const ActionProfile& a, std::size_t j, std::size_t i) {
    ValueGradient grad;
    grad.df = individual_derivative(model.value.form, a[i]);
    if (model.value.gamma != 0.0) grad.dg = synergy_derivative(model.value.synergy, a, i);
    const double synergy_slope = model.value.gamma * grad.dg;
    const double alpha_j = model.shares.alpha[j];
    const double own = j == i ? -cost_derivative(model.cost_model, a[i]) : 0.0;
    if (model.mode == AppropriationMode::pooled) {
        return own + alpha_j * (grad.df + synergy_slope);
    }
    return own + (j == i ? grad.df : 0.0) + alpha_j * synergy_slope;
}

std::vector<double> shapley_values(const ValueSpec& spec, const ActionProfile& a) {
    const std::size_t n = a.size();
    if (n > 10) throw SizeError("exact Shapley enumeration supports at most 10 actors, got " + std::to_string(n));
    if (n == 0) return {};

    const std::size_t coalitions = std::size_t{1} << n;
    std::vector<double> worth(coalitions);
    ActionProfile restricted(std::vector<double>(n, 0.0));
    for (std::size_t mask = 0; mask < coalitions; ++mask) {
        for (std::size_t k = 0; k < n; ++k) restricted[k] = (mask >> k) & 1u ? a[k] : 0.0;
        worth[mask] = total_value(spec, restricted).total;
    }

    // weight(|S|) = |S|! (n - |S| - 1)! / n!
    std::vector<double> weight(n);
    for (std::size_t s = 0; s < n; ++s) {
        weight[s] = std::exp(std::lgamma(double(s) + 1) + std::lgamma(double(n - s)) - std::lgamma(double(n) + 1));
    }

    std::vector<double> phi(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t bit = std::size_t{1} << i;
        for (std::size_t mask = 0; mask < coalitions; ++mask) {
            if (mask & bit) continue;
            const auto size = static_cast<std::size_t>(__builtin_popcountll(mask));
            phi[i] += weight[size] * (worth[mask | bit] - worth[mask]);
        }
    }
    return phi;
}

std::vector<double> shapley_bargaining_estimate(const Scenario& s, const ActionProfile& a) {
    if (a.size() != canonical_actor_order(s).size()) {
        throw DomainError("action profile size does not match the scenario's actors");
    }
    return shapley_values(s.value, a);
}

}  // namespace coop
