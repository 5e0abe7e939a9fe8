#include "coop/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace coop {

namespace {

void require_nonnegative(double a) {
    if (!(a >= 0.0)) throw DomainError("action must be >= 0, got " + std::to_string(a));
}

}  // namespace

double individual_value(const ValueForm& form, double a) {
    require_nonnegative(a);
    if (const auto* p = std::get_if<PowerForm>(&form)) {
        return a == 0.0 ? 0.0 : std::pow(a, p->beta);
    }
    return std::get<LogarithmicForm>(form).theta * std::log1p(a);
}

double individual_derivative(const ValueForm& form, double a) {
    require_nonnegative(a);
    if (const auto* p = std::get_if<PowerForm>(&form)) {
        if (a == 0.0) throw BoundaryDerivative("power form is not differentiable at a = 0");
        return p->beta * std::pow(a, p->beta - 1.0);
    }
    return std::get<LogarithmicForm>(form).theta / (1.0 + a);
}

double synergy(SynergyKind kind, const ActionProfile& a) {
    if (a.size() == 0) return 0.0;
    switch (kind) {
        case SynergyKind::geometric_mean: {
            double product = 1.0;
            for (double x : a.actions) {
                if (x == 0.0) return 0.0;
                product *= x;
            }
            if (a.size() == 2) return std::sqrt(product);
            return std::pow(product, 1.0 / static_cast<double>(a.size()));
        }
        case SynergyKind::minimum:
            return *std::min_element(a.actions.begin(), a.actions.end());
        case SynergyKind::additive: {
            double sum = 0.0;
            for (double x : a.actions) sum += x;
            return sum;
        }
    }
    return 0.0;
}

double synergy_derivative(SynergyKind kind, const ActionProfile& a, std::size_t i) {
    switch (kind) {
        case SynergyKind::geometric_mean: {
            if (a[i] == 0.0) throw BoundaryDerivative("geometric-mean synergy is not differentiable at a_i = 0");
            return synergy(kind, a) / (static_cast<double>(a.size()) * a[i]);
        }
        case SynergyKind::minimum: {
            const double lowest = *std::min_element(a.actions.begin(), a.actions.end());
            if (a[i] != lowest) return 0.0;
            const auto ties = std::count(a.actions.begin(), a.actions.end(), lowest);
            return 1.0 / static_cast<double>(ties);
        }
        case SynergyKind::additive:
            return 1.0;
    }
    return 0.0;
}

ValueBreakdown total_value(const ValueSpec& spec, const ActionProfile& a) {
    ValueBreakdown out;
    out.individual.reserve(a.size());
    double individual_sum = 0.0;
    for (double x : a.actions) {
        const double f = individual_value(spec.form, x);
        out.individual.push_back(f);
        individual_sum += f;
    }
    out.synergy_raw = synergy(spec.synergy, a);
    out.synergy_value = spec.gamma * out.synergy_raw;
    out.total = individual_sum + out.synergy_value;
    return out;
}

double superadditivity_gap(const ValueSpec& spec, const ActionProfile& a) {
    // A lone actor creates only f_i(a_i), so the individual terms cancel exactly.
    return total_value(spec, a).synergy_value;
}

ValueGradient value_gradient(const ValueSpec& spec, const ActionProfile& a, std::size_t i) {
    return {individual_derivative(spec.form, a[i]), synergy_derivative(spec.synergy, a, i)};
}

}  // namespace coop
