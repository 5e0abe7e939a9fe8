#pragma once

#include <cstddef>
#include <vector>

#include "coop/model.hpp"

namespace coop {

struct ValueBreakdown {
    std::vector<double> individual;  // f_i(a_i), canonical order
    double synergy_raw = 0.0;        // g(a)
    double synergy_value = 0.0;      // gamma * g(a)
    double total = 0.0;              // V(a)
};

/// f(a): a^beta (0^beta = 0) or theta * ln(1 + a). Throws DomainError for a < 0.
double individual_value(const ValueForm& form, double a);

/// f'(a). Throws BoundaryDerivative at a = 0 under the power form.
double individual_derivative(const ValueForm& form, double a);

/// g(a): geometric mean, minimum, or sum of the actions.
double synergy(SynergyKind kind, const ActionProfile& a);

/// dg/da_i. Minimum ties split the unit subgradient evenly among the minimizers.
/// Throws BoundaryDerivative at a_i = 0 under the geometric mean.
double synergy_derivative(SynergyKind kind, const ActionProfile& a, std::size_t i);

ValueBreakdown total_value(const ValueSpec& spec, const ActionProfile& a);

/// V(a) - sum_i V({a_i}), which reduces to gamma * g(a).
double superadditivity_gap(const ValueSpec& spec, const ActionProfile& a);

struct ValueGradient {
    double df = 0.0;
    double dg = 0.0;
};

ValueGradient value_gradient(const ValueSpec& spec, const ActionProfile& a, std::size_t i);

}  // namespace coop
