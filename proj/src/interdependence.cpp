#include "coop/interdependence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coop/format.hpp"

namespace coop {

double criticality_from_alternatives(int n) {
    if (n < 1) throw DomainError("alternatives count must be >= 1, got " + std::to_string(n));
    return 1.0 / static_cast<double>(n);
}

double compute_coefficient(const DependencyNetwork& network, const ActorId& i, const ActorId& j) {
    if (!network.has_actor(i)) throw LookupError("unknown actor '" + i.value + "'");
    if (!network.has_actor(j)) throw LookupError("unknown actor '" + j.value + "'");
    if (i == j) return 0.0;

    const auto& owned = network.dependums_of(i);
    double total = 0.0;
    for (const auto& d : owned) total += d.importance_weight;
    if (owned.empty() || !(total > 0.0)) return 0.0;

    double numerator = 0.0;
    for (const auto& d : owned) {
        for (const auto& link : network.links) {
            if (link.depender == i && link.dependee == j && link.dependum_id == d.id) {
                numerator += d.importance_weight * link.criticality;
            }
        }
    }
    return numerator / total;
}

InterdependenceMatrix compute_matrix(const DependencyNetwork& network) {
    InterdependenceMatrix m(canonical_actor_order(network));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            m.at(i, j) = i == j ? 0.0 : compute_coefficient(network, m.order[i], m.order[j]);
        }
    }
    return m;
}

std::vector<AsymmetryRow> asymmetry_report(const InterdependenceMatrix& m) {
    std::vector<AsymmetryRow> rows;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            const double f = m.at(i, j);
            const double b = m.at(j, i);
            rows.push_back({m.order[i], m.order[j], f, b, std::abs(f - b)});
        }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const AsymmetryRow& a, const AsymmetryRow& b) { return a.imbalance > b.imbalance; });
    return rows;
}

std::string matrix_to_csv(const InterdependenceMatrix& m) {
    std::ostringstream os;
    os << "actor";
    for (const auto& a : m.order) os << ',' << a.value;
    os << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        os << m.order[i].value;
        for (std::size_t j = 0; j < m.size(); ++j) os << ',' << format_g12(m.at(i, j));
        os << '\n';
    }
    return os.str();
}

InterdependenceMatrix scaled(const InterdependenceMatrix& m, double k) {
    InterdependenceMatrix out = m;
    for (auto& v : out.entries) {
        v *= k;
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError("scaled interdependence entry leaves [0,1] (scale " + format_g12(k) + ")");
        }
    }
    return out;
}

}  // namespace coop
