#pragma once

#include <random>
#include <string>

#include "coop/experiments.hpp"
#include "coop/serialization.hpp"

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(COOP_FIXTURE_DIR) + "/" + name; }

inline coop::Scenario load(const std::string& name) { return coop::io::load_scenario(fixture(name)); }

/// Two actors with a symmetric override D, bounds [0, e].
inline coop::Scenario two_actor(const coop::ValueForm& form, double gamma, double d01, double d10,
                                coop::AppropriationMode mode, double alpha0 = 0.5,
                                coop::SynergyKind synergy = coop::SynergyKind::geometric_mean) {
    coop::Scenario s = coop::symmetric_template(form, gamma, 0.0, mode);
    s.value.synergy = synergy;
    s.bargaining.power = {{coop::ActorId{"A"}, alpha0}, {coop::ActorId{"B"}, 1.0 - alpha0}};
    s.matrix_override->at(0, 1) = d01;
    s.matrix_override->at(1, 0) = d10;
    return s;
}

inline coop::Scenario random_two_actor(std::mt19937_64& rng, bool power, coop::AppropriationMode mode) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> gamma(0.0, 2.5);
    std::uniform_real_distribution<double> alpha(0.1, 0.9);
    const coop::ValueForm form = power ? coop::ValueForm{coop::PowerForm{0.4 + 0.5 * unit(rng)}}
                                       : coop::ValueForm{coop::LogarithmicForm{5.0 + 25.0 * unit(rng)}};
    return two_actor(form, gamma(rng), unit(rng), unit(rng), mode, alpha(rng));
}

}  // namespace testing
