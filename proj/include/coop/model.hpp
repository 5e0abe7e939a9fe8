#pragma once

// Shared domain vocabulary: actors, dependums, dependency links, scenarios.

#include <compare>
#include <initializer_list>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "coop/errors.hpp"

namespace coop {

struct ActorId {
    std::string value;

    ActorId() = default;
    explicit ActorId(std::string v) : value(std::move(v)) {}
    ActorId(const char* v) : value(v) {}

    auto operator<=>(const ActorId&) const = default;
    bool operator==(const ActorId&) const = default;
};

enum class DependumKind { goal, task, resource, softgoal };

struct Dependum {
    std::string id;
    DependumKind kind = DependumKind::goal;
    double importance_weight = 0.0;

    bool operator==(const Dependum&) const = default;
};

struct LinkKey {
    ActorId depender;
    ActorId dependee;
    std::string dependum_id;

    auto operator<=>(const LinkKey&) const = default;
    bool operator==(const LinkKey&) const = default;
};

struct DependencyLink {
    ActorId depender;
    ActorId dependee;
    std::string dependum_id;
    double criticality = 1.0;
    std::optional<int> alternatives_count;
    // Permits a criticality other than 1/alternatives_count (dependee has advantages).
    bool criticality_override = false;

    LinkKey key() const { return {depender, dependee, dependum_id}; }
    bool operator==(const DependencyLink&) const = default;
};

struct DependencyNetwork {
    std::vector<ActorId> actors;
    std::map<ActorId, std::vector<Dependum>> dependums;
    std::vector<DependencyLink> links;

    const std::vector<Dependum>& dependums_of(const ActorId& actor) const;
    bool has_actor(const ActorId& actor) const;
    bool operator==(const DependencyNetwork&) const = default;
};

/// N x N structural coupling coefficients, row i = depender, column j = dependee.
struct InterdependenceMatrix {
    std::vector<ActorId> order;
    std::vector<double> entries;  // row-major

    InterdependenceMatrix() = default;
    explicit InterdependenceMatrix(std::vector<ActorId> actors);

    std::size_t size() const noexcept { return order.size(); }
    double at(std::size_t i, std::size_t j) const { return entries[i * order.size() + j]; }
    double& at(std::size_t i, std::size_t j) { return entries[i * order.size() + j]; }
    std::size_t index_of(const ActorId& actor) const;
    double at(const ActorId& i, const ActorId& j) const { return at(index_of(i), index_of(j)); }

    bool operator==(const InterdependenceMatrix&) const = default;
};

struct PowerForm {
    double beta = 0.75;
    bool operator==(const PowerForm&) const = default;
};

struct LogarithmicForm {
    double theta = 20.0;
    bool operator==(const LogarithmicForm&) const = default;
};

using ValueForm = std::variant<PowerForm, LogarithmicForm>;

enum class SynergyKind { geometric_mean, minimum, additive };

struct ValueSpec {
    ValueForm form = PowerForm{};
    SynergyKind synergy = SynergyKind::geometric_mean;
    double gamma = 0.0;

    bool operator==(const ValueSpec&) const = default;
};

struct BargainingSpec {
    std::map<ActorId, double> power;
    bool operator==(const BargainingSpec&) const = default;
};

struct LinearCost {
    bool operator==(const LinearCost&) const = default;
};

struct QuadraticCost {
    double c = 1.0;
    bool operator==(const QuadraticCost&) const = default;
};

using CostModel = std::variant<LinearCost, QuadraticCost>;

enum class AppropriationMode { separable, pooled };

struct ActionBounds {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const ActionBounds&) const = default;
};

struct Scenario {
    DependencyNetwork network;
    ValueSpec value;
    BargainingSpec bargaining;
    std::map<ActorId, double> endowments;
    // Actors absent from this map get [0, e_i].
    std::map<ActorId, ActionBounds> action_bounds;
    CostModel cost_model = LinearCost{};
    AppropriationMode appropriation_mode = AppropriationMode::separable;
    std::optional<InterdependenceMatrix> matrix_override;

    ActionBounds bounds_of(const ActorId& actor) const;
    bool operator==(const Scenario&) const = default;
};

/// Actions in canonical actor order.
struct ActionProfile {
    std::vector<double> actions;

    ActionProfile() = default;
    explicit ActionProfile(std::vector<double> a) : actions(std::move(a)) {}
    ActionProfile(std::initializer_list<double> a) : actions(a) {}

    std::size_t size() const noexcept { return actions.size(); }
    double operator[](std::size_t i) const { return actions[i]; }
    double& operator[](std::size_t i) { return actions[i]; }
    bool operator==(const ActionProfile&) const = default;
};

std::vector<Violation> validate_scenario(const Scenario& s);

/// Lexicographic by id; the layout for every matrix, vector, and output file.
std::vector<ActorId> canonical_actor_order(const Scenario& s);
std::vector<ActorId> canonical_actor_order(const DependencyNetwork& network);

std::string to_string(DependumKind kind);
std::string to_string(SynergyKind kind);
std::string to_string(AppropriationMode mode);
DependumKind dependum_kind_from_string(const std::string& s);
SynergyKind synergy_kind_from_string(const std::string& s);
AppropriationMode appropriation_mode_from_string(const std::string& s);

}  // namespace coop
