#pragma once

#include <string>
#include <vector>

#include "coop/model.hpp"

namespace coop {

/// 1/n for n perfect-substitute providers. Throws DomainError for n = 0.
double criticality_from_alternatives(int n);

/// Importance-weighted, criticality-moderated share of actor i's dependums that
/// rely on actor j. Actors without dependums (or zero total weight) yield 0.
double compute_coefficient(const DependencyNetwork& network, const ActorId& i, const ActorId& j);

/// Full matrix in canonical actor order, zero diagonal.
InterdependenceMatrix compute_matrix(const DependencyNetwork& network);

struct AsymmetryRow {
    ActorId first;
    ActorId second;
    double forward = 0.0;   // D[first][second]
    double backward = 0.0;  // D[second][first]
    double imbalance = 0.0;
};

/// One row per unordered pair, by descending imbalance (ties keep canonical pair order).
std::vector<AsymmetryRow> asymmetry_report(const InterdependenceMatrix& m);

/// Header row/column of actor ids, 12 significant digits, LF line endings.
std::string matrix_to_csv(const InterdependenceMatrix& m);

/// Every entry multiplied by k. Throws DomainError if any result leaves [0,1].
InterdependenceMatrix scaled(const InterdependenceMatrix& m, double k);

}  // namespace coop
