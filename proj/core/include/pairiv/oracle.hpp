#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "pairiv/estimators.hpp"
#include "pairiv/model.hpp"
#include "pairiv/moments.hpp"

namespace pairiv {

// Statistics whose population expectation conditional on an assignment cell
// the oracle can evaluate exactly (enumeration over the 25 type pairs).
enum class CellStat {
    Y,
    DOwn,
    DPeer,
    YDOwn,
    YDPeer,
    YNotOwn,
    YNotPeer,
    DBoth,
    DNeither,
    YDNeither,
};

// Exact E[stat | Z = cell] for one stratum: treatments come from the take-up
// table, outcome means from the grid; zero-mean noise drops out of every
// supported statistic.
double population_expectation(const StratumSpec& st, int zcell, CellStat stat);

// Exact population counterpart of the stacked moment vector for a layout.
// For stratified specs the unstratified layout gives pooled moments.
Eigen::VectorXd population_moments(const DgpSpec& spec, const MomentLayout& layout);

// Named exact values of every estimand the estimation pipeline can report
// (the probability limits of the sample estimators under this DGP), with
// non-identified estimands listed under `omitted` with the same machine
// readable reasons the estimators would raise.
struct PopulationTruth {
    std::map<std::string, double> values;
    std::map<std::string, std::string> omitted;

    bool has(const std::string& name) const { return values.count(name) > 0; }
    double at(const std::string& name) const { return values.at(name); }
};

PopulationTruth truth(const DgpSpec& spec);

// One algebraic identity checked by two independent computations.
struct IdentityCheck {
    std::string name;
    bool applicable = true;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    bool pass = true;
    std::string note;
};

struct IdentityReport {
    std::vector<IdentityCheck> checks;
    bool all_pass = true;
    double max_residual = 0.0;
    int n_applicable = 0;
};

// Brute-force verification of the decomposition and identification algebra:
// the three ITT decompositions over type-combination events, the naive-ITT
// three-term combination, the one-sided local-average equalities, the ratio
// and heterogeneity closed forms, the spillover-regression coefficients
// (including the interaction coefficient's combination form), the type-share
// equation system, and the stratified inverse-probability identities.
// Failures are reported, never thrown.
IdentityReport verify_identities(const DgpSpec& spec, double tol = 1e-10);

}  // namespace pairiv
