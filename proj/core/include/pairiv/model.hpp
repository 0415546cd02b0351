#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairiv/errors.hpp"

namespace pairiv {

// ---------------------------------------------------------------------------
// Compliance types
// ---------------------------------------------------------------------------

// The five monotone take-up responses to (own, peer) assignment in a
// two-person group, ordered by decreasing likelihood of being treated.
enum class ComplianceType : int {
    AlwaysTaker = 0,    // treated regardless of assignments
    SocialComplier = 1, // treated as soon as anyone in the group is assigned
    Complier = 2,       // treated iff own assignment is 1
    GroupComplier = 3,  // treated only when both are assigned
    NeverTaker = 4,     // never treated
};

inline constexpr int kNumTypes = 5;

inline constexpr std::array<ComplianceType, kNumTypes> kAllTypes = {
    ComplianceType::AlwaysTaker, ComplianceType::SocialComplier, ComplianceType::Complier,
    ComplianceType::GroupComplier, ComplianceType::NeverTaker};

const char* to_string(ComplianceType t);
std::optional<ComplianceType> compliance_type_from_string(std::string_view s);

// Take-up of a unit of type `t` when its own assignment is `z` and its peer's
// is `z_peer`.
constexpr int potential_treatment(ComplianceType t, int z, int z_peer) {
    switch (t) {
        case ComplianceType::AlwaysTaker: return 1;
        case ComplianceType::SocialComplier: return (z | z_peer) ? 1 : 0;
        case ComplianceType::Complier: return z;
        case ComplianceType::GroupComplier: return (z & z_peer);
        case ComplianceType::NeverTaker: return 0;
    }
    return 0;
}

// Inverse of the take-up table: maps a monotone profile
// (d11 >= d10 >= d01 >= d00) back to its type; nullopt for the 11
// non-monotone profiles.
std::optional<ComplianceType> type_from_profile(int d11, int d10, int d01, int d00);

// ---------------------------------------------------------------------------
// Assignment cells
// ---------------------------------------------------------------------------

// Assignment cells (z_own, z_peer) are indexed (0,0) -> 0, (1,0) -> 1,
// (0,1) -> 2, (1,1) -> 3 throughout the library.
inline constexpr int kNumCells = 4;

constexpr int zcell_index(int z_own, int z_peer) { return z_own + 2 * z_peer; }
constexpr int zcell_own(int cell) { return cell & 1; }
constexpr int zcell_peer(int cell) { return cell >> 1; }
// Swap the roles of the two units: (1,0) <-> (0,1).
constexpr int zcell_mirror(int cell) { return ((cell & 1) << 1) | (cell >> 1); }

std::string zcell_label(int cell);  // "(z,z')"

// ---------------------------------------------------------------------------
// Joint type distribution
// ---------------------------------------------------------------------------

// Probability table over the pair (own type, peer type). Units within a group
// are identically distributed, so the table is symmetric: p(a,b) = p(b,a).
// Immutable after construction.
class JointTypeDistribution {
public:
    static constexpr double kTol = 1e-12;

    // Validates nonnegativity, normalization and symmetry (all at 1e-12).
    static JointTypeDistribution from_table(const std::array<double, 25>& p);
    // Independent types with the given marginal shares (AT, SC, C, GC, NT).
    static JointTypeDistribution independent(const std::array<double, 5>& marginals);
    static JointTypeDistribution uniform();

    double p(ComplianceType a, ComplianceType b) const {
        return p_[static_cast<int>(a) * kNumTypes + static_cast<int>(b)];
    }
    double marginal(ComplianceType a) const;
    std::array<double, 5> marginals() const;

    // Probability of the product event {own in A} x {peer in B}.
    double event(const std::vector<ComplianceType>& own,
                 const std::vector<ComplianceType>& peer) const;

    // True when P[AT] = P[SC] = 0 (one-sided noncompliance holds).
    bool one_sided() const;

    const std::array<double, 25>& table() const { return p_; }

private:
    JointTypeDistribution() : p_{} {}
    std::array<double, 25> p_;
};

// ---------------------------------------------------------------------------
// Outcome model
// ---------------------------------------------------------------------------

enum class NoiseFamily { None, Gaussian, Bernoulli };

struct NoiseSpec {
    NoiseFamily family = NoiseFamily::None;
    double scale = 0.0;  // Gaussian standard deviation
    double rho = 0.0;    // within-pair noise correlation
};

// Mean outcome tabulated on the full (own type, peer type, own treatment,
// peer treatment) grid. Bernoulli outcomes use the mean, clamped to [0,1], as
// the success probability; the implied noise has zero mean by construction.
class OutcomeModel {
public:
    OutcomeModel();  // all-zero grid, no noise
    OutcomeModel(std::array<double, 100> grid, NoiseSpec noise);

    static OutcomeModel from_function(
        const std::function<double(ComplianceType, ComplianceType, int, int)>& mean,
        NoiseSpec noise = {});

    static constexpr int grid_index(ComplianceType a, ComplianceType b, int d, int d_peer) {
        return ((static_cast<int>(a) * kNumTypes + static_cast<int>(b)) * 2 + d) * 2 + d_peer;
    }

    double mean(ComplianceType a, ComplianceType b, int d, int d_peer) const {
        return grid_[grid_index(a, b, d, d_peer)];
    }

    // Bernoulli means are clamped to [0,1]; other families pass through.
    double effective_mean(ComplianceType a, ComplianceType b, int d, int d_peer) const;

    const NoiseSpec& noise() const { return noise_; }

    // Returns warnings (e.g. Bernoulli means clamped); throws on hard errors
    // (rho outside [-1,1], negative scale).
    std::vector<std::string> validate() const;

private:
    std::array<double, 100> grid_;
    NoiseSpec noise_;
};

// ---------------------------------------------------------------------------
// Assignment design
// ---------------------------------------------------------------------------

// Distribution of the assignment pair (Z_own, Z_peer). Units within a group
// are exchangeable, so pi(1,0) = pi(0,1) is required unless explicitly
// overridden at construction.
class AssignmentDesign {
public:
    static constexpr double kTol = 1e-12;

    static AssignmentDesign from_probs(double p00, double p10, double p01, double p11,
                                       bool allow_asymmetric = false);

    double prob(int cell) const { return pi_[cell]; }
    double prob(int z_own, int z_peer) const { return pi_[zcell_index(z_own, z_peer)]; }

    double own_assigned_mass(int z_own) const {
        return z_own ? pi_[1] + pi_[3] : pi_[0] + pi_[2];
    }

private:
    AssignmentDesign() : pi_{} {}
    std::array<double, 4> pi_;
};

// ---------------------------------------------------------------------------
// Data-generating process
// ---------------------------------------------------------------------------

// One stratum of a DGP: a joint type distribution, an outcome grid, and an
// assignment design. Unstratified processes are a single stratum with
// share 1 and an empty label.
struct StratumSpec {
    std::string label;
    double share = 1.0;
    JointTypeDistribution types = JointTypeDistribution::uniform();
    OutcomeModel outcomes;
    AssignmentDesign design = AssignmentDesign::from_probs(0.25, 0.25, 0.25, 0.25);
};

struct DgpSpec {
    std::vector<StratumSpec> strata;  // one entry when unstratified
    int groups = 0;
    std::uint64_t seed = 0;

    bool stratified() const { return strata.size() > 1; }
    const StratumSpec& single() const { return strata.front(); }

    // Throws Error(InvalidSpec) on structural problems; returns warnings.
    std::vector<std::string> validate() const;
};

}  // namespace pairiv
