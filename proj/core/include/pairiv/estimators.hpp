#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pairiv/dataset.hpp"
#include "pairiv/delta.hpp"
#include "pairiv/moments.hpp"

namespace pairiv {

// ---------------------------------------------------------------------------
// Estimand catalog
// ---------------------------------------------------------------------------

// All estimands expressible from the given H block:
//   take-up shares        p_at p_sc p_c p_gc p_nt, joints p_at_at p_nt_nt,
//                         and the cross-pair sum p_cross_sum;
//   first stages          first_stage_own first_stage_peer first_stage_naive;
//   itt contrasts         itt_direct_peer0/1 itt_indirect_own0/1 itt_total
//                         itt_naive;
//   local averages (OSN)  mean_y00, mass_y10_compliers,
//                         mass_y01_compliant_peer, mass_y00_compliers,
//                         mass_y00_compliant_peer, mass_y00_nt_pairs;
//   ratio effects (OSN)   late_direct late_indirect late_naive;
//   heterogeneity (OSN)   het_baseline_own het_baseline_peer.
std::vector<Estimand> standard_catalog(const MomentLayout& layout);

std::optional<Estimand> find_estimand(const MomentLayout& layout, const std::string& name);

// ---------------------------------------------------------------------------
// Named operations (thin entry points over the catalog)
// ---------------------------------------------------------------------------

// Marginal type shares, the two identified joint shares, and the identified
// cross-pair sum, with delta-method standard errors. Entries whose assignment
// cells are empty are listed under `omitted`.
struct TypeDistributionEstimate {
    std::vector<EstimateRow> rows;
    std::vector<Omission> omitted;
    bool negative_share = false;  // some point estimate is below zero
};
TypeDistributionEstimate type_distribution(const Moments& m, double ci_level = 0.95);

enum class IttEstimandKind {
    DirectPeer0,   // vary own assignment, peer assignment fixed at 0
    DirectPeer1,   // ... fixed at 1
    IndirectOwn0,  // vary peer assignment, own fixed at 0
    IndirectOwn1,
    Total,         // both assignments 0 -> 1
    Naive,         // own contrast, peer assignment marginalized
};
// Throws EmptyCell / DegenerateDenominator when the required cells are
// missing.
EstimateRow itt(const Moments& m, IttEstimandKind kind, double ci_level = 0.95);

// The one-sided-noncompliance family. All of these throw OSNViolated when the
// moments carry take-up without own assignment.
EstimateReport osn_local_averages(const Moments& m, double ci_level = 0.95);
EstimateRow late_direct(const Moments& m, double ci_level = 0.95);
EstimateRow late_indirect(const Moments& m, double ci_level = 0.95);
EstimateReport baseline_heterogeneity(const Moments& m, double ci_level = 0.95);

// ---------------------------------------------------------------------------
// ITT weight decomposition
// ---------------------------------------------------------------------------

// The three ITT contrasts that decompose into weighted averages of potential
// outcome contrasts over own/peer type combinations.
enum class IttKind { Direct, Indirect, Total };

// A potential-outcome contrast Y(d1, d1') - Y(d0, d0').
struct PoContrast {
    int d1_own, d1_peer, d0_own, d0_peer;
};

// Canonical contrast order used for all weight tables.
inline constexpr std::array<PoContrast, 5> kWeightContrasts = {{
    {1, 0, 0, 0},  // Y(1,0) - Y(0,0)
    {1, 1, 0, 0},  // Y(1,1) - Y(0,0)
    {1, 1, 0, 1},  // Y(1,1) - Y(0,1)
    {0, 1, 0, 0},  // Y(0,1) - Y(0,0)
    {1, 1, 1, 0},  // Y(1,1) - Y(1,0)
}};

// The type-combination event carrying each contrast's weight.
struct WeightEvent {
    std::vector<ComplianceType> own;
    std::vector<ComplianceType> peer;
};

const std::array<WeightEvent, 5>& itt_weight_events(IttKind kind);

struct WeightTable {
    IttKind kind;
    std::array<double, 5> weights;    // P[event], canonical contrast order
    double raw_sum = 0.0;             // sum of weights (< 1 in general)
    double first_stage = 0.0;         // rescaling denominator
    std::array<double, 5> rescaled;   // weights / first_stage
    double rescaled_sum = 0.0;
};

// Weights of the ITT decomposition for a given joint type distribution.
// Throws ZeroFirstStage when the rescaling denominator is below 1e-12.
WeightTable itt_weight_decomposition(const JointTypeDistribution& dist, IttKind kind);

// ---------------------------------------------------------------------------
// Two-stage least squares (spillover regression)
// ---------------------------------------------------------------------------

struct TslsEstimate {
    std::vector<EstimateRow> rows;  // beta0, beta1, beta2 [, beta3]
    std::vector<Omission> omitted;
    bool beta3_identified = false;
    bool osn_warning = false;  // d=1, z=0 records present: causal reading invalid
    int n_groups = 0;
};

// Exactly-identified IV fit of y on (1, D_own, D_peer, D_own*D_peer) using
// the assignment-cell indicators as instruments, with cluster-robust standard
// errors at the household level. The interaction is dropped (and beta3
// unreported) when cell (1,1) is empty or carries no joint take-up.
TslsEstimate tsls_spillover(const Dataset& ds, double ci_level = 0.95);

// ---------------------------------------------------------------------------
// Conditional-on-observables estimands (discrete strata)
// ---------------------------------------------------------------------------

enum class GSpec { Y, XIndicator, YXIndicator };

struct ConditionalOptions {
    GSpec g = GSpec::Y;
    double ci_level = 0.95;
    int workers = 1;
    // When set, inverse-probability weights use these known per-stratum
    // assignment designs instead of estimated within-stratum cell shares.
    std::optional<std::vector<std::pair<std::string, AssignmentDesign>>> known_design;
};

// Inverse-probability-weighted estimands over discrete covariate strata, plus
// per-stratum take-up shares p_c_x_<label>, p_gc_x_<label>, p_nt_x_<label>.
EstimateReport conditional_estimands(const Dataset& ds, const ConditionalOptions& opts = {});

// Building blocks shared with the oracle: the conditional estimand list for a
// stratified layout.
std::vector<Estimand> conditional_catalog(const MomentLayout& layout, GSpec g,
                                          const std::optional<std::vector<std::pair<std::string, AssignmentDesign>>>&
                                              known_design);

// ---------------------------------------------------------------------------
// Full estimation pipeline
// ---------------------------------------------------------------------------

struct EstimateOptions {
    double ci_level = 0.95;
    bool clamp_shares = false;
    int workers = 1;
    std::vector<std::string> estimand_filter;  // empty => everything; "*" suffix = prefix match
    std::optional<std::vector<std::pair<std::string, AssignmentDesign>>> known_design;
};

// Runs the standard catalog, the spillover 2SLS, and (when strata are
// present) the conditional estimands; merges everything into one report with
// per-estimand omission reasons and the first-stage F statistic in meta.
EstimateReport estimate_all(const Dataset& ds, const EstimateOptions& opts = {});

}  // namespace pairiv
