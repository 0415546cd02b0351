#include "pairiv/model.hpp"

#include <algorithm>
#include <cmath>

namespace pairiv {

const char* to_string(ComplianceType t) {
    switch (t) {
        case ComplianceType::AlwaysTaker: return "AT";
        case ComplianceType::SocialComplier: return "SC";
        case ComplianceType::Complier: return "C";
        case ComplianceType::GroupComplier: return "GC";
        case ComplianceType::NeverTaker: return "NT";
    }
    return "?";
}

std::optional<ComplianceType> compliance_type_from_string(std::string_view s) {
    for (ComplianceType t : kAllTypes) {
        if (s == to_string(t)) return t;
    }
    return std::nullopt;
}

std::optional<ComplianceType> type_from_profile(int d11, int d10, int d01, int d00) {
    if (!(d11 >= d10 && d10 >= d01 && d01 >= d00)) return std::nullopt;
    for (ComplianceType t : kAllTypes) {
        if (potential_treatment(t, 1, 1) == d11 && potential_treatment(t, 1, 0) == d10 &&
            potential_treatment(t, 0, 1) == d01 && potential_treatment(t, 0, 0) == d00) {
            return t;
        }
    }
    return std::nullopt;
}

std::string zcell_label(int cell) {
    return "(" + std::to_string(zcell_own(cell)) + "," + std::to_string(zcell_peer(cell)) + ")";
}

// ---------------------------------------------------------------------------
// JointTypeDistribution
// ---------------------------------------------------------------------------

JointTypeDistribution JointTypeDistribution::from_table(const std::array<double, 25>& p) {
    JointTypeDistribution d;
    double total = 0.0;
    for (int a = 0; a < kNumTypes; ++a) {
        for (int b = 0; b < kNumTypes; ++b) {
            const double v = p[a * kNumTypes + b];
            if (v < -kTol) {
                throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                            "negative joint type probability at (" +
                                std::string(to_string(kAllTypes[a])) + "," +
                                to_string(kAllTypes[b]) + ")");
            }
            if (std::abs(v - p[b * kNumTypes + a]) > kTol) {
                throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                            "joint type table is not symmetric at (" +
                                std::string(to_string(kAllTypes[a])) + "," +
                                to_string(kAllTypes[b]) + ")");
            }
            total += v;
        }
    }
    if (std::abs(total - 1.0) > kTol) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                    "joint type table sums to " + std::to_string(total));
    }
    // Exact symmetrization and clamping of -0-ish entries within tolerance.
    for (int a = 0; a < kNumTypes; ++a) {
        for (int b = 0; b <= a; ++b) {
            const double v =
                std::max(0.0, 0.5 * (p[a * kNumTypes + b] + p[b * kNumTypes + a]));
            d.p_[a * kNumTypes + b] = v;
            d.p_[b * kNumTypes + a] = v;
        }
    }
    return d;
}

JointTypeDistribution JointTypeDistribution::independent(const std::array<double, 5>& m) {
    std::array<double, 25> p{};
    for (int a = 0; a < kNumTypes; ++a) {
        for (int b = 0; b < kNumTypes; ++b) {
            p[a * kNumTypes + b] = m[a] * m[b];
        }
    }
    return from_table(p);
}

JointTypeDistribution JointTypeDistribution::uniform() {
    std::array<double, 25> p{};
    p.fill(1.0 / 25.0);
    return from_table(p);
}

double JointTypeDistribution::marginal(ComplianceType a) const {
    double s = 0.0;
    for (int b = 0; b < kNumTypes; ++b) s += p_[static_cast<int>(a) * kNumTypes + b];
    return s;
}

std::array<double, 5> JointTypeDistribution::marginals() const {
    std::array<double, 5> m{};
    for (int a = 0; a < kNumTypes; ++a) m[a] = marginal(kAllTypes[a]);
    return m;
}

double JointTypeDistribution::event(const std::vector<ComplianceType>& own,
                                    const std::vector<ComplianceType>& peer) const {
    double s = 0.0;
    for (ComplianceType a : own) {
        for (ComplianceType b : peer) s += p(a, b);
    }
    return s;
}

bool JointTypeDistribution::one_sided() const {
    return marginal(ComplianceType::AlwaysTaker) <= kTol &&
           marginal(ComplianceType::SocialComplier) <= kTol;
}

// ---------------------------------------------------------------------------
// OutcomeModel
// ---------------------------------------------------------------------------

OutcomeModel::OutcomeModel() : grid_{}, noise_{} {}

OutcomeModel::OutcomeModel(std::array<double, 100> grid, NoiseSpec noise)
    : grid_(grid), noise_(noise) {}

OutcomeModel OutcomeModel::from_function(
    const std::function<double(ComplianceType, ComplianceType, int, int)>& mean,
    NoiseSpec noise) {
    std::array<double, 100> grid{};
    for (ComplianceType a : kAllTypes) {
        for (ComplianceType b : kAllTypes) {
            for (int d = 0; d < 2; ++d) {
                for (int dp = 0; dp < 2; ++dp) {
                    grid[grid_index(a, b, d, dp)] = mean(a, b, d, dp);
                }
            }
        }
    }
    return OutcomeModel(grid, noise);
}

double OutcomeModel::effective_mean(ComplianceType a, ComplianceType b, int d, int d_peer) const {
    const double m = mean(a, b, d, d_peer);
    if (noise_.family == NoiseFamily::Bernoulli) return std::clamp(m, 0.0, 1.0);
    return m;
}

std::vector<std::string> OutcomeModel::validate() const {
    if (!(noise_.rho >= -1.0 && noise_.rho <= 1.0)) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "noise rho outside [-1,1]");
    }
    if (noise_.family == NoiseFamily::Gaussian && noise_.scale < 0.0) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "negative noise scale");
    }
    std::vector<std::string> warnings;
    if (noise_.family == NoiseFamily::Bernoulli) {
        for (double v : grid_) {
            if (v < 0.0 || v > 1.0) {
                warnings.push_back("outcome mean grid clamped to [0,1] for Bernoulli outcomes");
                break;
            }
        }
    }
    for (double v : grid_) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "non-finite outcome mean");
        }
    }
    return warnings;
}

// ---------------------------------------------------------------------------
// AssignmentDesign
// ---------------------------------------------------------------------------

AssignmentDesign AssignmentDesign::from_probs(double p00, double p10, double p01, double p11,
                                              bool allow_asymmetric) {
    const std::array<double, 4> pi = {p00, p10, p01, p11};
    double total = 0.0;
    for (double v : pi) {
        if (v < -kTol) {
            throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "negative assignment probability");
        }
        total += v;
    }
    if (std::abs(total - 1.0) > kTol) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                    "assignment probabilities sum to " + std::to_string(total));
    }
    if (!allow_asymmetric && std::abs(p10 - p01) > kTol) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                    "assignment design is not exchangeable: pi(1,0) != pi(0,1)");
    }
    AssignmentDesign d;
    for (int c = 0; c < 4; ++c) d.pi_[c] = std::max(0.0, pi[c]);
    return d;
}

// ---------------------------------------------------------------------------
// DgpSpec
// ---------------------------------------------------------------------------

std::vector<std::string> DgpSpec::validate() const {
    if (strata.empty()) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "DGP has no strata");
    }
    if (groups < 1) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "group count must be >= 1");
    }
    std::vector<std::string> warnings;
    double total_share = 0.0;
    for (const StratumSpec& st : strata) {
        if (st.share < 0.0) {
            throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "negative stratum share");
        }
        total_share += st.share;
        auto w = st.outcomes.validate();
        warnings.insert(warnings.end(), w.begin(), w.end());
    }
    if (std::abs(total_share - 1.0) > 1e-12) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                    "stratum shares sum to " + std::to_string(total_share));
    }
    if (stratified()) {
        for (const StratumSpec& st : strata) {
            if (st.label.empty()) {
                throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                            "stratified DGP has an unlabeled stratum");
            }
        }
    }
    return warnings;
}

}  // namespace pairiv
