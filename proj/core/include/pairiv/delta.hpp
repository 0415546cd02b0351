#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pairiv/moments.hpp"

namespace pairiv {

// Denominator guards for estimand transforms. Guards are enforced only at the
// base point mu_hat; finite-difference evaluations reuse the same transform
// with enforcement off.
class GuardContext {
public:
    static constexpr double kDenominatorGuard = 1e-8;

    explicit GuardContext(bool enforce) : enforce_(enforce) {}

    // Assignment-cell probability used as a denominator: zero probability is
    // an empty cell, a near-zero one a degenerate denominator.
    double cell(int zcell, double v) const {
        if (enforce_) {
            if (v <= 0.0) throw empty_cell_error(zcell_own(zcell), zcell_peer(zcell));
            if (v < kDenominatorGuard) {
                throw degenerate_denominator_error("cell" + zcell_label(zcell));
            }
        }
        return v;
    }

    double stratum_cell(const std::string& stratum, int zcell, double v) const {
        if (enforce_) {
            if (v <= 0.0) {
                throw empty_stratum_cell_error(stratum, zcell_own(zcell), zcell_peer(zcell));
            }
            if (v < kDenominatorGuard) {
                throw degenerate_propensity_error(stratum, zcell_own(zcell), zcell_peer(zcell));
            }
        }
        return v;
    }

    double den(std::string_view name, double v) const {
        if (enforce_ && std::abs(v) < kDenominatorGuard) {
            throw degenerate_denominator_error(name);
        }
        return v;
    }

private:
    bool enforce_;
};

// A named smooth transform of the moment vector.
struct Estimand {
    std::string name;
    std::string formula;  // which identification formula produced it
    bool requires_osn = false;
    std::function<double(const MomentView&, const GuardContext&)> fn;
};

struct EstimateRow {
    std::string name;
    double value = 0.0;
    double se = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::string formula;
};

struct Omission {
    std::string name;
    std::string reason;  // machine-readable condition, e.g. "EmptyCell(1,1)"
};

struct EstimateReport {
    std::vector<EstimateRow> rows;
    std::vector<Omission> omitted;
    std::vector<std::string> warnings;
    int n_groups = 0;
    double ci_level = 0.95;
    std::map<std::string, double> meta_num;
    std::map<std::string, std::string> meta_str;

    const EstimateRow* find(const std::string& name) const;
};

struct DeltaOptions {
    double ci_level = 0.95;
};

// value = f(mu_hat); variance = grad' (sigma_hat / G) grad with the gradient
// taken by central differences, per-coordinate step 1e-6 * max(1, |mu_k|).
// Throws the transform's guard errors (EmptyCell, DegenerateDenominator, ...).
EstimateRow delta_method(const Moments& m, const Estimand& e, const DeltaOptions& opts = {});

// Runs a batch of estimands, turning guard errors into omissions. Estimands
// with requires_osn are omitted with reason "OSNViolated" when the moment
// vector carries any d=1, z=0 mass.
EstimateReport run_estimands(const Moments& m, const std::vector<Estimand>& estimands,
                             const DeltaOptions& opts = {});

// Two-sided normal critical value for a confidence level in (0,1).
double normal_critical_value(double ci_level);

}  // namespace pairiv
