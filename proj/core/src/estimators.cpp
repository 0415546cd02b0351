#include "pairiv/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

namespace pairiv {

namespace {

constexpr int k00 = zcell_index(0, 0);
constexpr int k10 = zcell_index(1, 0);
constexpr int k01 = zcell_index(0, 1);
constexpr int k11 = zcell_index(1, 1);

using MV = MomentView;
using GCtx = GuardContext;

double cellp(const MV& m, const GCtx& g, int zc) { return g.cell(zc, m.cell(0, zc)); }
double e_y(const MV& m, const GCtx& g, int zc) { return m.y(0, zc) / cellp(m, g, zc); }
double e_d_own(const MV& m, const GCtx& g, int zc) { return m.d_own(0, zc) / cellp(m, g, zc); }
double e_d_peer(const MV& m, const GCtx& g, int zc) { return m.d_peer(0, zc) / cellp(m, g, zc); }

double naive_itt(const MV& m, const GCtx& g) {
    const double mass1 = g.den("p_z_own_1", m.cell(0, k10) + m.cell(0, k11));
    const double mass0 = g.den("p_z_own_0", m.cell(0, k00) + m.cell(0, k01));
    return (m.y(0, k10) + m.y(0, k11)) / mass1 - (m.y(0, k00) + m.y(0, k01)) / mass0;
}

double naive_first_stage(const MV& m, const GCtx& g) {
    const double mass1 = g.den("p_z_own_1", m.cell(0, k10) + m.cell(0, k11));
    const double mass0 = g.den("p_z_own_0", m.cell(0, k00) + m.cell(0, k01));
    return (m.d_own(0, k10) + m.d_own(0, k11)) / mass1 -
           (m.d_own(0, k00) + m.d_own(0, k01)) / mass0;
}

}  // namespace

std::vector<Estimand> standard_catalog(const MomentLayout& layout) {
    const bool has_d = layout.block != HBlock::IttOnly;
    const bool full = layout.block == HBlock::Full8;
    const bool has11 = layout.n_cells() == 4;

    std::vector<Estimand> out;
    auto add = [&](std::string name, std::string formula, bool osn,
                   std::function<double(const MV&, const GCtx&)> fn) {
        out.push_back(Estimand{std::move(name), std::move(formula), osn, std::move(fn)});
    };

    // Compliance-type shares from take-up cell means.
    if (has_d) {
        add("p_at", "type share from take-up contrasts", false,
            [](const MV& m, const GCtx& g) { return e_d_own(m, g, k00); });
        add("p_sc", "type share from take-up contrasts", false, [](const MV& m, const GCtx& g) {
            return e_d_own(m, g, k01) - e_d_own(m, g, k00);
        });
        add("p_c", "type share from take-up contrasts", false, [](const MV& m, const GCtx& g) {
            return e_d_own(m, g, k10) - e_d_own(m, g, k01);
        });
    }
    if (has_d && has11) {
        add("p_gc", "type share from take-up contrasts", false, [](const MV& m, const GCtx& g) {
            return e_d_own(m, g, k11) - e_d_own(m, g, k10);
        });
        // The never-taker share is the residual of the other four, summed in
        // catalog order, so the five reported shares sum to one exactly.
        add("p_nt", "type share (residual)", false, [](const MV& m, const GCtx& g) {
            const double at = e_d_own(m, g, k00);
            const double sc = e_d_own(m, g, k01) - e_d_own(m, g, k00);
            const double c = e_d_own(m, g, k10) - e_d_own(m, g, k01);
            const double gc = e_d_own(m, g, k11) - e_d_own(m, g, k10);
            return 1.0 - (((at + sc) + c) + gc);
        });
    }
    if (full) {
        add("p_at_at", "joint type share from joint take-up", false,
            [](const MV& m, const GCtx& g) { return m.d_both(0, k00) / cellp(m, g, k00); });
        if (has11) {
            add("p_nt_nt", "joint type share from joint take-up", false,
                [](const MV& m, const GCtx& g) { return m.d_neither(0, k11) / cellp(m, g, k11); });
        }
        add("p_cross_sum", "cross-pair type sum from the take-up equation system", false,
            [](const MV& m, const GCtx& g) { return m.d_own_not_peer(0, k01) / cellp(m, g, k01); });
    }

    // First stages.
    if (has_d) {
        add("first_stage_own", "take-up contrast", false, [](const MV& m, const GCtx& g) {
            return e_d_own(m, g, k10) - e_d_own(m, g, k00);
        });
        add("first_stage_peer", "take-up contrast", false, [](const MV& m, const GCtx& g) {
            return e_d_peer(m, g, k01) - e_d_peer(m, g, k00);
        });
    }
    if (full) {
        add("first_stage_naive", "take-up contrast (peer cell marginalized)", false,
            naive_first_stage);
    }

    // Intention-to-treat contrasts.
    add("itt_direct_peer0", "assignment-cell outcome contrast", false,
        [](const MV& m, const GCtx& g) { return e_y(m, g, k10) - e_y(m, g, k00); });
    add("itt_indirect_own0", "assignment-cell outcome contrast", false,
        [](const MV& m, const GCtx& g) { return e_y(m, g, k01) - e_y(m, g, k00); });
    if (has11) {
        add("itt_direct_peer1", "assignment-cell outcome contrast", false,
            [](const MV& m, const GCtx& g) { return e_y(m, g, k11) - e_y(m, g, k01); });
        add("itt_indirect_own1", "assignment-cell outcome contrast", false,
            [](const MV& m, const GCtx& g) { return e_y(m, g, k11) - e_y(m, g, k10); });
        add("itt_total", "assignment-cell outcome contrast", false,
            [](const MV& m, const GCtx& g) { return e_y(m, g, k11) - e_y(m, g, k00); });
        add("itt_naive", "outcome contrast (peer cell marginalized)", false, naive_itt);
    }

    // One-sided-noncompliance local averages and effects.
    if (has_d) {
        add("mean_y00", "local average via observed take-up cells", true,
            [](const MV& m, const GCtx& g) { return e_y(m, g, k00); });
        add("mass_y10_compliers", "local average via observed take-up cells", true,
            [](const MV& m, const GCtx& g) { return m.y_d_own(0, k10) / cellp(m, g, k10); });
        add("mass_y01_compliant_peer", "local average via observed take-up cells", true,
            [](const MV& m, const GCtx& g) { return m.y_d_peer(0, k01) / cellp(m, g, k01); });
        add("mass_y00_compliers", "local average via observed take-up cells", true,
            [](const MV& m, const GCtx& g) {
                return e_y(m, g, k00) - m.y_not_own(0, k10) / cellp(m, g, k10);
            });
        add("mass_y00_compliant_peer", "local average via observed take-up cells", true,
            [](const MV& m, const GCtx& g) {
                return e_y(m, g, k00) - m.y_not_peer(0, k01) / cellp(m, g, k01);
            });
        if (full && has11) {
            add("mass_y00_nt_pairs", "local average via observed take-up cells", true,
                [](const MV& m, const GCtx& g) {
                    return m.y_d_neither(0, k11) / cellp(m, g, k11);
                });
        }
        add("late_direct", "itt rescaled by take-up", true, [](const MV& m, const GCtx& g) {
            return (e_y(m, g, k10) - e_y(m, g, k00)) /
                   g.den("take-up(1,0)", e_d_own(m, g, k10));
        });
        add("late_indirect", "itt rescaled by take-up", true, [](const MV& m, const GCtx& g) {
            return (e_y(m, g, k01) - e_y(m, g, k00)) /
                   g.den("peer take-up(0,1)", e_d_peer(m, g, k01));
        });
        if (full) {
            add("late_naive", "naive itt rescaled by naive take-up", true,
                [](const MV& m, const GCtx& g) {
                    return naive_itt(m, g) / g.den("first_stage_naive", naive_first_stage(m, g));
                });
        }
        // Complier baseline from the untreated-outcome mass at (1,0)/(0,1); the
        // treated mass would fold the direct (resp. spillover) effect into the
        // contrast.
        add("het_baseline_own", "baseline contrast between compliers and others", true,
            [](const MV& m, const GCtx& g) {
                const double w = e_d_own(m, g, k10);
                const double baseline_c =
                    (e_y(m, g, k00) - m.y_not_own(0, k10) / cellp(m, g, k10)) /
                    g.den("take-up(1,0)", w);
                return (baseline_c - e_y(m, g, k00)) / g.den("1 - take-up(1,0)", 1.0 - w);
            });
        add("het_baseline_peer", "baseline contrast between compliers and others", true,
            [](const MV& m, const GCtx& g) {
                const double w = e_d_peer(m, g, k01);
                const double baseline_c =
                    (e_y(m, g, k00) - m.y_not_peer(0, k01) / cellp(m, g, k01)) /
                    g.den("peer take-up(0,1)", w);
                return (baseline_c - e_y(m, g, k00)) / g.den("1 - peer take-up(0,1)", 1.0 - w);
            });
    }
    return out;
}

std::optional<Estimand> find_estimand(const MomentLayout& layout, const std::string& name) {
    for (Estimand& e : standard_catalog(layout)) {
        if (e.name == name) return std::move(e);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Named operations
// ---------------------------------------------------------------------------

namespace {

EstimateReport run_named(const Moments& m, const std::vector<std::string>& names,
                         double ci_level) {
    std::vector<Estimand> selected;
    for (const std::string& name : names) {
        if (auto e = find_estimand(m.layout, name)) selected.push_back(std::move(*e));
    }
    return run_estimands(m, selected, DeltaOptions{ci_level});
}

void require_osn(const Moments& m) {
    const MomentView view(m.layout, as_span(m.mu));
    const double mass = view.osn_violation_mass();
    if (mass > 0.0) {
        throw osn_violated_error(std::lround(mass * 2.0 * m.n_groups));
    }
}

EstimateRow single_row(const Moments& m, const std::string& name, double ci_level) {
    auto e = find_estimand(m.layout, name);
    if (!e) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                    name + " is not available in this moment layout");
    }
    return delta_method(m, *e, DeltaOptions{ci_level});
}

}  // namespace

TypeDistributionEstimate type_distribution(const Moments& m, double ci_level) {
    EstimateReport rep = run_named(
        m, {"p_at", "p_sc", "p_c", "p_gc", "p_nt", "p_at_at", "p_nt_nt", "p_cross_sum"},
        ci_level);
    TypeDistributionEstimate out;
    out.rows = std::move(rep.rows);
    out.omitted = std::move(rep.omitted);
    for (const EstimateRow& r : out.rows) out.negative_share |= r.value < 0.0;
    return out;
}

EstimateRow itt(const Moments& m, IttEstimandKind kind, double ci_level) {
    const char* name = nullptr;
    switch (kind) {
        case IttEstimandKind::DirectPeer0: name = "itt_direct_peer0"; break;
        case IttEstimandKind::DirectPeer1: name = "itt_direct_peer1"; break;
        case IttEstimandKind::IndirectOwn0: name = "itt_indirect_own0"; break;
        case IttEstimandKind::IndirectOwn1: name = "itt_indirect_own1"; break;
        case IttEstimandKind::Total: name = "itt_total"; break;
        case IttEstimandKind::Naive: name = "itt_naive"; break;
    }
    return single_row(m, name, ci_level);
}

EstimateReport osn_local_averages(const Moments& m, double ci_level) {
    require_osn(m);
    return run_named(m,
                     {"mean_y00", "mass_y10_compliers", "mass_y01_compliant_peer",
                      "mass_y00_compliers", "mass_y00_compliant_peer", "mass_y00_nt_pairs",
                      "p_nt_nt"},
                     ci_level);
}

EstimateRow late_direct(const Moments& m, double ci_level) {
    require_osn(m);
    return single_row(m, "late_direct", ci_level);
}

EstimateRow late_indirect(const Moments& m, double ci_level) {
    require_osn(m);
    return single_row(m, "late_indirect", ci_level);
}

EstimateReport baseline_heterogeneity(const Moments& m, double ci_level) {
    require_osn(m);
    return run_named(m, {"het_baseline_own", "het_baseline_peer"}, ci_level);
}

// ---------------------------------------------------------------------------
// ITT weight decomposition
// ---------------------------------------------------------------------------

namespace {
using CT = ComplianceType;
const CT AT = CT::AlwaysTaker, SC = CT::SocialComplier, C = CT::Complier,
         GC = CT::GroupComplier, NT = CT::NeverTaker;
}  // namespace

const std::array<WeightEvent, 5>& itt_weight_events(IttKind kind) {
    // Events are keyed to kWeightContrasts: the type combinations for which
    // switching the relevant assignment realizes exactly that potential
    // outcome contrast.
    static const std::array<WeightEvent, 5> direct = {{
        {{C, SC}, {C, GC, NT}},
        {{C, SC}, {SC}},
        {{C, SC}, {AT}},
        {{GC, NT}, {SC}},
        {{AT}, {SC}},
    }};
    static const std::array<WeightEvent, 5> indirect = {{
        {{SC}, {GC, NT}},
        {{SC}, {SC, C}},
        {{SC}, {AT}},
        {{C, GC, NT}, {SC, C}},
        {{AT}, {SC, C}},
    }};
    static const std::array<WeightEvent, 5> total = {{
        {{SC, C, GC}, {NT}},
        {{SC, C, GC}, {SC, C, GC}},
        {{SC, C, GC}, {AT}},
        {{NT}, {SC, C, GC}},
        {{AT}, {SC, C, GC}},
    }};
    switch (kind) {
        case IttKind::Direct: return direct;
        case IttKind::Indirect: return indirect;
        case IttKind::Total: return total;
    }
    return direct;
}

WeightTable itt_weight_decomposition(const JointTypeDistribution& dist, IttKind kind) {
    WeightTable t;
    t.kind = kind;
    const auto& events = itt_weight_events(kind);
    t.raw_sum = 0.0;
    for (int i = 0; i < 5; ++i) {
        t.weights[i] = dist.event(events[i].own, events[i].peer);
        t.raw_sum += t.weights[i];
    }
    switch (kind) {
        case IttKind::Direct:
        case IttKind::Indirect:
            // Own take-up response to own assignment (direct), or peer take-up
            // response to peer assignment (indirect): both equal P[C] + P[SC].
            t.first_stage = dist.marginal(C) + dist.marginal(SC);
            break;
        case IttKind::Total:
            t.first_stage = dist.marginal(SC) + dist.marginal(C) + dist.marginal(GC);
            break;
    }
    if (t.first_stage < 1e-12) {
        throw Error(ErrorCode::ZeroFirstStage, "ZeroFirstStage");
    }
    t.rescaled_sum = 0.0;
    for (int i = 0; i < 5; ++i) {
        t.rescaled[i] = t.weights[i] / t.first_stage;
        t.rescaled_sum += t.rescaled[i];
    }
    return t;
}

// ---------------------------------------------------------------------------
// check_osn (declared in dataset.hpp)
// ---------------------------------------------------------------------------

OsnDiagnostic check_osn(const Dataset& ds) {
    if (ds.cell_counts()[k00] == 0) throw empty_cell_error(0, 0);
    if (ds.cell_counts()[k01] == 0) throw empty_cell_error(0, 1);

    const MomentLayout layout{HBlock::Full8, {}};
    const Moments m = compute_moments(ds, layout);
    OsnDiagnostic diag;
    diag.hard_count = ds.osn_hard_count();
    diag.consistent = diag.hard_count == 0;
    auto p_at = find_estimand(layout, "p_at");
    auto p_sc = find_estimand(layout, "p_sc");
    const EstimateRow at = delta_method(m, *p_at);
    const EstimateRow sc = delta_method(m, *p_sc);
    diag.p_at = at.value;
    diag.se_at = at.se;
    diag.p_sc = sc.value;
    diag.se_sc = sc.se;
    return diag;
}

// ---------------------------------------------------------------------------
// Two-stage least squares
// ---------------------------------------------------------------------------

TslsEstimate tsls_spillover(const Dataset& ds, double ci_level) {
    const double G = ds.n_groups();
    // Per-cell symmetrized sums of the regressor vector (1, D_own, D_peer,
    // D_own*D_peer) and of y.
    Eigen::Matrix<double, 4, 4> sx = Eigen::Matrix<double, 4, 4>::Zero();  // [cell][regressor]
    Eigen::Vector4d sy = Eigen::Vector4d::Zero();
    Eigen::Matrix<double, 4, 4> gx;
    Eigen::Vector4d gy;
    for (const HouseholdRecord& r : ds.records()) {
        // Group-local sums first: unit relabeling only swaps two commutative
        // additions, so results are bit-stable.
        gx.setZero();
        gy.setZero();
        for (int i = 0; i < 2; ++i) {
            const UnitObs& own = r.unit[i];
            const UnitObs& peer = r.unit[1 - i];
            const int zc = zcell_index(own.z, peer.z);
            gx(zc, 0) += 0.5;
            gx(zc, 1) += 0.5 * own.d;
            gx(zc, 2) += 0.5 * peer.d;
            gx(zc, 3) += 0.5 * own.d * peer.d;
            gy(zc) += 0.5 * own.y;
        }
        sx += gx;
        sy += gy;
    }
    sx /= G;
    sy /= G;

    TslsEstimate est;
    est.n_groups = ds.n_groups();
    est.osn_warning = ds.osn_hard_count() > 0;

    // The interaction coefficient is identified only when the (1,1) cell
    // carries joint take-up.
    const bool cell11_present = sx(k11, 0) > 0.0;
    est.beta3_identified =
        cell11_present && sx(k11, 3) / sx(k11, 0) > GuardContext::kDenominatorGuard;
    if (!est.beta3_identified) {
        est.omitted.push_back(
            {"beta3", cell11_present
                          ? degenerate_denominator_error("joint take-up(1,1)").condition()
                          : empty_cell_error(1, 1).condition()});
    }

    std::vector<int> cells = {k00, k10, k01};
    for (int c : cells) {
        if (sx(c, 0) <= 0.0) {
            throw Error(ErrorCode::RankDeficientFirstStage, "RankDeficientFirstStage",
                        "assignment cell " + zcell_label(c) + " is empty");
        }
    }
    if (est.beta3_identified) cells.push_back(k11);
    const int n = static_cast<int>(cells.size());

    // Moment conditions E[1(Z=c) u] = 0 for each included cell; with the
    // interaction included this is exactly 2SLS on (1, Z_own, Z_peer,
    // Z_own*Z_peer), and without it 2SLS on (1, Z_own, Z_peer).
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd b(n);
    for (int r = 0; r < n; ++r) {
        for (int k = 0; k < n; ++k) A(r, k) = sx(cells[r], k);
        b(r) = sy(cells[r]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) {
        throw Error(ErrorCode::RankDeficientFirstStage, "RankDeficientFirstStage",
                    "take-up moment matrix is singular");
    }
    const Eigen::VectorXd beta = lu.solve(b);

    // Cluster-robust sandwich: m_g = per-group symmetrized cell moments of the
    // residual, S = (1/G) sum m_g m_g', V = A^{-1} S A^{-T} / G.
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd mg(n);
    for (const HouseholdRecord& r : ds.records()) {
        mg.setZero();
        for (int i = 0; i < 2; ++i) {
            const UnitObs& own = r.unit[i];
            const UnitObs& peer = r.unit[1 - i];
            const int zc = zcell_index(own.z, peer.z);
            double xb = beta(0) + beta(1) * own.d + beta(2) * peer.d;
            if (n == 4) xb += beta(3) * own.d * peer.d;
            for (int c = 0; c < n; ++c) {
                if (cells[c] == zc) mg(c) += 0.5 * (own.y - xb);
            }
        }
        S.selfadjointView<Eigen::Lower>().rankUpdate(mg, 1.0);
    }
    S = S.selfadjointView<Eigen::Lower>();
    S /= G;
    const Eigen::MatrixXd a_inv = lu.inverse();
    const Eigen::MatrixXd V = a_inv * S * a_inv.transpose() / G;

    const double crit = normal_critical_value(ci_level);
    for (int k = 0; k < n; ++k) {
        EstimateRow row;
        row.name = "beta" + std::to_string(k);
        row.formula = "just-identified iv (cluster-robust)";
        row.value = beta(k);
        row.se = std::sqrt(std::max(0.0, V(k, k)));
        row.ci_lo = row.value - crit * row.se;
        row.ci_hi = row.value + crit * row.se;
        est.rows.push_back(row);
    }
    return est;
}

// ---------------------------------------------------------------------------
// Conditional-on-observables estimands
// ---------------------------------------------------------------------------

namespace {

// E[num * 1(X=x)] / p_cell(x): with estimated propensities the weight is
// P[X=x] / P[X=x, Z=cell]; with a known design it is 1 / pi_x(cell).
struct IpwWeights {
    std::vector<double> known_pi;  // per (block, cell); empty when estimated
    int n_cells = 4;

    double apply(const MV& m, const GCtx& g, int block, int zc, double num) const {
        const std::string& label = m.layout().strata[block];
        if (!known_pi.empty()) {
            const double pi = g.stratum_cell(label, zc, known_pi[block * n_cells + zc]);
            return num / pi;
        }
        double share = 0.0;
        for (int c = 0; c < m.layout().n_cells(); ++c) share += m.cell(block, c);
        return num * share / g.stratum_cell(label, zc, m.cell(block, zc));
    }
};

}  // namespace

std::vector<Estimand> conditional_catalog(
    const MomentLayout& layout, GSpec g,
    const std::optional<std::vector<std::pair<std::string, AssignmentDesign>>>& known_design) {
    if (layout.block != HBlock::Full8 || layout.strata.empty()) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                    "conditional estimands need a stratified full-8 layout");
    }
    IpwWeights w;
    w.n_cells = layout.n_cells();
    if (known_design) {
        std::map<std::string, const AssignmentDesign*> by_label;
        for (const auto& [label, design] : *known_design) by_label[label] = &design;
        for (const std::string& label : layout.strata) {
            auto it = by_label.find(label);
            if (it == by_label.end()) {
                throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                            "no known design for stratum '" + label + "'");
            }
            for (int c = 0; c < layout.n_cells(); ++c) {
                w.known_pi.push_back(it->second->prob(c));
            }
        }
    }

    const int n_strata = layout.n_blocks();
    std::vector<Estimand> out;
    auto add = [&](std::string name, std::function<double(const MV&, const GCtx&)> fn) {
        out.push_back(
            Estimand{std::move(name), "inverse-probability weighted over strata", true,
                     std::move(fn)});
    };

    // Per-stratum take-up shares (identified within stratum).
    for (int s = 0; s < n_strata; ++s) {
        const std::string& label = layout.strata[s];
        add("p_c_x_" + label, [s, label](const MV& m, const GCtx& g) {
            return m.d_own(s, k10) / g.stratum_cell(label, k10, m.cell(s, k10));
        });
        add("p_gc_x_" + label, [s, label](const MV& m, const GCtx& g) {
            return m.d_own(s, k11) / g.stratum_cell(label, k11, m.cell(s, k11)) -
                   m.d_own(s, k10) / g.stratum_cell(label, k10, m.cell(s, k10));
        });
        add("p_nt_x_" + label, [s, label](const MV& m, const GCtx& g) {
            return 1.0 - m.d_own(s, k11) / g.stratum_cell(label, k11, m.cell(s, k11));
        });
    }

    const auto sum_ipw = [w, n_strata](const MV& m, const GCtx& g, int zc,
                                       double (MV::*num)(int, int) const) {
        double acc = 0.0;
        for (int s = 0; s < n_strata; ++s) acc += w.apply(m, g, s, zc, (m.*num)(s, zc));
        return acc;
    };

    switch (g) {
        case GSpec::Y:
            add("cond_mean_y00", [sum_ipw](const MV& m, const GCtx& g) {
                return sum_ipw(m, g, k00, &MV::y);
            });
            add("cond_mass_y10_compliers", [sum_ipw](const MV& m, const GCtx& g) {
                return sum_ipw(m, g, k10, &MV::y_d_own);
            });
            add("cond_mass_y01_compliant_peer", [sum_ipw](const MV& m, const GCtx& g) {
                return sum_ipw(m, g, k01, &MV::y_d_peer);
            });
            add("cond_mass_y00_compliers", [sum_ipw](const MV& m, const GCtx& g) {
                return sum_ipw(m, g, k00, &MV::y) - sum_ipw(m, g, k10, &MV::y_not_own);
            });
            add("cond_mass_y00_compliant_peer", [sum_ipw](const MV& m, const GCtx& g) {
                return sum_ipw(m, g, k00, &MV::y) - sum_ipw(m, g, k01, &MV::y_not_peer);
            });
            break;
        case GSpec::XIndicator:
            for (int s = 0; s < n_strata; ++s) {
                const std::string& label = layout.strata[s];
                add("cond_share_x_" + label, [w, s](const MV& m, const GCtx& g) {
                    return w.apply(m, g, s, k00, m.cell(s, k00));
                });
                add("cond_mass_x_" + label + "_compliers", [w, s](const MV& m, const GCtx& g) {
                    return w.apply(m, g, s, k10, m.d_own(s, k10));
                });
                add("cond_mass_x_" + label + "_compliant_peer",
                    [w, s](const MV& m, const GCtx& g) {
                        return w.apply(m, g, s, k01, m.d_peer(s, k01));
                    });
            }
            break;
        case GSpec::YXIndicator:
            for (int s = 0; s < n_strata; ++s) {
                const std::string& label = layout.strata[s];
                add("cond_mean_y00_x_" + label, [w, s](const MV& m, const GCtx& g) {
                    return w.apply(m, g, s, k00, m.y(s, k00));
                });
                add("cond_mass_y10_x_" + label + "_compliers",
                    [w, s](const MV& m, const GCtx& g) {
                        return w.apply(m, g, s, k10, m.y_d_own(s, k10));
                    });
                add("cond_mass_y01_x_" + label + "_compliant_peer",
                    [w, s](const MV& m, const GCtx& g) {
                        return w.apply(m, g, s, k01, m.y_d_peer(s, k01));
                    });
                add("cond_mass_y00_x_" + label + "_compliers",
                    [w, s](const MV& m, const GCtx& g) {
                        return w.apply(m, g, s, k00, m.y(s, k00)) -
                               w.apply(m, g, s, k10, m.y_not_own(s, k10));
                    });
                add("cond_mass_y00_x_" + label + "_compliant_peer",
                    [w, s](const MV& m, const GCtx& g) {
                        return w.apply(m, g, s, k00, m.y(s, k00)) -
                               w.apply(m, g, s, k01, m.y_not_peer(s, k01));
                    });
            }
            break;
    }
    return out;
}

EstimateReport conditional_estimands(const Dataset& ds, const ConditionalOptions& opts) {
    if (!ds.has_strata()) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                    "conditional estimands need an x column");
    }
    MomentLayout layout{HBlock::Full8, ds.strata()};
    const Moments m = compute_moments(ds, layout, MomentOptions{opts.workers, false});
    const auto catalog = conditional_catalog(layout, opts.g, opts.known_design);
    return run_estimands(m, catalog, DeltaOptions{opts.ci_level});
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

namespace {

bool name_matches(const std::string& name, const std::vector<std::string>& filter) {
    if (filter.empty()) return true;
    for (const std::string& f : filter) {
        if (!f.empty() && f.back() == '*') {
            if (name.rfind(f.substr(0, f.size() - 1), 0) == 0) return true;
        } else if (name == f) {
            return true;
        }
    }
    return false;
}

void apply_share_policy(EstimateReport& report, bool clamp, double crit) {
    static const char* marginal_names[] = {"p_at", "p_sc", "p_c", "p_gc", "p_nt"};
    static const char* joint_names[] = {"p_at_at", "p_nt_nt"};
    std::vector<EstimateRow*> marginals;
    bool any_negative = false;
    for (const char* name : marginal_names) {
        for (EstimateRow& r : report.rows) {
            if (r.name == name) {
                marginals.push_back(&r);
                if (r.value < 0.0) {
                    any_negative = true;
                    report.warnings.push_back("NegativeShare:" + r.name);
                }
            }
        }
    }
    for (const char* name : joint_names) {
        if (const EstimateRow* r = report.find(name)) {
            if (r->value < 0.0) report.warnings.push_back("NegativeShare:" + std::string(name));
        }
    }
    if (clamp && any_negative) {
        double total = 0.0;
        for (EstimateRow* r : marginals) {
            r->value = std::max(0.0, r->value);
            total += r->value;
        }
        if (marginals.size() == 5 && total > 0.0) {
            for (EstimateRow* r : marginals) r->value /= total;
        }
        for (EstimateRow* r : marginals) {
            r->ci_lo = r->value - crit * r->se;
            r->ci_hi = r->value + crit * r->se;
            r->formula += " (clamped)";
        }
        report.warnings.push_back("SharesClamped");
    }
    // Estimated joint shares should not exceed the matching marginal beyond
    // sampling noise.
    const EstimateRow* at = report.find("p_at");
    const EstimateRow* at_at = report.find("p_at_at");
    if (at && at_at && at_at->value > at->value + 3.0 * at_at->se) {
        report.warnings.push_back("JointShareExceedsMarginal:p_at_at");
    }
    const EstimateRow* nt = report.find("p_nt");
    const EstimateRow* nt_nt = report.find("p_nt_nt");
    if (nt && nt_nt && nt_nt->value > nt->value + 3.0 * nt_nt->se) {
        report.warnings.push_back("JointShareExceedsMarginal:p_nt_nt");
    }
}

}  // namespace

EstimateReport estimate_all(const Dataset& ds, const EstimateOptions& opts) {
    const MomentLayout layout{HBlock::Full8, {}};
    const Moments m = compute_moments(ds, layout, MomentOptions{opts.workers, false});
    EstimateReport report =
        run_estimands(m, standard_catalog(layout), DeltaOptions{opts.ci_level});
    report.meta_str["h_block"] = "full-8";

    const double crit = normal_critical_value(opts.ci_level);
    apply_share_policy(report, opts.clamp_shares, crit);

    // Spillover 2SLS.
    try {
        TslsEstimate tsls = tsls_spillover(ds, opts.ci_level);
        report.rows.insert(report.rows.end(), tsls.rows.begin(), tsls.rows.end());
        report.omitted.insert(report.omitted.end(), tsls.omitted.begin(), tsls.omitted.end());
        if (tsls.osn_warning) {
            report.warnings.push_back("OSNViolated:2sls coefficients lack a causal reading");
        }
    } catch (const Error& err) {
        for (const char* name : {"beta0", "beta1", "beta2", "beta3"}) {
            report.omitted.push_back({name, err.condition()});
        }
    }

    // First-stage F statistic (cluster-robust Wald, single restriction).
    if (const EstimateRow* fs = report.find("first_stage_own"); fs && fs->se > 0.0) {
        report.meta_num["f_first_stage"] = (fs->value / fs->se) * (fs->value / fs->se);
        report.meta_str["f_convention"] = "cluster-robust Wald";
    }

    // Conditional-on-observables estimands when strata are present.
    if (ds.has_strata()) {
        for (GSpec g : {GSpec::Y, GSpec::XIndicator, GSpec::YXIndicator}) {
            ConditionalOptions copts;
            copts.g = g;
            copts.ci_level = opts.ci_level;
            copts.workers = opts.workers;
            copts.known_design = opts.known_design;
            try {
                EstimateReport cond = conditional_estimands(ds, copts);
                if (g != GSpec::Y) {
                    // The per-stratum take-up shares are identical across g
                    // choices; keep a single copy.
                    std::erase_if(cond.rows, [](const EstimateRow& r) {
                        return r.name.rfind("p_", 0) == 0;
                    });
                    std::erase_if(cond.omitted, [](const Omission& o) {
                        return o.name.rfind("p_", 0) == 0;
                    });
                }
                report.rows.insert(report.rows.end(), cond.rows.begin(), cond.rows.end());
                report.omitted.insert(report.omitted.end(), cond.omitted.begin(),
                                      cond.omitted.end());
            } catch (const Error& err) {
                report.warnings.push_back("ConditionalSkipped:" + err.condition());
            }
        }
    }

    if (!opts.estimand_filter.empty()) {
        std::erase_if(report.rows, [&](const EstimateRow& r) {
            return !name_matches(r.name, opts.estimand_filter);
        });
        std::erase_if(report.omitted, [&](const Omission& o) {
            return !name_matches(o.name, opts.estimand_filter);
        });
    }
    return report;
}

}  // namespace pairiv
