#include "pairiv/oracle.hpp"

#include <cmath>
#include <functional>

namespace pairiv {

namespace {

constexpr int k00 = zcell_index(0, 0);
constexpr int k10 = zcell_index(1, 0);
constexpr int k01 = zcell_index(0, 1);
constexpr int k11 = zcell_index(1, 1);

using CT = ComplianceType;
const CT AT = CT::AlwaysTaker, SC = CT::SocialComplier, C = CT::Complier,
         GC = CT::GroupComplier, NT = CT::NeverTaker;

double stat_value(CellStat stat, double m, int d_own, int d_peer) {
    switch (stat) {
        case CellStat::Y: return m;
        case CellStat::DOwn: return d_own;
        case CellStat::DPeer: return d_peer;
        case CellStat::YDOwn: return m * d_own;
        case CellStat::YDPeer: return m * d_peer;
        case CellStat::YNotOwn: return m * (1 - d_own);
        case CellStat::YNotPeer: return m * (1 - d_peer);
        case CellStat::DBoth: return static_cast<double>(d_own * d_peer);
        case CellStat::DNeither: return static_cast<double>((1 - d_own) * (1 - d_peer));
        case CellStat::YDNeither: return m * (1 - d_own) * (1 - d_peer);
    }
    return 0.0;
}

}  // namespace

double population_expectation(const StratumSpec& st, int zcell, CellStat stat) {
    const int z = zcell_own(zcell);
    const int zp = zcell_peer(zcell);
    double acc = 0.0;
    for (CT a : kAllTypes) {
        for (CT b : kAllTypes) {
            const double p = st.types.p(a, b);
            if (p == 0.0) continue;
            const int d_own = potential_treatment(a, z, zp);
            const int d_peer = potential_treatment(b, zp, z);
            const double m = st.outcomes.effective_mean(a, b, d_own, d_peer);
            acc += p * stat_value(stat, m, d_own, d_peer);
        }
    }
    return acc;
}

Eigen::VectorXd population_moments(const DgpSpec& spec, const MomentLayout& layout) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(layout.dim());
    const bool stratified_layout = !layout.strata.empty();
    if (stratified_layout &&
        (layout.strata.size() != spec.strata.size() || !spec.stratified())) {
        // Layout strata must match the spec's strata one-to-one.
        for (std::size_t i = 0; i < layout.strata.size(); ++i) {
            bool found = false;
            for (const StratumSpec& st : spec.strata) found |= st.label == layout.strata[i];
            if (!found) {
                throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                            "layout stratum '" + layout.strata[i] + "' not in DGP");
            }
        }
    }
    for (const StratumSpec& st : spec.strata) {
        int block = 0;
        if (stratified_layout) {
            block = -1;
            for (int i = 0; i < static_cast<int>(layout.strata.size()); ++i) {
                if (layout.strata[i] == st.label) block = i;
            }
            if (block < 0) {
                throw Error(ErrorCode::InvalidSpec, "InvalidSpec",
                            "DGP stratum '" + st.label + "' not in layout");
            }
        }
        for (int zc = 0; zc < layout.n_cells(); ++zc) {
            const double cell_mass = st.share * st.design.prob(zc);
            mu[layout.cell_index(block, zc)] += cell_mass;
            if (cell_mass == 0.0) continue;
            const int z = zcell_own(zc);
            const int zp = zcell_peer(zc);
            for (CT a : kAllTypes) {
                for (CT b : kAllTypes) {
                    const double p = st.types.p(a, b);
                    if (p == 0.0) continue;
                    const int d_own = potential_treatment(a, z, zp);
                    const int d_peer = potential_treatment(b, zp, z);
                    const double m = st.outcomes.effective_mean(a, b, d_own, d_peer);
                    for (int h = 0; h < layout.n_h(); ++h) {
                        const double v = layout.h_value(h, m, d_own, d_peer);
                        if (v != 0.0) mu[layout.h_index(block, h, zc)] += cell_mass * p * v;
                    }
                }
            }
        }
    }
    return mu;
}

// ---------------------------------------------------------------------------
// Type-route quantities (independent of the moment/estimator machinery)
// ---------------------------------------------------------------------------

namespace {

// Mean potential-outcome contrast over a type-combination event, times the
// event probability: sum over (a,b) in own x peer of p(a,b) *
// (mean(a,b,d1) - mean(a,b,d0)).
double event_contrast_mass(const StratumSpec& st, const WeightEvent& ev, const PoContrast& c) {
    double acc = 0.0;
    for (CT a : ev.own) {
        for (CT b : ev.peer) {
            const double p = st.types.p(a, b);
            if (p == 0.0) continue;
            acc += p * (st.outcomes.effective_mean(a, b, c.d1_own, c.d1_peer) -
                        st.outcomes.effective_mean(a, b, c.d0_own, c.d0_peer));
        }
    }
    return acc;
}

// E[Y(d, d_peer) | own type in own_set] * P[own type in own_set].
double own_event_po_mass(const StratumSpec& st, const std::vector<CT>& own_set, int d,
                         int d_peer) {
    double acc = 0.0;
    for (CT a : own_set) {
        for (CT b : kAllTypes) {
            const double p = st.types.p(a, b);
            if (p != 0.0) acc += p * st.outcomes.effective_mean(a, b, d, d_peer);
        }
    }
    return acc;
}

// Peer-conditioned version: E[Y_own(d, d_peer) | peer type in peer_set] *
// P[peer in peer_set].
double peer_event_po_mass(const StratumSpec& st, const std::vector<CT>& peer_set, int d,
                          int d_peer) {
    double acc = 0.0;
    for (CT a : kAllTypes) {
        for (CT b : peer_set) {
            const double p = st.types.p(a, b);
            if (p != 0.0) acc += p * st.outcomes.effective_mean(a, b, d, d_peer);
        }
    }
    return acc;
}

struct CausalTruths {
    double ey00 = 0.0;            // E[Y(0,0)]
    double late_direct = 0.0;     // E[Y(1,0)-Y(0,0) | own complier]
    double late_indirect = 0.0;   // E[Y(0,1)-Y(0,0) | peer complier]
    double het_own = 0.0;         // E[Y(0,0)|C] - E[Y(0,0)|not C]
    double het_peer = 0.0;
    double beta3 = 0.0;           // interaction combination (see proof route)
    bool late_defined = false;
    bool het_defined = false;
    bool beta3_defined = false;
};

// Direct enumeration of the causal estimands for a one-sided stratum. Used as
// the independent side of the identity checks.
CausalTruths causal_truths(const StratumSpec& st) {
    CausalTruths t;
    const double pc = st.types.marginal(C);
    t.ey00 = own_event_po_mass(st, {AT, SC, C, GC, NT}, 0, 0);
    if (pc > 1e-12) {
        t.late_defined = true;
        t.late_direct =
            (own_event_po_mass(st, {C}, 1, 0) - own_event_po_mass(st, {C}, 0, 0)) / pc;
        t.late_indirect =
            (peer_event_po_mass(st, {C}, 0, 1) - peer_event_po_mass(st, {C}, 0, 0)) / pc;
    }
    if (pc > 1e-12 && 1.0 - pc > 1e-12) {
        t.het_defined = true;
        t.het_own = own_event_po_mass(st, {C}, 0, 0) / pc -
                    own_event_po_mass(st, {AT, SC, GC, NT}, 0, 0) / (1.0 - pc);
        t.het_peer = peer_event_po_mass(st, {C}, 0, 0) / pc -
                     peer_event_po_mass(st, {AT, SC, GC, NT}, 0, 0) / (1.0 - pc);
    }
    // Interaction coefficient: contrast-in-effects terms for group compliers
    // plus the joint-take-up second difference, all scaled by the joint
    // take-up probability at (1,1).
    const double q = st.types.event({C, GC}, {C, GC});
    const double pgc = st.types.marginal(GC);
    if (q > 1e-12 && t.late_defined) {
        double gc_direct = 0.0, gc_indirect = 0.0, second_diff = 0.0;
        if (pgc > 0.0) {
            gc_direct = own_event_po_mass(st, {GC}, 1, 0) - own_event_po_mass(st, {GC}, 0, 0);
            gc_indirect =
                peer_event_po_mass(st, {GC}, 0, 1) - peer_event_po_mass(st, {GC}, 0, 0);
        }
        for (CT a : {C, GC}) {
            for (CT b : {C, GC}) {
                const double p = st.types.p(a, b);
                if (p == 0.0) continue;
                second_diff +=
                    p * (st.outcomes.effective_mean(a, b, 1, 1) -
                         st.outcomes.effective_mean(a, b, 1, 0) -
                         st.outcomes.effective_mean(a, b, 0, 1) +
                         st.outcomes.effective_mean(a, b, 0, 0));
            }
        }
        t.beta3_defined = true;
        t.beta3 = (gc_direct - pgc * t.late_direct) / q +
                  (gc_indirect - pgc * t.late_indirect) / q + second_diff / q;
    }
    return t;
}

// Population 2SLS coefficients: solve the included cell equations exactly.
struct PopulationTsls {
    Eigen::VectorXd beta;
    bool beta3_identified = false;
    bool solvable = false;
};

PopulationTsls population_tsls(const DgpSpec& spec) {
    PopulationTsls out;
    // Pooled cell masses and conditional take-up moments.
    std::array<double, 4> mass{}, d_own{}, d_peer{}, d_both{}, y{};
    for (const StratumSpec& st : spec.strata) {
        for (int zc = 0; zc < 4; ++zc) {
            const double w = st.share * st.design.prob(zc);
            if (w == 0.0) continue;
            mass[zc] += w;
            d_own[zc] += w * population_expectation(st, zc, CellStat::DOwn);
            d_peer[zc] += w * population_expectation(st, zc, CellStat::DPeer);
            d_both[zc] += w * population_expectation(st, zc, CellStat::DBoth);
            y[zc] += w * population_expectation(st, zc, CellStat::Y);
        }
    }
    out.beta3_identified = mass[k11] > 0.0 && d_both[k11] / mass[k11] > 1e-8;
    std::vector<int> cells = {k00, k10, k01};
    for (int c : cells) {
        if (mass[c] <= 0.0) return out;  // not solvable
    }
    if (out.beta3_identified) cells.push_back(k11);
    const int n = static_cast<int>(cells.size());
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd b(n);
    for (int r = 0; r < n; ++r) {
        const int c = cells[r];
        A(r, 0) = mass[c];
        A(r, 1) = d_own[c];
        A(r, 2) = d_peer[c];
        if (n == 4) A(r, 3) = d_both[c];
        b(r) = y[c];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) return out;
    out.beta = lu.solve(b);
    out.solvable = true;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// truth: probability limits of every reported estimand
// ---------------------------------------------------------------------------

PopulationTruth truth(const DgpSpec& spec) {
    spec.validate();
    PopulationTruth out;

    const MomentLayout layout{HBlock::Full8, {}};
    Moments pm;
    pm.layout = layout;
    pm.mu = population_moments(spec, layout);
    pm.sigma = Eigen::MatrixXd::Zero(layout.dim(), layout.dim());
    pm.n_groups = std::max(spec.groups, 1);

    const GuardContext guarded(true);
    const MomentView view(pm.layout, as_span(pm.mu));
    const bool osn_holds = [&] {
        for (const StratumSpec& st : spec.strata) {
            if (!st.types.one_sided()) return false;
        }
        return true;
    }();

    for (const Estimand& e : standard_catalog(layout)) {
        if (e.requires_osn && !osn_holds) {
            out.omitted[e.name] = "OSNViolated";
            continue;
        }
        try {
            const double v = e.fn(view, guarded);
            if (!std::isfinite(v)) throw degenerate_denominator_error(e.name);
            out.values[e.name] = v;
        } catch (const Error& err) {
            out.omitted[e.name] = err.condition();
        }
    }

    // Spillover-regression coefficients.
    const PopulationTsls tsls = population_tsls(spec);
    if (tsls.solvable) {
        for (int k = 0; k < tsls.beta.size(); ++k) {
            out.values["beta" + std::to_string(k)] = tsls.beta(k);
        }
    } else {
        for (const char* name : {"beta0", "beta1", "beta2"}) {
            out.omitted[name] = "RankDeficientFirstStage";
        }
    }
    if (!tsls.beta3_identified) {
        out.omitted["beta3"] = "EmptyCell(1,1)";
    }

    // Conditional estimands for stratified processes.
    if (spec.stratified()) {
        std::vector<std::string> labels;
        for (const StratumSpec& st : spec.strata) labels.push_back(st.label);
        std::sort(labels.begin(), labels.end());
        MomentLayout slayout{HBlock::Full8, labels};
        Moments spm;
        spm.layout = slayout;
        spm.mu = population_moments(spec, slayout);
        spm.sigma = Eigen::MatrixXd::Zero(slayout.dim(), slayout.dim());
        spm.n_groups = std::max(spec.groups, 1);
        const MomentView sview(spm.layout, as_span(spm.mu));
        for (GSpec g : {GSpec::Y, GSpec::XIndicator, GSpec::YXIndicator}) {
            for (const Estimand& e : conditional_catalog(slayout, g, std::nullopt)) {
                if (g != GSpec::Y && e.name.rfind("p_", 0) == 0) continue;
                if (!osn_holds) {
                    out.omitted[e.name] = "OSNViolated";
                    continue;
                }
                try {
                    const double v = e.fn(sview, guarded);
                    if (!std::isfinite(v)) throw degenerate_denominator_error(e.name);
                    out.values[e.name] = v;
                } catch (const Error& err) {
                    out.omitted[e.name] = err.condition();
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// verify_identities
// ---------------------------------------------------------------------------

namespace {

class IdentityCollector {
public:
    IdentityCollector(IdentityReport& report, double tol) : report_(report), tol_(tol) {}

    void check(const std::string& name, double lhs, double rhs, const std::string& note = "") {
        IdentityCheck c;
        c.name = name;
        c.lhs = lhs;
        c.rhs = rhs;
        c.residual = std::abs(lhs - rhs);
        c.pass = c.residual < tol_;
        c.note = note;
        report_.checks.push_back(c);
        report_.n_applicable++;
        report_.all_pass = report_.all_pass && c.pass;
        report_.max_residual = std::max(report_.max_residual, c.residual);
    }

    void not_applicable(const std::string& name, const std::string& why) {
        IdentityCheck c;
        c.name = name;
        c.applicable = false;
        c.note = why;
        report_.checks.push_back(c);
    }

private:
    IdentityReport& report_;
    double tol_;
};

void verify_stratum(const StratumSpec& st, const std::string& suffix, IdentityCollector& col) {
    // (a) The three ITT decompositions: observable cell-mean contrast vs the
    // weighted sum over type-combination events.
    struct KindSpec {
        IttKind kind;
        const char* name;
        int cell_hi, cell_lo;
    };
    for (const KindSpec& ks :
         {KindSpec{IttKind::Direct, "itt_direct_decomposition", k10, k00},
          KindSpec{IttKind::Indirect, "itt_indirect_decomposition", k01, k00},
          KindSpec{IttKind::Total, "itt_total_decomposition", k11, k00}}) {
        const double lhs = population_expectation(st, ks.cell_hi, CellStat::Y) -
                           population_expectation(st, ks.cell_lo, CellStat::Y);
        double rhs = 0.0;
        const auto& events = itt_weight_events(ks.kind);
        for (int i = 0; i < 5; ++i) {
            rhs += event_contrast_mass(st, events[i], kWeightContrasts[i]);
        }
        col.check(std::string(ks.name) + suffix, lhs, rhs);
    }

    // (b) Naive ITT three-term combination (needs both own-assignment arms).
    const double mass1 = st.design.own_assigned_mass(1);
    const double mass0 = st.design.own_assigned_mass(0);
    if (mass1 > 1e-12 && mass0 > 1e-12) {
        const auto ey = [&](int zc) { return population_expectation(st, zc, CellStat::Y); };
        const double lhs =
            (st.design.prob(k10) * ey(k10) + st.design.prob(k11) * ey(k11)) / mass1 -
            (st.design.prob(k00) * ey(k00) + st.design.prob(k01) * ey(k01)) / mass0;
        const double p_peer1_given1 = st.design.prob(k11) / mass1;
        const double p_peer0_given1 = st.design.prob(k10) / mass1;
        const double p_peer1_given0 = st.design.prob(k01) / mass0;
        const double rhs = (ey(k10) - ey(k00)) * p_peer0_given1 +
                           (ey(k11) - ey(k00)) * p_peer1_given1 -
                           (ey(k01) - ey(k00)) * p_peer1_given0;
        col.check("itt_naive_combination" + suffix, lhs, rhs);
    } else {
        col.not_applicable("itt_naive_combination" + suffix,
                           "design lacks an own-assignment arm");
    }

    // Take-up equation system: cell-mean formulas vs true type shares.
    const auto ed = [&](int zc) { return population_expectation(st, zc, CellStat::DOwn); };
    col.check("share_at_from_cells" + suffix, ed(k00), st.types.marginal(AT));
    col.check("share_sc_from_cells" + suffix, ed(k01) - ed(k00), st.types.marginal(SC));
    col.check("share_c_from_cells" + suffix, ed(k10) - ed(k01), st.types.marginal(C));
    col.check("share_gc_from_cells" + suffix, ed(k11) - ed(k10), st.types.marginal(GC));
    col.check("joint_at_at_from_cells" + suffix,
              population_expectation(st, k00, CellStat::DBoth), st.types.p(AT, AT));
    col.check("joint_nt_nt_from_cells" + suffix,
              population_expectation(st, k11, CellStat::DNeither), st.types.p(NT, NT));
    col.check("cross_pair_sum_from_cells" + suffix,
              population_expectation(st, k01, CellStat::DOwn) -
                  population_expectation(st, k01, CellStat::DBoth),
              st.types.p(AT, GC) + st.types.p(AT, NT) + st.types.p(SC, GC) +
                  st.types.p(SC, NT));

    // One-sided-noncompliance identities.
    if (!st.types.one_sided()) {
        col.not_applicable("osn_identities" + suffix, "always-takers or social compliers present");
        return;
    }
    const CausalTruths causal = causal_truths(st);
    const auto pop = [&](int zc, CellStat s) { return population_expectation(st, zc, s); };

    col.check("osn_mean_y00" + suffix, pop(k00, CellStat::Y), causal.ey00);
    col.check("osn_mass_y10_compliers" + suffix, pop(k10, CellStat::YDOwn),
              own_event_po_mass(st, {C}, 1, 0));
    col.check("osn_mass_y01_compliant_peer" + suffix, pop(k01, CellStat::YDPeer),
              peer_event_po_mass(st, {C}, 0, 1));
    col.check("osn_mass_y00_compliers" + suffix,
              pop(k00, CellStat::Y) - pop(k10, CellStat::YNotOwn),
              own_event_po_mass(st, {C}, 0, 0));
    col.check("osn_mass_y00_compliant_peer" + suffix,
              pop(k00, CellStat::Y) - pop(k01, CellStat::YNotPeer),
              peer_event_po_mass(st, {C}, 0, 0));
    col.check("osn_mass_y00_nt_pairs" + suffix, pop(k11, CellStat::YDNeither),
              st.types.p(NT, NT) * st.outcomes.effective_mean(NT, NT, 0, 0));
    col.check("osn_share_nt_pairs" + suffix, pop(k11, CellStat::DNeither), st.types.p(NT, NT));

    if (causal.late_defined) {
        col.check("osn_late_direct_ratio" + suffix,
                  (pop(k10, CellStat::Y) - pop(k00, CellStat::Y)) / pop(k10, CellStat::DOwn),
                  causal.late_direct);
        col.check("osn_late_indirect_ratio" + suffix,
                  (pop(k01, CellStat::Y) - pop(k00, CellStat::Y)) / pop(k01, CellStat::DPeer),
                  causal.late_indirect);
    } else {
        col.not_applicable("osn_late_ratios" + suffix, "no compliers");
    }
    if (causal.het_defined) {
        const double w_own = pop(k10, CellStat::DOwn);
        col.check("osn_het_baseline_own" + suffix,
                  ((pop(k00, CellStat::Y) - pop(k10, CellStat::YNotOwn)) / w_own -
                   pop(k00, CellStat::Y)) /
                      (1.0 - w_own),
                  causal.het_own);
        const double w_peer = pop(k01, CellStat::DPeer);
        col.check("osn_het_baseline_peer" + suffix,
                  ((pop(k00, CellStat::Y) - pop(k01, CellStat::YNotPeer)) / w_peer -
                   pop(k00, CellStat::Y)) /
                      (1.0 - w_peer),
                  causal.het_peer);
    } else {
        col.not_applicable("osn_het_baseline" + suffix, "complier share is 0 or 1");
    }

    // Spillover-regression closed forms (single-stratum process).
    DgpSpec single;
    single.strata = {st};
    single.strata[0].share = 1.0;
    single.strata[0].label.clear();
    single.groups = 1;
    const PopulationTsls tsls = population_tsls(single);
    if (tsls.solvable && causal.late_defined) {
        col.check("tsls_beta0" + suffix, tsls.beta(0), causal.ey00);
        col.check("tsls_beta1" + suffix, tsls.beta(1), causal.late_direct);
        col.check("tsls_beta2" + suffix, tsls.beta(2), causal.late_indirect);
        if (tsls.beta3_identified && causal.beta3_defined) {
            col.check("tsls_beta3_combination" + suffix, tsls.beta(3), causal.beta3);
        } else {
            col.not_applicable("tsls_beta3_combination" + suffix,
                               "interaction not identified");
        }
    } else {
        col.not_applicable("tsls_closed_forms" + suffix,
                           "regression system not solvable for this design");
    }
}

}  // namespace

IdentityReport verify_identities(const DgpSpec& spec, double tol) {
    spec.validate();
    IdentityReport report;
    IdentityCollector col(report, tol);

    for (const StratumSpec& st : spec.strata) {
        const std::string suffix = spec.stratified() ? "[x=" + st.label + "]" : "";
        verify_stratum(st, suffix, col);
    }

    // Stratified inverse-probability identities: the pooled IPW formulas must
    // reproduce the share-weighted type-route values.
    if (spec.stratified()) {
        bool osn = true;
        for (const StratumSpec& st : spec.strata) osn &= st.types.one_sided();
        if (!osn) {
            col.not_applicable("ipw_identities", "a stratum violates one-sided noncompliance");
        } else {
            std::vector<std::string> labels;
            for (const StratumSpec& st : spec.strata) labels.push_back(st.label);
            std::sort(labels.begin(), labels.end());
            MomentLayout slayout{HBlock::Full8, labels};
            const Eigen::VectorXd mu = population_moments(spec, slayout);
            const MomentView view(slayout, as_span(mu));
            const GuardContext guarded(true);

            auto mix = [&](const std::function<double(const StratumSpec&)>& f) {
                double acc = 0.0;
                for (const StratumSpec& st : spec.strata) acc += st.share * f(st);
                return acc;
            };
            struct Row {
                const char* name;
                std::function<double(const StratumSpec&)> type_route;
            };
            const std::vector<Row> rows = {
                {"cond_mean_y00",
                 [](const StratumSpec& s) { return own_event_po_mass(s, {AT, SC, C, GC, NT}, 0, 0); }},
                {"cond_mass_y10_compliers",
                 [](const StratumSpec& s) { return own_event_po_mass(s, {C}, 1, 0); }},
                {"cond_mass_y01_compliant_peer",
                 [](const StratumSpec& s) { return peer_event_po_mass(s, {C}, 0, 1); }},
                {"cond_mass_y00_compliers",
                 [](const StratumSpec& s) { return own_event_po_mass(s, {C}, 0, 0); }},
                {"cond_mass_y00_compliant_peer",
                 [](const StratumSpec& s) { return peer_event_po_mass(s, {C}, 0, 0); }},
            };
            const auto checked = [&](const std::string& name, const Estimand& e, double rhs) {
                try {
                    col.check(name, e.fn(view, guarded), rhs);
                } catch (const Error& err) {
                    col.not_applicable(name, err.condition());
                }
            };
            for (const Estimand& e : conditional_catalog(slayout, GSpec::Y, std::nullopt)) {
                for (const Row& r : rows) {
                    if (e.name == r.name) {
                        checked(std::string("ipw_") + r.name, e, mix(r.type_route));
                    }
                }
                for (const StratumSpec& st : spec.strata) {
                    if (e.name == "p_c_x_" + st.label) {
                        checked("ipw_" + e.name, e, st.types.marginal(C));
                    } else if (e.name == "p_gc_x_" + st.label) {
                        checked("ipw_" + e.name, e, st.types.marginal(GC));
                    } else if (e.name == "p_nt_x_" + st.label) {
                        checked("ipw_" + e.name, e, st.types.marginal(NT));
                    }
                }
            }
        }
    }
    return report;
}

}  // namespace pairiv
