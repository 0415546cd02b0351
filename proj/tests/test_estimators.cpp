#include <doctest.h>

#include <cmath>

#include "pairiv/estimators.hpp"
#include "pairiv/simulate.hpp"
#include "support/test_util.hpp"

using namespace pairiv;
using pairiv::testing::make_dataset;
using pairiv::testing::swap_units;

namespace {

const EstimateRow& row(const EstimateReport& r, const std::string& name) {
    const EstimateRow* p = r.find(name);
    REQUIRE_MESSAGE(p != nullptr, "missing row ", name);
    return *p;
}

bool omitted_with(const EstimateReport& r, const std::string& name, const std::string& reason) {
    for (const Omission& o : r.omitted) {
        if (o.name == name) return o.reason.rfind(reason, 0) == 0;
    }
    return false;
}

Dataset transform_y(const Dataset& ds, double a, double b) {
    std::vector<HouseholdRecord> records = ds.records();
    for (HouseholdRecord& r : records) {
        for (UnitObs& u : r.unit) u.y = a + b * u.y;
    }
    return Dataset::from_records(std::move(records));
}

// Four one-sided households with take-up variation in every populated cell;
// all conditional means below are short exact fractions.
Dataset hand_dataset() {
    return make_dataset({
        {0, 0, 0, 0, 1.0, 2.0, ""},
        {1, 0, 1, 0, 3.0, 4.0, ""},
        {0, 1, 0, 1, 5.0, 6.0, ""},
        {1, 0, 0, 0, 7.0, 8.0, ""},
    });
}

}  // namespace

TEST_CASE("perfect compliance identifies the pure-complier distribution") {
    const Dataset ds = make_dataset({
        {0, 0, 0, 0, 1, 1, ""},
        {1, 0, 1, 0, 1, 1, ""},
        {0, 1, 0, 1, 1, 1, ""},
        {1, 1, 1, 1, 1, 1, ""},
    });
    const EstimateReport r = estimate_all(ds);
    CHECK(row(r, "p_at").value == 0.0);
    CHECK(row(r, "p_sc").value == 0.0);
    CHECK(row(r, "p_c").value == 1.0);
    CHECK(row(r, "p_gc").value == 0.0);
    CHECK(row(r, "p_nt").value == 0.0);
    // The marginal shares sum to one exactly: the residual is built from the
    // same intermediate sums.
    const double sum = row(r, "p_at").value + row(r, "p_sc").value + row(r, "p_c").value +
                       row(r, "p_gc").value + row(r, "p_nt").value;
    CHECK(sum == 1.0);
    CHECK(row(r, "p_at_at").value == 0.0);
    CHECK(row(r, "p_nt_nt").value == 0.0);
}

TEST_CASE("empty (1,1) cell omits exactly the affected estimands") {
    const EstimateReport r = estimate_all(hand_dataset());
    CHECK(omitted_with(r, "p_gc", "EmptyCell(1,1)"));
    CHECK(omitted_with(r, "p_nt", "EmptyCell(1,1)"));
    CHECK(omitted_with(r, "p_nt_nt", "EmptyCell(1,1)"));
    CHECK(omitted_with(r, "itt_total", "EmptyCell(1,1)"));
    CHECK(omitted_with(r, "mass_y00_nt_pairs", "EmptyCell(1,1)"));
    CHECK(omitted_with(r, "beta3", "EmptyCell(1,1)"));
    CHECK(r.find("p_c") != nullptr);
    CHECK(r.find("late_direct") != nullptr);
}

TEST_CASE("local averages and effects match hand arithmetic") {
    const EstimateReport r = estimate_all(hand_dataset());
    // Conditional means: E[Y|(0,0)] = 3/2, E[Y|(1,0)] = 16/3, E[Y|(0,1)] = 17/3,
    // E[D_own|(1,0)] = E[D_peer|(0,1)] = 2/3.
    CHECK(row(r, "mean_y00").value == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(row(r, "mass_y10_compliers").value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(row(r, "mass_y01_compliant_peer").value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(row(r, "mass_y00_compliers").value == doctest::Approx(-5.0 / 6.0).epsilon(1e-12));
    CHECK(row(r, "mass_y00_compliant_peer").value == doctest::Approx(-7.0 / 6.0).epsilon(1e-12));
    CHECK(row(r, "late_direct").value == doctest::Approx(5.75).epsilon(1e-12));
    CHECK(row(r, "late_indirect").value == doctest::Approx(6.25).epsilon(1e-12));
    CHECK(row(r, "het_baseline_own").value == doctest::Approx(-8.25).epsilon(1e-12));
    CHECK(row(r, "het_baseline_peer").value == doctest::Approx(-9.75).epsilon(1e-12));
    CHECK(row(r, "p_c").value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(row(r, "itt_direct_peer0").value == doctest::Approx(23.0 / 6.0).epsilon(1e-12));
    CHECK(row(r, "itt_indirect_own0").value == doctest::Approx(25.0 / 6.0).epsilon(1e-12));
    CHECK(row(r, "itt_naive").value == doctest::Approx(16.0 / 3.0 - 4.0).epsilon(1e-12));
}

TEST_CASE("zero outcomes give zero contrasts") {
    Dataset ds = make_dataset({
        {0, 0, 0, 0, 0, 0, ""},
        {1, 0, 1, 0, 0, 0, ""},
        {0, 1, 0, 1, 0, 0, ""},
        {1, 1, 1, 1, 0, 0, ""},
    });
    const EstimateReport r = estimate_all(ds);
    for (const char* name : {"itt_direct_peer0", "itt_direct_peer1", "itt_indirect_own0",
                             "itt_indirect_own1", "itt_total", "itt_naive", "late_direct",
                             "late_indirect"}) {
        CHECK(row(r, name).value == 0.0);
    }
}

TEST_CASE("osn violations gate the local-average family only") {
    const Dataset ds = make_dataset({
        {0, 0, 1, 0, 1, 2, ""},  // treated without assignment
        {0, 0, 0, 0, 1, 2, ""},
        {1, 0, 1, 0, 3, 4, ""},
        {0, 1, 0, 1, 5, 6, ""},
        {1, 1, 1, 1, 7, 8, ""},
    });
    const EstimateReport r = estimate_all(ds);
    for (const char* name : {"mean_y00", "mass_y10_compliers", "late_direct", "late_indirect",
                             "het_baseline_own", "late_naive"}) {
        CHECK(omitted_with(r, name, "OSNViolated"));
    }
    CHECK(r.find("p_at") != nullptr);
    CHECK(r.find("itt_direct_peer0") != nullptr);
    bool tsls_warned = false;
    for (const std::string& w : r.warnings) tsls_warned |= w.rfind("OSNViolated", 0) == 0;
    CHECK(tsls_warned);
}

TEST_CASE("naive contrast decomposes into the three-term combination") {
    // Holds at the point estimates for any dataset with both own-assignment
    // arms populated, by total probability under the symmetrized empirical
    // measure.
    const DgpSpec spec = pairiv::testing::random_spec(99, pairiv::testing::SpecKind::General, 600);
    const Dataset ds = simulate(spec);
    const Moments m = compute_moments(ds, MomentLayout{HBlock::Full8, {}});
    const EstimateReport r = run_estimands(m, standard_catalog(m.layout));
    const MomentView v(m.layout, as_span(m.mu));
    const double c00 = v.cell(0, zcell_index(0, 0)), c10 = v.cell(0, zcell_index(1, 0));
    const double c01 = v.cell(0, zcell_index(0, 1)), c11 = v.cell(0, zcell_index(1, 1));
    const double p_peer0_given1 = c10 / (c10 + c11);
    const double p_peer1_given1 = c11 / (c10 + c11);
    const double p_peer1_given0 = c01 / (c00 + c01);
    const double combo = row(r, "itt_direct_peer0").value * p_peer0_given1 +
                         row(r, "itt_total").value * p_peer1_given1 -
                         row(r, "itt_indirect_own0").value * p_peer1_given0;
    CHECK(row(r, "itt_naive").value == doctest::Approx(combo).epsilon(1e-12));
}

TEST_CASE("itt weight tables reproduce the closed-form event probabilities") {
    SUBCASE("uniform joint distribution") {
        const WeightTable t =
            itt_weight_decomposition(JointTypeDistribution::uniform(), IttKind::Direct);
        const double expected[] = {0.6, 0.2, 0.2, 0.2, 0.1};
        for (int i = 0; i < 5; ++i) {
            CHECK(t.rescaled[i] == doctest::Approx(expected[i]).epsilon(1e-10));
        }
        CHECK(t.rescaled_sum == doctest::Approx(1.3).epsilon(1e-10));
        CHECK(t.first_stage == doctest::Approx(0.4).epsilon(1e-12));
    }
    SUBCASE("independent types with unequal shares") {
        const auto dist = JointTypeDistribution::independent({0.1, 0.2, 0.4, 0.2, 0.1});
        const WeightTable t = itt_weight_decomposition(dist, IttKind::Direct);
        // Hand-computed event probabilities under independence:
        //   {C,SC} x {C,GC,NT} = 0.6 * 0.7, {C,SC} x {SC} = 0.6 * 0.2,
        //   {C,SC} x {AT} = 0.6 * 0.1, {GC,NT} x {SC} = 0.3 * 0.2,
        //   {AT} x {SC} = 0.1 * 0.2; first stage 0.6.
        const double expected_raw[] = {0.42, 0.12, 0.06, 0.06, 0.02};
        for (int i = 0; i < 5; ++i) {
            CHECK(t.weights[i] == doctest::Approx(expected_raw[i]).epsilon(1e-12));
            CHECK(t.rescaled[i] == doctest::Approx(expected_raw[i] / 0.6).epsilon(1e-10));
        }
        CHECK(t.raw_sum == doctest::Approx(0.68).epsilon(1e-12));
        CHECK(t.rescaled_sum == doctest::Approx(0.68 / 0.6).epsilon(1e-10));
    }
    SUBCASE("no spillover types reduce to a proper weighted average") {
        const auto dist = JointTypeDistribution::independent({0.2, 0.0, 0.5, 0.0, 0.3});
        const WeightTable t = itt_weight_decomposition(dist, IttKind::Direct);
        CHECK(t.weights[0] == doctest::Approx(0.5 * 0.8).epsilon(1e-12));  // C x {C,NT}
        CHECK(t.weights[1] == 0.0);
        CHECK(t.weights[2] == doctest::Approx(0.5 * 0.2).epsilon(1e-12));  // C x AT
        CHECK(t.weights[3] == 0.0);
        CHECK(t.weights[4] == 0.0);
        CHECK(t.raw_sum == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(t.rescaled_sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("zero first stage") {
        const auto dist = JointTypeDistribution::independent({0.5, 0.0, 0.0, 0.0, 0.5});
        CHECK_THROWS_AS(itt_weight_decomposition(dist, IttKind::Direct), Error);
    }
}

TEST_CASE("weight table properties over random joint distributions") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        rng::Stream s(seed, 0xAB);
        const auto dist = pairiv::testing::random_joint(s, false, 0.05);
        for (IttKind kind : {IttKind::Direct, IttKind::Indirect, IttKind::Total}) {
            const WeightTable t = itt_weight_decomposition(dist, kind);
            for (double w : t.weights) CHECK(w >= 0.0);
            CHECK(t.raw_sum <= 1.0 + 1e-12);
        }
        // The direct raw weight sum has a closed form in the type shares.
        const WeightTable t = itt_weight_decomposition(dist, IttKind::Direct);
        using CT = ComplianceType;
        const double closed = dist.marginal(CT::Complier) + dist.marginal(CT::SocialComplier) +
                              dist.p(CT::SocialComplier, CT::GroupComplier) +
                              dist.p(CT::SocialComplier, CT::NeverTaker) +
                              dist.p(CT::SocialComplier, CT::AlwaysTaker);
        CHECK(t.raw_sum == doctest::Approx(closed).epsilon(1e-12));
    }
}

TEST_CASE("estimates are invariant to unit relabeling") {
    const DgpSpec spec = pairiv::testing::random_spec(7, pairiv::testing::SpecKind::Osn, 500);
    const Dataset ds = simulate(spec);
    const EstimateReport a = estimate_all(ds);
    const EstimateReport b = estimate_all(swap_units(ds));
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].name == b.rows[i].name);
        CHECK(a.rows[i].value == b.rows[i].value);
        CHECK(a.rows[i].se == b.rows[i].se);
    }
}

TEST_CASE("outcome transforms map estimates affinely") {
    const DgpSpec spec = pairiv::testing::random_spec(8, pairiv::testing::SpecKind::Osn, 800);
    const Dataset ds = simulate(spec);
    const double a = 2.5, b = -1.75;
    const EstimateReport base = estimate_all(ds);
    const EstimateReport scaled = estimate_all(transform_y(ds, a, b));
    for (const char* name : {"itt_direct_peer0", "itt_indirect_own0", "itt_total", "itt_naive",
                             "late_direct", "late_indirect", "het_baseline_own",
                             "het_baseline_peer"}) {
        CHECK(row(scaled, name).value ==
              doctest::Approx(b * row(base, name).value).epsilon(1e-10));
    }
    CHECK(row(scaled, "mean_y00").value ==
          doctest::Approx(a + b * row(base, "mean_y00").value).epsilon(1e-10));
    CHECK(row(scaled, "p_c").value == doctest::Approx(row(base, "p_c").value).epsilon(1e-12));
}

TEST_CASE("negative shares warn and optionally clamp") {
    // Take-up drops between (1,0) and (1,1), so the group-complier share
    // estimate is negative.
    const Dataset ds = make_dataset({
        {0, 0, 0, 0, 1, 1, ""},
        {1, 0, 1, 1, 1, 1, ""},  // peer treated without assignment: not OSN, fine here
        {0, 1, 1, 1, 1, 1, ""},
        {1, 1, 0, 0, 1, 1, ""},
    });
    EstimateOptions opts;
    const EstimateReport r = estimate_all(ds, opts);
    bool warned = false;
    for (const std::string& w : r.warnings) warned |= w.rfind("NegativeShare:", 0) == 0;
    CHECK(warned);
    CHECK(row(r, "p_gc").value < 0.0);

    opts.clamp_shares = true;
    const EstimateReport c = estimate_all(ds, opts);
    CHECK(row(c, "p_gc").value == 0.0);
    const double sum = row(c, "p_at").value + row(c, "p_sc").value + row(c, "p_c").value +
                       row(c, "p_gc").value + row(c, "p_nt").value;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("named operations mirror the catalog rows") {
    const Dataset ds = hand_dataset();
    const Moments m = compute_moments(ds, MomentLayout{HBlock::Full8, {}});

    const TypeDistributionEstimate td = type_distribution(m);
    bool saw_pc = false;
    for (const EstimateRow& r : td.rows) {
        if (r.name == "p_c") {
            saw_pc = true;
            CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        }
    }
    CHECK(saw_pc);
    bool gc_omitted = false;
    for (const Omission& o : td.omitted) gc_omitted |= o.name == "p_gc";
    CHECK(gc_omitted);

    CHECK(itt(m, IttEstimandKind::DirectPeer0).value ==
          doctest::Approx(23.0 / 6.0).epsilon(1e-12));
    CHECK_THROWS_AS(itt(m, IttEstimandKind::Total), Error);  // empty (1,1) cell

    CHECK(late_direct(m).value == doctest::Approx(5.75).epsilon(1e-12));
    CHECK(late_indirect(m).value == doctest::Approx(6.25).epsilon(1e-12));

    const EstimateReport lam = osn_local_averages(m);
    CHECK(lam.find("mean_y00")->value == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(lam.find("mass_y10_compliers")->value == doctest::Approx(3.0).epsilon(1e-12));

    const EstimateReport het = baseline_heterogeneity(m);
    CHECK(het.find("het_baseline_own")->value == doctest::Approx(-8.25).epsilon(1e-12));

    // The family refuses outright on violating take-up.
    const Dataset bad = make_dataset({
        {0, 0, 1, 0, 1, 2, ""},
        {1, 0, 1, 0, 3, 4, ""},
        {0, 1, 0, 1, 5, 6, ""},
    });
    const Moments mb = compute_moments(bad, MomentLayout{HBlock::Full8, {}});
    CHECK_THROWS_AS(late_direct(mb), Error);
    CHECK_THROWS_AS(osn_local_averages(mb), Error);
    try {
        baseline_heterogeneity(mb);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OsnViolated);
    }
}

TEST_CASE("reduced moment blocks reproduce the general block's estimates") {
    const DgpSpec spec = pairiv::testing::random_spec(9, pairiv::testing::SpecKind::Osn, 1200);
    const Dataset ds = simulate(spec);
    const Moments full = compute_moments(ds, MomentLayout{HBlock::Full8, {}});
    const EstimateReport rf = run_estimands(full, standard_catalog(full.layout));

    SUBCASE("itt-only block") {
        const Moments itt = compute_moments(ds, MomentLayout{HBlock::IttOnly, {}});
        const EstimateReport ri = run_estimands(itt, standard_catalog(itt.layout));
        for (const EstimateRow& er : ri.rows) {
            const EstimateRow& fr = row(rf, er.name);
            CHECK(er.value == doctest::Approx(fr.value).epsilon(1e-12));
            CHECK(er.se == doctest::Approx(fr.se).epsilon(1e-6));
        }
        CHECK(ri.find("itt_direct_peer0") != nullptr);
        CHECK(ri.find("p_at") == nullptr);  // no take-up components in this block
    }
    SUBCASE("one-sided reduced block") {
        const Moments osn = compute_moments(ds, MomentLayout{HBlock::Osn4, {}});
        const EstimateReport ro = run_estimands(osn, standard_catalog(osn.layout));
        for (const char* name : {"mean_y00", "mass_y10_compliers", "mass_y01_compliant_peer",
                                 "late_direct", "late_indirect", "het_baseline_own", "p_c"}) {
            const EstimateRow& er = row(ro, name);
            const EstimateRow& fr = row(rf, name);
            CHECK(er.value == doctest::Approx(fr.value).epsilon(1e-10));
            CHECK(er.se == doctest::Approx(fr.se).epsilon(1e-6));
        }
        CHECK(ro.find("p_gc") == nullptr);  // needs the (1,1) cell
    }
}

TEST_CASE("estimand filter keeps selected rows only") {
    EstimateOptions opts;
    opts.estimand_filter = {"late_direct", "itt_*"};
    const EstimateReport r = estimate_all(hand_dataset(), opts);
    CHECK(r.find("late_direct") != nullptr);
    CHECK(r.find("itt_direct_peer0") != nullptr);
    CHECK(r.find("mean_y00") == nullptr);
    CHECK(r.find("beta0") == nullptr);
    for (const Omission& o : r.omitted) {
        CHECK(o.name.rfind("itt_", 0) == 0);
    }
}
