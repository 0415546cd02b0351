#include <doctest.h>

#include <cmath>

#include "pairiv/estimators.hpp"
#include "pairiv/oracle.hpp"
#include "pairiv/simulate.hpp"
#include "support/test_util.hpp"

using namespace pairiv;
using pairiv::testing::make_dataset;

namespace {

const EstimateRow& row(const EstimateReport& r, const std::string& name) {
    const EstimateRow* p = r.find(name);
    REQUIRE_MESSAGE(p != nullptr, "missing row ", name);
    return *p;
}

Dataset with_constant_stratum(const Dataset& ds, const std::string& label) {
    std::vector<HouseholdRecord> records = ds.records();
    for (HouseholdRecord& r : records) r.stratum = label;
    return Dataset::from_records(std::move(records));
}

bool rel_eq(double a, double b, double tol = 1e-10) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("a single stratum reduces to the unconditional estimands") {
    const DgpSpec spec = pairiv::testing::random_spec(31, pairiv::testing::SpecKind::Osn, 900);
    const Dataset base = simulate(spec);
    const Dataset ds = with_constant_stratum(base, "a");

    const EstimateReport uncond = estimate_all(base);
    ConditionalOptions opts;
    const EstimateReport cond = conditional_estimands(ds, opts);

    CHECK(rel_eq(row(cond, "cond_mean_y00").value, row(uncond, "mean_y00").value));
    CHECK(rel_eq(row(cond, "cond_mass_y10_compliers").value,
                 row(uncond, "mass_y10_compliers").value));
    CHECK(rel_eq(row(cond, "cond_mass_y01_compliant_peer").value,
                 row(uncond, "mass_y01_compliant_peer").value));
    CHECK(rel_eq(row(cond, "cond_mass_y00_compliers").value,
                 row(uncond, "mass_y00_compliers").value));
    CHECK(rel_eq(row(cond, "cond_mass_y00_compliant_peer").value,
                 row(uncond, "mass_y00_compliant_peer").value));
    // Within-stratum take-up share = unconditional first stage under a
    // constant covariate.
    CHECK(rel_eq(row(cond, "p_c_x_a").value,
                 row(uncond, "first_stage_own").value + row(uncond, "p_at").value));
}

TEST_CASE("a constant covariate makes complier composition degenerate") {
    const DgpSpec spec = pairiv::testing::random_spec(32, pairiv::testing::SpecKind::Osn, 700);
    const Dataset ds = with_constant_stratum(simulate(spec), "a");
    ConditionalOptions opts;
    opts.g = GSpec::XIndicator;
    const EstimateReport r = conditional_estimands(ds, opts);
    CHECK(rel_eq(row(r, "cond_share_x_a").value, 1.0));
    // E[1(X=a) | complier] P[C] = P[C]: composition is 100% "a".
    CHECK(rel_eq(row(r, "cond_mass_x_a_compliers").value, row(r, "p_c_x_a").value));
}

TEST_CASE("two-stratum estimates track the oracle truth") {
    const DgpSpec spec =
        pairiv::testing::random_spec(33, pairiv::testing::SpecKind::StratifiedOsn, 12000);
    const PopulationTruth tr = truth(spec);
    const Dataset ds = simulate(spec);
    REQUIRE(ds.has_strata());

    const EstimateReport r = estimate_all(ds);
    int checked = 0;
    for (const EstimateRow& er : r.rows) {
        if (er.name.rfind("cond_", 0) != 0 && er.name.rfind("p_c_x_", 0) != 0 &&
            er.name.rfind("p_gc_x_", 0) != 0 && er.name.rfind("p_nt_x_", 0) != 0) {
            continue;
        }
        if (!tr.has(er.name) || er.se <= 0.0) continue;
        ++checked;
        CHECK_MESSAGE(std::abs(er.value - tr.at(er.name)) <= 4.0 * er.se, er.name,
                      " est=", er.value, " truth=", tr.at(er.name), " se=", er.se);
    }
    CHECK(checked >= 10);
}

TEST_CASE("known design probabilities replace estimated propensities") {
    const DgpSpec spec =
        pairiv::testing::random_spec(34, pairiv::testing::SpecKind::StratifiedOsn, 9000);
    const Dataset ds = simulate(spec);
    ConditionalOptions opts;
    std::vector<std::pair<std::string, AssignmentDesign>> designs;
    for (const StratumSpec& st : spec.strata) designs.emplace_back(st.label, st.design);
    opts.known_design = designs;
    const EstimateReport r = conditional_estimands(ds, opts);
    const PopulationTruth tr = truth(spec);
    for (const char* name : {"cond_mean_y00", "cond_mass_y10_compliers"}) {
        const EstimateRow& er = row(r, name);
        CHECK(std::abs(er.value - tr.at(name)) <= 4.0 * er.se);
    }
    SUBCASE("designs must cover every stratum") {
        opts.known_design = {{std::string("a"), spec.strata[0].design}};
        CHECK_THROWS_AS(conditional_estimands(ds, opts), Error);
    }
}

TEST_CASE("missing stratum cells surface as typed omissions") {
    // Stratum "b" never sees cell (1,0).
    const Dataset ds = make_dataset({
        {0, 0, 0, 0, 1, 2, "a"},
        {1, 0, 1, 0, 3, 4, "a"},
        {0, 1, 0, 1, 5, 6, "a"},
        {1, 1, 1, 1, 7, 8, "a"},
        {0, 0, 0, 0, 1, 2, "b"},
        {1, 1, 1, 1, 3, 4, "b"},
    });
    ConditionalOptions opts;
    const EstimateReport r = conditional_estimands(ds, opts);
    bool found = false;
    for (const Omission& o : r.omitted) {
        if (o.name == "p_c_x_b") {
            found = true;
            CHECK(o.reason == "EmptyStratumCell(b,1,0)");
        }
    }
    CHECK(found);
}

TEST_CASE("violating take-up gates the conditional family") {
    const Dataset ds = make_dataset({
        {0, 0, 1, 0, 1, 2, "a"},
        {1, 0, 1, 0, 3, 4, "a"},
        {0, 1, 0, 1, 5, 6, "a"},
        {1, 1, 1, 1, 7, 8, "a"},
    });
    ConditionalOptions opts;
    const EstimateReport r = conditional_estimands(ds, opts);
    CHECK(r.rows.empty());
    bool all_osn = !r.omitted.empty();
    for (const Omission& o : r.omitted) all_osn &= o.reason == "OSNViolated";
    CHECK(all_osn);
}

TEST_CASE("conditional estimands need a covariate column") {
    const Dataset ds = make_dataset({{0, 0, 0, 0, 1, 2, ""}, {1, 0, 1, 0, 3, 4, ""}});
    CHECK_THROWS_AS(conditional_estimands(ds, ConditionalOptions{}), Error);
}
