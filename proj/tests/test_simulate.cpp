#include <doctest.h>

#include <sstream>

#include "pairiv/dgp_io.hpp"
#include "pairiv/oracle.hpp"
#include "pairiv/simulate.hpp"
#include "support/test_util.hpp"

using namespace pairiv;

namespace {

std::string csv_of(const Dataset& ds) {
    std::ostringstream out;
    ds.write_csv(out);
    return out.str();
}

}  // namespace

TEST_CASE("simulation is byte-identical across runs and worker counts") {
    const DgpSpec spec = pairiv::testing::random_spec(61, pairiv::testing::SpecKind::General, 3000);
    const std::string a = csv_of(simulate(spec, 1));
    const std::string b = csv_of(simulate(spec, 1));
    const std::string c = csv_of(simulate(spec, 4));
    CHECK(a == b);
    CHECK(a == c);
    DgpSpec other = spec;
    other.seed += 1;
    CHECK(a != csv_of(simulate(other, 1)));
}

TEST_CASE("bernoulli outcomes are binary with means near the clamped grid") {
    DgpSpec spec = pairiv::testing::random_spec(62, pairiv::testing::SpecKind::OsnBinary, 4000);
    const Dataset ds = simulate(spec);
    double mean = 0.0;
    for (const HouseholdRecord& r : ds.records()) {
        for (const UnitObs& u : r.unit) {
            CHECK((u.y == 0.0 || u.y == 1.0));
            mean += u.y;
        }
    }
    mean /= 2.0 * ds.n_groups();
    CHECK(mean > 0.0);
    CHECK(mean < 1.0);
}

TEST_CASE("stratified simulation labels households and honors shares") {
    const DgpSpec spec =
        pairiv::testing::random_spec(63, pairiv::testing::SpecKind::StratifiedOsn, 8000);
    const Dataset ds = simulate(spec);
    REQUIRE(ds.has_strata());
    long in_first = 0;
    for (const HouseholdRecord& r : ds.records()) {
        REQUIRE(r.stratum.has_value());
        if (*r.stratum == spec.strata[0].label) ++in_first;
    }
    const double share = static_cast<double>(in_first) / ds.n_groups();
    CHECK(std::abs(share - spec.strata[0].share) < 0.02);
}

TEST_CASE("zero-noise estimates deviate from truth only through sampling") {
    DgpSpec spec = pairiv::testing::random_spec(64, pairiv::testing::SpecKind::Osn, 8000);
    spec.strata[0].outcomes =
        OutcomeModel::from_function([&](ComplianceType a, ComplianceType b, int d, int dp) {
            return spec.strata[0].outcomes.mean(a, b, d, dp);
        });  // same grid, noise removed
    const PopulationTruth tr = truth(spec);
    const Dataset ds = simulate(spec);
    const EstimateReport r = estimate_all(ds);
    for (const char* name : {"late_direct", "late_indirect", "mean_y00"}) {
        const EstimateRow* row = r.find(name);
        REQUIRE(row != nullptr);
        CHECK(std::abs(row->value - tr.at(name)) <= 4.0 * row->se);
    }
}

TEST_CASE("monte carlo study calibrates a small design") {
    DgpSpec spec = pairiv::testing::random_spec(65, pairiv::testing::SpecKind::Osn, 400);
    McOptions opts;
    opts.replications = 60;
    opts.seed = 77;
    opts.workers = 2;
    opts.estimands = {"mean_y00", "late_direct"};
    const McReport rep = mc_study(spec, opts);
    REQUIRE(rep.estimands.size() == 2);
    for (const McEstimandStats& st : rep.estimands) {
        CHECK(st.n_defined == 60);
        CHECK(st.coverage >= 0.8);
        CHECK(st.mc_sd > 0.0);
        CHECK(st.mean_se > 0.0);
    }
}

TEST_CASE("monte carlo study aggregates degenerate-denominator exclusions") {
    // No compliers at all: the ratio effects are never identified.
    DgpSpec spec;
    StratumSpec st;
    st.types = JointTypeDistribution::independent({0.0, 0.0, 0.0, 0.5, 0.5});
    st.outcomes = OutcomeModel::from_function(
        [](ComplianceType, ComplianceType, int d, int) { return 0.3 + 0.2 * d; },
        NoiseSpec{NoiseFamily::Gaussian, 0.1, 0.0});
    st.design = AssignmentDesign::from_probs(0.25, 0.25, 0.25, 0.25);
    spec.strata = {st};
    spec.groups = 300;
    spec.seed = 5;

    McOptions opts;
    opts.replications = 10;
    opts.seed = 6;
    opts.estimands = {"late_direct"};
    const McReport rep = mc_study(spec, opts);
    REQUIRE(rep.estimands.size() == 1);
    CHECK(rep.estimands[0].n_defined == 0);
    int excluded = 0;
    for (const auto& [reason, count] : rep.estimands[0].excluded) {
        CHECK(reason.rfind("DegenerateDenominator", 0) == 0);
        excluded += count;
    }
    CHECK(excluded == 10);
}

TEST_CASE("monte carlo study rejects bad inputs") {
    const DgpSpec spec = pairiv::testing::random_spec(66, pairiv::testing::SpecKind::Osn, 100);
    McOptions opts;
    opts.replications = 1;
    opts.seed = 1;
    CHECK_THROWS_AS(mc_study(spec, opts), Error);
    opts.replications = 5;
    opts.estimands = {"not_a_thing"};
    CHECK_THROWS_AS(mc_study(spec, opts), Error);
}

TEST_CASE("dgp files round-trip through the parser") {
    const std::string text = R"({
      "groups": 50,
      "seed": 9,
      "joint_types": {"marginals": [0.1, 0.2, 0.4, 0.2, 0.1]},
      "outcome_mean": {
        "default": 0.25,
        "entries": [
          {"own": "C", "peer": "*", "d": [1, "*"], "add": 0.5},
          {"own": "*", "peer": "NT", "d": ["*", "*"], "value": -1.0}
        ]
      },
      "noise": {"family": "gaussian", "scale": 0.5, "rho": 0.25},
      "design": {"p00": 0.4, "p10": 0.25, "p01": 0.25, "p11": 0.1}
    })";
    const ParsedDgp parsed = dgp_from_json(text);
    CHECK(parsed.has_seed);
    CHECK(parsed.spec.groups == 50);
    const StratumSpec& st = parsed.spec.single();
    CHECK(st.types.marginal(ComplianceType::Complier) == doctest::Approx(0.4).epsilon(1e-12));
    // Entries apply in order: the NT-peer override wins over the earlier add.
    CHECK(st.outcomes.mean(ComplianceType::Complier, ComplianceType::NeverTaker, 1, 0) == -1.0);
    CHECK(st.outcomes.mean(ComplianceType::Complier, ComplianceType::Complier, 1, 0) ==
          doctest::Approx(0.75).epsilon(1e-12));
    CHECK(st.outcomes.mean(ComplianceType::NeverTaker, ComplianceType::Complier, 0, 0) ==
          doctest::Approx(0.25).epsilon(1e-12));
    CHECK(st.design.prob(zcell_index(1, 1)) == doctest::Approx(0.1).epsilon(1e-12));

    SUBCASE("missing sections are rejected") {
        CHECK_THROWS_AS(dgp_from_json("{\"groups\": 5}"), Error);
        CHECK_THROWS_AS(dgp_from_json("not json"), Error);
    }
}
