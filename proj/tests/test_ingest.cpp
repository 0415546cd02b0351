#include <doctest.h>

#include <sstream>

#include "pairiv/dataset.hpp"
#include "support/test_util.hpp"

using namespace pairiv;
using pairiv::testing::make_dataset;

namespace {

Dataset from_csv(const std::string& text) {
    std::istringstream in(text);
    return Dataset::load_csv(in);
}

const char* kSmallCsv =
    "household,unit,z,d,y\n"
    "h2,1,1,1,0.5\n"
    "h2,2,0,0,1.5\n"
    "h1,2,0,0,2.0\n"
    "h1,1,0,0,1.0\n";

}  // namespace

TEST_CASE("smallest valid table loads and orders deterministically") {
    const Dataset ds = from_csv(kSmallCsv);
    CHECK(ds.n_groups() == 2);
    CHECK(ds.records()[0].household == "h1");
    CHECK(ds.records()[0].unit[0].y == 1.0);
    CHECK(ds.records()[0].unit[1].y == 2.0);
    CHECK(ds.records()[1].household == "h2");
    CHECK_FALSE(ds.has_strata());
}

TEST_CASE("loader rejects malformed tables") {
    SUBCASE("three rows in a household") {
        const std::string text =
            "household,unit,z,d,y\nh1,1,0,0,1\nh1,2,0,0,1\nh2,1,0,0,1\nh2,2,0,0,1\nh2,2,0,0,1\n";
        try {
            from_csv(text);
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::GroupSizeNot2);
            CHECK(e.condition() == "GroupSizeNot2:h2");
        }
    }
    SUBCASE("single row household") {
        try {
            from_csv("household,unit,z,d,y\nh1,1,0,0,1\n");
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::GroupSizeNot2);
            CHECK(e.condition() == "GroupSizeNot2:h1");
        }
    }
    SUBCASE("missing column") {
        try {
            from_csv("household,unit,z,y\nh1,1,0,1\nh1,2,0,1\n");
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MissingColumn);
            CHECK(e.condition() == "MissingColumn:d");
        }
    }
    SUBCASE("non-binary take-up") {
        try {
            from_csv("household,unit,z,d,y\nh1,1,0,2,1\nh1,2,0,0,1\n");
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonBinaryValue);
        }
    }
    SUBCASE("non-finite outcome") {
        try {
            from_csv("household,unit,z,d,y\nh1,1,0,0,nan\nh1,2,0,0,1\n");
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonFiniteOutcome);
        }
    }
    SUBCASE("bad unit index") {
        CHECK_THROWS_AS(from_csv("household,unit,z,d,y\nh1,1,0,0,1\nh1,3,0,0,1\n"), Error);
    }
    SUBCASE("stratum label differs within a household") {
        try {
            from_csv("household,unit,z,d,y,x\nh1,1,0,0,1,a\nh1,2,0,0,1,b\n");
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InconsistentStratum);
        }
    }
}

TEST_CASE("csv round trip preserves the dataset") {
    const Dataset ds = make_dataset({
        {0, 0, 0, 0, 1.25, -3.5e-7, "a"},
        {1, 0, 1, 0, 0.1 + 0.2, 2.0 / 3.0, "b"},
        {0, 1, 0, 1, 1e17, -42.0, "a"},
    });
    std::ostringstream out;
    ds.write_csv(out);
    const Dataset back = from_csv(out.str());
    REQUIRE(back.n_groups() == ds.n_groups());
    for (int g = 0; g < ds.n_groups(); ++g) {
        const auto& a = ds.records()[g];
        const auto& b = back.records()[g];
        CHECK(a.household == b.household);
        CHECK(a.stratum == b.stratum);
        for (int i = 0; i < 2; ++i) {
            CHECK(a.unit[i].y == b.unit[i].y);  // exact: %.17g round-trips
            CHECK(a.unit[i].d == b.unit[i].d);
            CHECK(a.unit[i].z == b.unit[i].z);
        }
    }
}

TEST_CASE("cell counts cover both unit perspectives") {
    const Dataset ds = make_dataset({
        {0, 0, 0, 0, 0, 0, ""},
        {1, 0, 1, 0, 0, 0, ""},
        {1, 1, 1, 1, 0, 0, ""},
    });
    long total = 0;
    for (long c : ds.cell_counts()) total += c;
    CHECK(total == 2 * ds.n_groups());
    CHECK(ds.cell_counts()[zcell_index(0, 0)] == 2);
    CHECK(ds.cell_counts()[zcell_index(1, 0)] == 1);  // from unit 1 of household 2
    CHECK(ds.cell_counts()[zcell_index(0, 1)] == 1);  // same household, unit 2's view
    CHECK(ds.cell_counts()[zcell_index(1, 1)] == 2);
}

TEST_CASE("one-sided noncompliance diagnostic") {
    SUBCASE("perfect compliance is consistent with zero shares") {
        const Dataset ds = make_dataset({
            {0, 0, 0, 0, 1, 2, ""},
            {1, 0, 1, 0, 3, 4, ""},
            {0, 1, 0, 1, 5, 6, ""},
        });
        const OsnDiagnostic diag = check_osn(ds);
        CHECK(diag.consistent);
        CHECK(diag.hard_count == 0);
        CHECK(diag.p_at == 0.0);
        CHECK(diag.p_sc == 0.0);
    }
    SUBCASE("d=1 with z=0 is a diagnostic, not a load error") {
        const Dataset ds = make_dataset({
            {0, 0, 1, 0, 1, 2, ""},  // unit 1 treated without assignment
            {1, 0, 1, 0, 3, 4, ""},
            {0, 1, 0, 1, 5, 6, ""},
        });
        CHECK(ds.osn_hard_count() == 1);
        const OsnDiagnostic diag = check_osn(ds);
        CHECK_FALSE(diag.consistent);
        CHECK(diag.hard_count == 1);
        CHECK(diag.p_at > 0.0);
    }
    SUBCASE("missing mixed-assignment cell raises EmptyCell") {
        const Dataset ds = make_dataset({
            {0, 0, 0, 0, 1, 2, ""},
            {1, 1, 1, 1, 3, 4, ""},
        });
        try {
            check_osn(ds);
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyCell);
            CHECK(e.condition() == "EmptyCell(0,1)");
        }
    }
}
