#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pairiv/model.hpp"

namespace pairiv {

struct UnitObs {
    double y = 0.0;
    int d = 0;
    int z = 0;
};

// One group's observations: exactly two units, an optional discrete stratum
// label shared by both.
struct HouseholdRecord {
    std::string household;
    std::array<UnitObs, 2> unit;
    std::optional<std::string> stratum;
};

// Validated, immutable experiment data. Records are sorted by household id;
// cell counts are unit-perspective counts (each group contributes two).
class Dataset {
public:
    static Dataset from_records(std::vector<HouseholdRecord> records);

    // Long-format delimited text: header `household,unit,z,d,y[,x]`, two rows
    // per household with unit in {1,2}.
    static Dataset load_csv(std::istream& in);
    static Dataset load_csv_file(const std::filesystem::path& path);

    void write_csv(std::ostream& out) const;
    void write_csv_file(const std::filesystem::path& path) const;

    const std::vector<HouseholdRecord>& records() const { return records_; }
    int n_groups() const { return static_cast<int>(records_.size()); }

    // Unit-perspective counts of (z_own, z_peer) cells; sums to 2 * n_groups.
    const std::array<long, 4>& cell_counts() const { return cell_counts_; }

    bool has_strata() const { return !strata_.empty(); }
    const std::vector<std::string>& strata() const { return strata_; }  // sorted, unique

    // Number of unit observations with d=1 and z=0 (hard evidence against
    // one-sided noncompliance).
    long osn_hard_count() const { return osn_hard_count_; }

private:
    Dataset() = default;
    std::vector<HouseholdRecord> records_;
    std::array<long, 4> cell_counts_{};
    std::vector<std::string> strata_;
    long osn_hard_count_ = 0;
};

// One-sided noncompliance diagnostic: estimated shares of always-takers and
// social compliers with cluster-robust standard errors, plus the hard count
// of d=1, z=0 records. `consistent` iff the hard count is zero.
struct OsnDiagnostic {
    double p_at = 0.0;
    double se_at = 0.0;
    double p_sc = 0.0;
    double se_sc = 0.0;
    long hard_count = 0;
    bool consistent = false;
};

// Requires nonempty (0,0) and (0,1) assignment cells; throws EmptyCell
// otherwise.
OsnDiagnostic check_osn(const Dataset& ds);

}  // namespace pairiv
