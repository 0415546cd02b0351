#include "pairiv/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace pairiv {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

int parse_bit(const std::string& s, const std::string& column, const std::string& household) {
    if (s == "0") return 0;
    if (s == "1") return 1;
    throw Error(ErrorCode::NonBinaryValue, "NonBinaryValue:" + column,
                "value '" + s + "' in household " + household);
}

}  // namespace

Dataset Dataset::from_records(std::vector<HouseholdRecord> records) {
    if (records.empty()) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "dataset has no households");
    }
    Dataset ds;
    std::set<std::string> seen;
    std::set<std::string> labels;
    const bool expect_stratum = !records.empty() && records.front().stratum.has_value();
    for (const HouseholdRecord& r : records) {
        if (!seen.insert(r.household).second) {
            throw Error(ErrorCode::GroupSizeNot2, "GroupSizeNot2:" + r.household,
                        "duplicate household id");
        }
        if (r.stratum.has_value() != expect_stratum) {
            throw Error(ErrorCode::InconsistentStratum, "InconsistentStratum:" + r.household,
                        "stratum label present for some households only");
        }
        for (const UnitObs& u : r.unit) {
            if (u.d != 0 && u.d != 1) {
                throw Error(ErrorCode::NonBinaryValue, "NonBinaryValue:d",
                            "household " + r.household);
            }
            if (u.z != 0 && u.z != 1) {
                throw Error(ErrorCode::NonBinaryValue, "NonBinaryValue:z",
                            "household " + r.household);
            }
            if (!std::isfinite(u.y)) {
                throw Error(ErrorCode::NonFiniteOutcome, "NonFiniteOutcome:" + r.household);
            }
        }
        if (r.stratum) labels.insert(*r.stratum);
    }
    std::sort(records.begin(), records.end(),
              [](const HouseholdRecord& a, const HouseholdRecord& b) {
                  return a.household < b.household;
              });
    ds.records_ = std::move(records);
    ds.strata_.assign(labels.begin(), labels.end());
    for (const HouseholdRecord& r : ds.records_) {
        ds.cell_counts_[zcell_index(r.unit[0].z, r.unit[1].z)]++;
        ds.cell_counts_[zcell_index(r.unit[1].z, r.unit[0].z)]++;
        for (const UnitObs& u : r.unit) {
            if (u.d == 1 && u.z == 0) ds.osn_hard_count_++;
        }
    }
    return ds;
}

Dataset Dataset::load_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::MissingColumn, "MissingColumn:household", "empty input");
    }
    auto header = split_csv_line(line);
    for (auto& h : header) h = strip(h);
    std::map<std::string, int> col;
    for (int i = 0; i < static_cast<int>(header.size()); ++i) col[header[i]] = i;
    for (const char* required : {"household", "unit", "z", "d", "y"}) {
        if (!col.count(required)) {
            throw Error(ErrorCode::MissingColumn, std::string("MissingColumn:") + required);
        }
    }
    const bool has_x = col.count("x") > 0;

    struct PartialRow {
        int unit;
        UnitObs obs;
        std::string stratum;
    };
    std::map<std::string, std::vector<PartialRow>> by_household;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() < header.size()) {
            throw Error(ErrorCode::NonBinaryValue, "NonBinaryValue:row",
                        "line " + std::to_string(line_no) + " has too few fields");
        }
        PartialRow row;
        const std::string household = strip(fields[col["household"]]);
        const std::string unit_s = strip(fields[col["unit"]]);
        if (unit_s == "1") {
            row.unit = 0;
        } else if (unit_s == "2") {
            row.unit = 1;
        } else {
            throw Error(ErrorCode::BadUnitIndex, "BadUnitIndex:" + household,
                        "unit must be 1 or 2, got '" + unit_s + "'");
        }
        row.obs.z = parse_bit(strip(fields[col["z"]]), "z", household);
        row.obs.d = parse_bit(strip(fields[col["d"]]), "d", household);
        try {
            row.obs.y = std::stod(strip(fields[col["y"]]));
        } catch (const std::exception&) {
            throw Error(ErrorCode::NonFiniteOutcome, "NonFiniteOutcome:" + household,
                        "unparseable y '" + strip(fields[col["y"]]) + "'");
        }
        if (!std::isfinite(row.obs.y)) {
            throw Error(ErrorCode::NonFiniteOutcome, "NonFiniteOutcome:" + household);
        }
        if (has_x) row.stratum = strip(fields[col["x"]]);
        by_household[household].push_back(row);
    }

    std::vector<HouseholdRecord> records;
    records.reserve(by_household.size());
    for (auto& [household, rows] : by_household) {
        if (rows.size() != 2) {
            throw Error(ErrorCode::GroupSizeNot2, "GroupSizeNot2:" + household,
                        std::to_string(rows.size()) + " row(s)");
        }
        if (rows[0].unit == rows[1].unit) {
            throw Error(ErrorCode::BadUnitIndex, "BadUnitIndex:" + household,
                        "duplicate unit index");
        }
        if (rows[0].unit == 1) std::swap(rows[0], rows[1]);
        HouseholdRecord rec;
        rec.household = household;
        rec.unit[0] = rows[0].obs;
        rec.unit[1] = rows[1].obs;
        if (has_x) {
            if (rows[0].stratum != rows[1].stratum) {
                throw Error(ErrorCode::InconsistentStratum, "InconsistentStratum:" + household,
                            "'" + rows[0].stratum + "' vs '" + rows[1].stratum + "'");
            }
            if (rows[0].stratum.empty()) {
                throw Error(ErrorCode::InconsistentStratum, "InconsistentStratum:" + household,
                            "empty stratum label");
            }
            rec.stratum = rows[0].stratum;
        }
        records.push_back(std::move(rec));
    }
    return from_records(std::move(records));
}

Dataset Dataset::load_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "IoError", "cannot open " + path.string());
    }
    return load_csv(in);
}

void Dataset::write_csv(std::ostream& out) const {
    const bool has_x = has_strata();
    out << "household,unit,z,d,y";
    if (has_x) out << ",x";
    out << "\n";
    char buf[64];
    for (const HouseholdRecord& r : records_) {
        for (int i = 0; i < 2; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", r.unit[i].y);
            out << r.household << ',' << (i + 1) << ',' << r.unit[i].z << ',' << r.unit[i].d
                << ',' << buf;
            if (has_x) out << ',' << *r.stratum;
            out << "\n";
        }
    }
}

void Dataset::write_csv_file(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoError, "IoError", "cannot write " + path.string());
    }
    write_csv(out);
}

}  // namespace pairiv
