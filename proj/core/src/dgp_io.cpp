#include "pairiv/dgp_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace pairiv {

namespace {

using nlohmann::json;

[[noreturn]] void bad_spec(const std::string& what) {
    throw Error(ErrorCode::InvalidSpec, "InvalidSpec", what);
}

JointTypeDistribution parse_joint_types(const json& j) {
    if (j.contains("marginals")) {
        const auto& m = j.at("marginals");
        if (!m.is_array() || m.size() != 5) bad_spec("joint_types.marginals needs 5 entries");
        std::array<double, 5> marg{};
        for (int i = 0; i < 5; ++i) marg[i] = m[i].get<double>();
        return JointTypeDistribution::independent(marg);
    }
    if (j.contains("table")) {
        const auto& t = j.at("table");
        if (!t.is_array() || t.size() != 5) bad_spec("joint_types.table needs 5 rows");
        std::array<double, 25> p{};
        for (int a = 0; a < 5; ++a) {
            if (!t[a].is_array() || t[a].size() != 5) {
                bad_spec("joint_types.table rows need 5 entries");
            }
            for (int b = 0; b < 5; ++b) p[a * 5 + b] = t[a][b].get<double>();
        }
        return JointTypeDistribution::from_table(p);
    }
    bad_spec("joint_types needs either 'marginals' or 'table'");
}

std::vector<ComplianceType> parse_type_set(const json& j, const char* key) {
    const std::string s = j.at(key).get<std::string>();
    if (s == "*") {
        return {kAllTypes.begin(), kAllTypes.end()};
    }
    auto t = compliance_type_from_string(s);
    if (!t) bad_spec(std::string("unknown compliance type '") + s + "' in outcome_mean");
    return {*t};
}

std::vector<int> parse_bit_set(const json& j) {
    if (j.is_string() && j.get<std::string>() == "*") return {0, 1};
    if (j.is_number_integer()) {
        const int v = j.get<int>();
        if (v != 0 && v != 1) bad_spec("outcome_mean d entries must be 0, 1 or \"*\"");
        return {v};
    }
    bad_spec("outcome_mean d entries must be 0, 1 or \"*\"");
}

NoiseSpec parse_noise(const json& j) {
    NoiseSpec n;
    const std::string family = j.value("family", "none");
    if (family == "none") {
        n.family = NoiseFamily::None;
    } else if (family == "gaussian") {
        n.family = NoiseFamily::Gaussian;
    } else if (family == "bernoulli") {
        n.family = NoiseFamily::Bernoulli;
    } else {
        bad_spec("unknown noise family '" + family + "'");
    }
    n.scale = j.value("scale", 0.0);
    n.rho = j.value("rho", 0.0);
    return n;
}

OutcomeModel parse_outcome_mean(const json& j, NoiseSpec noise) {
    std::array<double, 100> grid{};
    grid.fill(j.value("default", 0.0));
    if (j.contains("entries")) {
        for (const auto& entry : j.at("entries")) {
            const auto own = parse_type_set(entry, "own");
            const auto peer = parse_type_set(entry, "peer");
            const auto& d = entry.at("d");
            if (!d.is_array() || d.size() != 2) bad_spec("outcome_mean entry d must be a pair");
            const auto d_own = parse_bit_set(d[0]);
            const auto d_peer = parse_bit_set(d[1]);
            const bool additive = entry.contains("add");
            const double v = additive ? entry.at("add").get<double>()
                                      : entry.at("value").get<double>();
            for (ComplianceType a : own) {
                for (ComplianceType b : peer) {
                    for (int i : d_own) {
                        for (int k : d_peer) {
                            double& cell = grid[OutcomeModel::grid_index(a, b, i, k)];
                            cell = additive ? cell + v : v;
                        }
                    }
                }
            }
        }
    }
    return OutcomeModel(grid, noise);
}

AssignmentDesign parse_design(const json& j) {
    const bool allow_asym = j.value("allow_asymmetric", false);
    return AssignmentDesign::from_probs(j.value("p00", 0.0), j.value("p10", 0.0),
                                        j.value("p01", 0.0), j.value("p11", 0.0), allow_asym);
}

StratumSpec parse_stratum(const json& j, const json& root) {
    StratumSpec st;
    const json& types = j.contains("joint_types") ? j.at("joint_types")
                                                  : root.at("joint_types");
    st.types = parse_joint_types(types);
    const json noise_j = j.contains("noise") ? j.at("noise")
                                             : root.value("noise", json::object());
    const NoiseSpec noise = parse_noise(noise_j);
    const json mean_j = j.contains("outcome_mean") ? j.at("outcome_mean")
                                                   : root.value("outcome_mean", json::object());
    st.outcomes = parse_outcome_mean(mean_j, noise);
    const json& design = j.contains("design") ? j.at("design") : root.at("design");
    st.design = parse_design(design);
    return st;
}

}  // namespace

ParsedDgp dgp_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        bad_spec(std::string("DGP spec is not valid JSON: ") + e.what());
    }
    try {
        ParsedDgp out;
        if (!j.contains("groups")) bad_spec("DGP spec needs 'groups'");
        out.spec.groups = j.at("groups").get<int>();
        if (j.contains("seed")) {
            out.spec.seed = j.at("seed").get<std::uint64_t>();
            out.has_seed = true;
        }
        if (j.contains("strata")) {
            for (const auto& sj : j.at("strata")) {
                StratumSpec st = parse_stratum(sj, j);
                st.label = sj.value("label", "");
                st.share = sj.at("share").get<double>();
                out.spec.strata.push_back(std::move(st));
            }
        } else {
            StratumSpec st = parse_stratum(j, j);
            st.share = 1.0;
            out.spec.strata.push_back(std::move(st));
        }
        out.warnings = out.spec.validate();
        return out;
    } catch (const json::exception& e) {
        bad_spec(std::string("malformed DGP spec: ") + e.what());
    }
}

ParsedDgp dgp_from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "IoError", "cannot open " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return dgp_from_json(ss.str());
}

}  // namespace pairiv
