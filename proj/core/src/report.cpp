#include "pairiv/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <sstream>

#include "pairiv/estimators.hpp"

namespace pairiv {

namespace {

using ordered_json = nlohmann::ordered_json;

// Round to 15 significant digits so serialized reports are stable and fit
// the documented precision.
double round15(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return std::strtod(buf, nullptr);
}

ordered_json row_json(const EstimateRow& r) {
    ordered_json j;
    j["name"] = r.name;
    j["value"] = round15(r.value);
    j["se"] = round15(r.se);
    j["ci"] = {round15(r.ci_lo), round15(r.ci_hi)};
    j["formula"] = r.formula;
    return j;
}

}  // namespace

std::string report_to_json(const EstimateReport& report) {
    ordered_json j;
    j["n_groups"] = report.n_groups;
    j["ci_level"] = round15(report.ci_level);
    j["estimates"] = ordered_json::array();
    for (const EstimateRow& r : report.rows) j["estimates"].push_back(row_json(r));
    j["omitted"] = ordered_json::array();
    for (const Omission& o : report.omitted) {
        j["omitted"].push_back({{"name", o.name}, {"reason", o.reason}});
    }
    j["warnings"] = report.warnings;
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : report.meta_num) meta[k] = round15(v);
    for (const auto& [k, v] : report.meta_str) meta[k] = v;
    j["meta"] = meta;
    return j.dump(2) + "\n";
}

std::string truth_to_json(const PopulationTruth& truth, const DgpSpec& spec) {
    ordered_json j;
    j["groups"] = spec.groups;
    j["seed"] = spec.seed;
    ordered_json values = ordered_json::object();
    for (const auto& [name, v] : truth.values) values[name] = round15(v);
    j["truths"] = values;
    ordered_json omitted = ordered_json::object();
    for (const auto& [name, reason] : truth.omitted) omitted[name] = reason;
    j["omitted"] = omitted;

    // Decomposition weight tables for the process (single-stratum only; the
    // stratified tables live per stratum).
    if (!spec.stratified()) {
        ordered_json weights = ordered_json::object();
        struct KindName {
            IttKind kind;
            const char* name;
        };
        for (const KindName& kn : {KindName{IttKind::Direct, "direct"},
                                   KindName{IttKind::Indirect, "indirect"},
                                   KindName{IttKind::Total, "total"}}) {
            try {
                const WeightTable t = itt_weight_decomposition(spec.single().types, kn.kind);
                ordered_json wj;
                wj["weights"] = ordered_json::array();
                wj["rescaled"] = ordered_json::array();
                for (int i = 0; i < 5; ++i) {
                    wj["weights"].push_back(round15(t.weights[i]));
                    wj["rescaled"].push_back(round15(t.rescaled[i]));
                }
                wj["raw_sum"] = round15(t.raw_sum);
                wj["first_stage"] = round15(t.first_stage);
                wj["rescaled_sum"] = round15(t.rescaled_sum);
                weights[kn.name] = wj;
            } catch (const Error&) {
                weights[kn.name] = "ZeroFirstStage";
            }
        }
        j["itt_weights"] = weights;
    }
    return j.dump(2) + "\n";
}

std::string mc_report_to_json(const McReport& report) {
    ordered_json j;
    j["replications"] = report.replications;
    j["groups"] = report.groups;
    j["seed"] = report.seed;
    j["ci_level"] = round15(report.ci_level);
    j["estimands"] = ordered_json::array();
    for (const McEstimandStats& st : report.estimands) {
        ordered_json e;
        e["name"] = st.name;
        e["truth"] = std::isfinite(st.truth) ? ordered_json(round15(st.truth))
                                             : ordered_json(nullptr);
        e["n_defined"] = st.n_defined;
        e["bias"] = round15(st.bias);
        e["mc_sd"] = round15(st.mc_sd);
        e["mean_se"] = round15(st.mean_se);
        e["coverage"] = round15(st.coverage);
        ordered_json excluded = ordered_json::object();
        for (const auto& [reason, count] : st.excluded) excluded[reason] = count;
        e["excluded"] = excluded;
        j["estimands"].push_back(e);
    }
    return j.dump(2) + "\n";
}

std::string identity_report_to_json(const IdentityReport& report) {
    ordered_json j;
    j["all_pass"] = report.all_pass;
    j["max_residual"] = round15(report.max_residual);
    j["n_applicable"] = report.n_applicable;
    j["checks"] = ordered_json::array();
    for (const IdentityCheck& c : report.checks) {
        ordered_json cj;
        cj["name"] = c.name;
        cj["applicable"] = c.applicable;
        if (c.applicable) {
            cj["lhs"] = round15(c.lhs);
            cj["rhs"] = round15(c.rhs);
            cj["residual"] = round15(c.residual);
            cj["pass"] = c.pass;
        }
        if (!c.note.empty()) cj["note"] = c.note;
        j["checks"].push_back(cj);
    }
    return j.dump(2) + "\n";
}

std::string report_to_table(const EstimateReport& report) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-36s %12s %12s %12s %12s  %s\n", "estimand", "value",
                  "se", "ci_lo", "ci_hi", "formula");
    out << buf;
    out << std::string(110, '-') << "\n";
    for (const EstimateRow& r : report.rows) {
        std::snprintf(buf, sizeof(buf), "%-36s %12.6f %12.6f %12.6f %12.6f  %s\n",
                      r.name.c_str(), r.value, r.se, r.ci_lo, r.ci_hi, r.formula.c_str());
        out << buf;
    }
    if (!report.omitted.empty()) {
        out << "\nomitted:\n";
        for (const Omission& o : report.omitted) {
            out << "  " << o.name << ": " << o.reason << "\n";
        }
    }
    if (!report.warnings.empty()) {
        out << "\nwarnings:\n";
        for (const std::string& w : report.warnings) out << "  " << w << "\n";
    }
    std::snprintf(buf, sizeof(buf), "\nn_groups=%d  ci_level=%g\n", report.n_groups,
                  report.ci_level);
    out << buf;
    for (const auto& [k, v] : report.meta_num) {
        std::snprintf(buf, sizeof(buf), "%s=%.6g\n", k.c_str(), v);
        out << buf;
    }
    for (const auto& [k, v] : report.meta_str) out << k << "=" << v << "\n";
    return out.str();
}

}  // namespace pairiv
