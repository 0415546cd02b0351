#include "pairiv/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "pairiv/delta.hpp"
#include "pairiv/estimators.hpp"
#include "pairiv/moments.hpp"
#include "pairiv/oracle.hpp"
#include "pairiv/parallel.hpp"
#include "pairiv/rng.hpp"

namespace pairiv {

namespace {

int id_width(int groups) {
    int w = 1;
    for (int v = groups; v >= 10; v /= 10) ++w;
    return w;
}

// Cumulative-probability pick; the last positive entry absorbs rounding.
template <typename Prob>
int pick(double u, int n, const Prob& prob) {
    double acc = 0.0;
    int last_positive = 0;
    for (int i = 0; i < n; ++i) {
        const double p = prob(i);
        if (p > 0.0) last_positive = i;
        acc += p;
        if (u <= acc && p > 0.0) return i;
    }
    return last_positive;
}

}  // namespace

Dataset simulate(const DgpSpec& spec, int workers) {
    spec.validate();
    const int width = id_width(spec.groups);
    std::vector<HouseholdRecord> records(spec.groups);

    parallel_chunks(spec.groups, workers, [&](std::size_t, std::size_t b, std::size_t e) {
        char buf[32];
        for (std::size_t g = b; g < e; ++g) {
            rng::Stream stream(spec.seed, g);
            const StratumSpec* st = &spec.strata.front();
            if (spec.stratified()) {
                const int s = pick(stream.uniform(), static_cast<int>(spec.strata.size()),
                                   [&](int i) { return spec.strata[i].share; });
                st = &spec.strata[s];
            }
            const int pair = pick(stream.uniform(), 25, [&](int i) {
                return st->types.p(kAllTypes[i / 5], kAllTypes[i % 5]);
            });
            const ComplianceType t1 = kAllTypes[pair / 5];
            const ComplianceType t2 = kAllTypes[pair % 5];
            const int zc = pick(stream.uniform(), 4, [&](int i) { return st->design.prob(i); });
            const int z1 = zcell_own(zc);
            const int z2 = zcell_peer(zc);
            const int d1 = potential_treatment(t1, z1, z2);
            const int d2 = potential_treatment(t2, z2, z1);
            const double m1 = st->outcomes.effective_mean(t1, t2, d1, d2);
            const double m2 = st->outcomes.effective_mean(t2, t1, d2, d1);

            double y1 = m1, y2 = m2;
            const NoiseSpec& noise = st->outcomes.noise();
            if (noise.family == NoiseFamily::Gaussian) {
                double e1, e2;
                stream.correlated_normal_pair(noise.rho, e1, e2);
                y1 = m1 + noise.scale * e1;
                y2 = m2 + noise.scale * e2;
            } else if (noise.family == NoiseFamily::Bernoulli) {
                // Gaussian copula keeps the marginal success probabilities at
                // the (clamped) grid means while inducing correlation rho on
                // the latent scale.
                double e1, e2;
                stream.correlated_normal_pair(noise.rho, e1, e2);
                y1 = rng::normal_cdf(e1) < m1 ? 1.0 : 0.0;
                y2 = rng::normal_cdf(e2) < m2 ? 1.0 : 0.0;
            }

            HouseholdRecord& rec = records[g];
            std::snprintf(buf, sizeof(buf), "%0*lld", width, static_cast<long long>(g + 1));
            rec.household = buf;
            rec.unit[0] = UnitObs{y1, d1, z1};
            rec.unit[1] = UnitObs{y2, d2, z2};
            if (spec.stratified()) rec.stratum = st->label;
        }
    });
    return Dataset::from_records(std::move(records));
}

// ---------------------------------------------------------------------------
// Monte Carlo calibration study
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string>& default_mc_estimands() {
    static const std::vector<std::string> names = {
        "mean_y00", "p_c", "itt_direct_peer0", "itt_indirect_own0",
        "late_direct", "late_indirect",
    };
    return names;
}

}  // namespace

McReport mc_study(const DgpSpec& spec, const McOptions& opts) {
    if (opts.replications < 2) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "need at least 2 replications");
    }
    spec.validate();
    const std::vector<std::string> names =
        opts.estimands.empty() ? default_mc_estimands() : opts.estimands;

    const MomentLayout layout{HBlock::Full8, {}};
    std::vector<Estimand> estimands;
    for (const std::string& name : names) {
        auto e = find_estimand(layout, name);
        if (!e) {
            throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "unknown estimand " + name);
        }
        estimands.push_back(std::move(*e));
    }

    const PopulationTruth tr = truth(spec);

    struct RepResult {
        std::vector<EstimateRow> rows;
        std::vector<Omission> omitted;
    };
    std::vector<RepResult> results(opts.replications);

    // One replication per task; the chunked scheduler is already deterministic
    // in output placement, and each replication derives its own seed.
    parallel_chunks(opts.replications, opts.workers,
                    [&](std::size_t, std::size_t b, std::size_t e) {
                        for (std::size_t r = b; r < e; ++r) {
                            DgpSpec rep_spec = spec;
                            rep_spec.seed = rng::mix(opts.seed, 0x6D63u + r);
                            const Dataset ds = simulate(rep_spec, 1);
                            const Moments m = compute_moments(ds, layout);
                            EstimateReport rep =
                                run_estimands(m, estimands, DeltaOptions{opts.ci_level});
                            results[r].rows = std::move(rep.rows);
                            results[r].omitted = std::move(rep.omitted);
                        }
                    });

    McReport report;
    report.replications = opts.replications;
    report.groups = spec.groups;
    report.seed = opts.seed;
    report.ci_level = opts.ci_level;

    for (const std::string& name : names) {
        McEstimandStats st;
        st.name = name;
        const bool has_truth = tr.has(name);
        st.truth = has_truth ? tr.at(name) : std::numeric_limits<double>::quiet_NaN();
        std::vector<double> values, ses;
        int covered = 0;
        for (const RepResult& res : results) {
            bool found = false;
            for (const EstimateRow& row : res.rows) {
                if (row.name != name) continue;
                found = true;
                values.push_back(row.value);
                ses.push_back(row.se);
                if (has_truth && row.ci_lo <= st.truth && st.truth <= row.ci_hi) ++covered;
            }
            if (!found) {
                for (const Omission& o : res.omitted) {
                    if (o.name == name) st.excluded[o.reason]++;
                }
            }
        }
        st.n_defined = static_cast<int>(values.size());
        if (st.n_defined > 0) {
            const double mean =
                std::accumulate(values.begin(), values.end(), 0.0) / st.n_defined;
            st.bias = has_truth ? mean - st.truth : 0.0;
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            st.mc_sd = st.n_defined > 1 ? std::sqrt(ss / (st.n_defined - 1)) : 0.0;
            st.mean_se = std::accumulate(ses.begin(), ses.end(), 0.0) / st.n_defined;
            st.coverage = static_cast<double>(covered) / st.n_defined;
        }
        report.estimands.push_back(std::move(st));
    }
    return report;
}

}  // namespace pairiv
