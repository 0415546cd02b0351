#include "pairiv/delta.hpp"

#include <cmath>

#include "pairiv/rng.hpp"

namespace pairiv {

const EstimateRow* EstimateReport::find(const std::string& name) const {
    for (const EstimateRow& r : rows) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

double normal_critical_value(double ci_level) {
    if (!(ci_level > 0.0 && ci_level < 1.0)) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "ci level outside (0,1)");
    }
    return rng::normal_quantile(0.5 + 0.5 * ci_level);
}

EstimateRow delta_method(const Moments& m, const Estimand& e, const DeltaOptions& opts) {
    const int dim = m.layout.dim();
    const GuardContext guarded(true);
    const GuardContext unguarded(false);

    const double value = e.fn(MomentView(m.layout, as_span(m.mu)), guarded);
    if (!std::isfinite(value)) {
        throw degenerate_denominator_error(e.name + "(nonfinite)");
    }

    Eigen::VectorXd grad(dim);
    Eigen::VectorXd x = m.mu;
    for (int k = 0; k < dim; ++k) {
        const double base = m.mu[k];
        const double h = 1e-6 * std::max(1.0, std::abs(base));
        const double hi = base + h;
        const double lo = base - h;
        x[k] = hi;
        const double f_hi = e.fn(MomentView(m.layout, as_span(x)), unguarded);
        x[k] = lo;
        const double f_lo = e.fn(MomentView(m.layout, as_span(x)), unguarded);
        x[k] = base;
        // hi - lo is exact in floating point, so linear transforms get exact
        // gradients.
        grad[k] = (f_hi - f_lo) / (hi - lo);
    }

    const double var = grad.dot(m.sigma * grad) / static_cast<double>(m.n_groups);
    const double se = std::sqrt(std::max(0.0, var));
    if (!std::isfinite(se)) {
        throw degenerate_denominator_error(e.name + "(nonfinite)");
    }
    const double crit = normal_critical_value(opts.ci_level);

    EstimateRow row;
    row.name = e.name;
    row.formula = e.formula;
    row.value = value;
    row.se = se;
    row.ci_lo = value - crit * se;
    row.ci_hi = value + crit * se;
    return row;
}

EstimateReport run_estimands(const Moments& m, const std::vector<Estimand>& estimands,
                             const DeltaOptions& opts) {
    EstimateReport report;
    report.n_groups = m.n_groups;
    report.ci_level = opts.ci_level;

    bool osn_violated = false;
    long hard_units = 0;
    if (m.layout.block != HBlock::IttOnly) {
        const MomentView view(m.layout, as_span(m.mu));
        const double mass = view.osn_violation_mass();
        osn_violated = mass > 0.0;
        // Each violating unit observation contributes 1/(2G).
        hard_units = std::lround(mass * 2.0 * m.n_groups);
    }

    for (const Estimand& e : estimands) {
        if (e.requires_osn && osn_violated) {
            report.omitted.push_back({e.name, osn_violated_error(hard_units).condition()});
            continue;
        }
        try {
            report.rows.push_back(delta_method(m, e, opts));
        } catch (const Error& err) {
            report.omitted.push_back({e.name, err.condition()});
        }
    }
    return report;
}

}  // namespace pairiv
