#include "pairiv/moments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "pairiv/parallel.hpp"

namespace pairiv {

namespace {

constexpr int dcell_index(int d_own, int d_peer) { return d_own + 2 * d_peer; }

// A unit perspective contributes to at most three slots of its block: the
// assignment-cell indicator plus the nonzero H components. Keeping W_g sparse
// makes the covariance accumulation cheap.
struct SparseEntry {
    int index;
    double value;
};

}  // namespace

double MomentLayout::h_value(int h, double y, int d_own, int d_peer) const {
    switch (block) {
        case HBlock::Full8:
            return h < 4 ? (dcell_index(d_own, d_peer) == h ? 1.0 : 0.0)
                         : (dcell_index(d_own, d_peer) == h - 4 ? y : 0.0);
        case HBlock::IttOnly:
            return y;
        case HBlock::Osn4:
            switch (h) {
                case 0: return d_own;
                case 1: return y;
                case 2: return y * (1 - d_own);
                case 3: return y * (1 - d_peer);
            }
            return 0.0;
    }
    return 0.0;
}

Moments compute_moments(const Dataset& ds, const MomentLayout& layout,
                        const MomentOptions& opts) {
    const int dim = layout.dim();
    const std::size_t n = static_cast<std::size_t>(ds.n_groups());
    if (n == 0) {
        throw Error(ErrorCode::InvalidSpec, "InvalidSpec", "empty dataset");
    }

    std::map<std::string, int> stratum_block;
    for (int i = 0; i < static_cast<int>(layout.strata.size()); ++i) {
        stratum_block[layout.strata[i]] = i;
    }

    // Per-group symmetrized summand, as sparse (index, value) pairs. Entries
    // hit by both unit perspectives are merged within the group, so results
    // are bit-identical under unit relabeling.
    const auto group_summand = [&](const HouseholdRecord& r, std::vector<SparseEntry>& w) {
        w.clear();
        int block_idx = 0;
        if (!layout.strata.empty()) {
            auto it = r.stratum ? stratum_block.find(*r.stratum) : stratum_block.end();
            if (it == stratum_block.end()) {
                throw Error(ErrorCode::InconsistentStratum,
                            "InconsistentStratum:" + r.household,
                            "stratum not present in layout");
            }
            block_idx = it->second;
        }
        for (int i = 0; i < 2; ++i) {
            const UnitObs& own = r.unit[i];
            const UnitObs& peer = r.unit[1 - i];
            const int zc = zcell_index(own.z, peer.z);
            if (layout.cell_slot(zc) < 0) continue;  // cell not tracked by this layout
            w.push_back({layout.cell_index(block_idx, zc), 0.5});
            for (int h = 0; h < layout.n_h(); ++h) {
                const double v = layout.h_value(h, own.y, own.d, peer.d);
                if (v != 0.0) w.push_back({layout.h_index(block_idx, h, zc), 0.5 * v});
            }
        }
        std::sort(w.begin(), w.end(),
                  [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
        std::size_t out = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (out > 0 && w[out - 1].index == w[i].index) {
                w[out - 1].value += w[i].value;
            } else {
                w[out++] = w[i];
            }
        }
        w.resize(out);
    };

    const std::size_t n_chunks = chunk_count(n);
    const auto& records = ds.records();

    // Pass 1: mu_hat. Chunk-local partial sums combined in chunk order.
    std::vector<Eigen::VectorXd> partial_mu(n_chunks);
    parallel_chunks(n, opts.workers, [&](std::size_t c, std::size_t b, std::size_t e) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
        std::vector<SparseEntry> w;
        for (std::size_t g = b; g < e; ++g) {
            group_summand(records[g], w);
            for (const SparseEntry& s : w) acc[s.index] += s.value;
        }
        partial_mu[c] = std::move(acc);
    });
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(dim);
    for (const auto& p : partial_mu) mu += p;
    mu /= static_cast<double>(n);

    // Pass 2: sigma_hat = (1/G) sum (W_g - mu)(W_g - mu)'.
    std::vector<Eigen::MatrixXd> partial_sigma(n_chunks);
    parallel_chunks(n, opts.workers, [&](std::size_t c, std::size_t b, std::size_t e) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
        Eigen::VectorXd centered(dim);
        std::vector<SparseEntry> w;
        for (std::size_t g = b; g < e; ++g) {
            group_summand(records[g], w);
            centered = -mu;
            for (const SparseEntry& s : w) centered[s.index] += s.value;
            acc.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0);
        }
        partial_sigma[c] = std::move(acc);
    });
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& p : partial_sigma) sigma += p;
    sigma = sigma.selfadjointView<Eigen::Lower>();
    const double denom = opts.bessel ? std::max<std::size_t>(n - 1, 1) : n;
    sigma /= static_cast<double>(denom);

    // Invariant checks: cell probabilities form a (sub)distribution and
    // sigma_hat is symmetric PSD up to rounding.
    double cell_total = 0.0;
    for (int bidx = 0; bidx < layout.n_blocks(); ++bidx) {
        for (int zc = 0; zc < layout.n_cells(); ++zc) {
            const double p = mu[layout.cell_index(bidx, zc)];
            if (p < -1e-12 || p > 1.0 + 1e-12) {
                throw std::logic_error("moment cell probability outside [0,1]");
            }
            cell_total += p;
        }
    }
    if (layout.n_cells() == 4 && std::abs(cell_total - 1.0) > 1e-12) {
        throw std::logic_error("moment cell probabilities do not sum to 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
    if (es.info() == Eigen::Success && es.eigenvalues().minCoeff() < -1e-10) {
        throw std::logic_error("moment covariance is not PSD");
    }

    return Moments{layout, std::move(mu), std::move(sigma), static_cast<int>(n)};
}

// ---------------------------------------------------------------------------
// MomentView accessors
// ---------------------------------------------------------------------------

namespace {
[[noreturn]] void unsupported(const char* what) {
    throw std::logic_error(std::string("moment component not available in this layout: ") + what);
}
}  // namespace

double MomentView::y(int b, int zc) const {
    switch (layout_->block) {
        case HBlock::Full8:
            return h(b, 4, zc) + h(b, 5, zc) + h(b, 6, zc) + h(b, 7, zc);
        case HBlock::IttOnly:
            return h(b, 0, zc);
        case HBlock::Osn4:
            return h(b, 1, zc);
    }
    unsupported("y");
}

double MomentView::d_own(int b, int zc) const {
    switch (layout_->block) {
        case HBlock::Full8:
            return h(b, dcell_index(1, 0), zc) + h(b, dcell_index(1, 1), zc);
        case HBlock::Osn4:
            return h(b, 0, zc);
        case HBlock::IttOnly:
            break;
    }
    unsupported("d_own");
}

double MomentView::d_peer(int b, int zc) const {
    switch (layout_->block) {
        case HBlock::Full8:
            return h(b, dcell_index(0, 1), zc) + h(b, dcell_index(1, 1), zc);
        case HBlock::Osn4:
            // The symmetrized summand makes E[D_peer 1(Z=c)] identical to
            // E[D_own 1(Z=mirror(c))].
            return d_own(b, zcell_mirror(zc));
        case HBlock::IttOnly:
            break;
    }
    unsupported("d_peer");
}

double MomentView::y_d_own(int b, int zc) const {
    switch (layout_->block) {
        case HBlock::Full8:
            return h(b, 4 + dcell_index(1, 0), zc) + h(b, 4 + dcell_index(1, 1), zc);
        case HBlock::Osn4:
            return y(b, zc) - h(b, 2, zc);
        case HBlock::IttOnly:
            break;
    }
    unsupported("y_d_own");
}

double MomentView::y_d_peer(int b, int zc) const {
    switch (layout_->block) {
        case HBlock::Full8:
            return h(b, 4 + dcell_index(0, 1), zc) + h(b, 4 + dcell_index(1, 1), zc);
        case HBlock::Osn4:
            return y(b, zc) - h(b, 3, zc);
        case HBlock::IttOnly:
            break;
    }
    unsupported("y_d_peer");
}

double MomentView::y_not_own(int b, int zc) const {
    switch (layout_->block) {
        case HBlock::Full8:
            return h(b, 4 + dcell_index(0, 0), zc) + h(b, 4 + dcell_index(0, 1), zc);
        case HBlock::Osn4:
            return h(b, 2, zc);
        case HBlock::IttOnly:
            break;
    }
    unsupported("y_not_own");
}

double MomentView::y_not_peer(int b, int zc) const {
    switch (layout_->block) {
        case HBlock::Full8:
            return h(b, 4 + dcell_index(0, 0), zc) + h(b, 4 + dcell_index(1, 0), zc);
        case HBlock::Osn4:
            return h(b, 3, zc);
        case HBlock::IttOnly:
            break;
    }
    unsupported("y_not_peer");
}

double MomentView::d_both(int b, int zc) const {
    if (layout_->block != HBlock::Full8) unsupported("d_both");
    return h(b, dcell_index(1, 1), zc);
}

double MomentView::d_neither(int b, int zc) const {
    if (layout_->block != HBlock::Full8) unsupported("d_neither");
    return h(b, dcell_index(0, 0), zc);
}

double MomentView::y_d_neither(int b, int zc) const {
    if (layout_->block != HBlock::Full8) unsupported("y_d_neither");
    return h(b, 4 + dcell_index(0, 0), zc);
}

double MomentView::d_own_not_peer(int b, int zc) const {
    if (layout_->block != HBlock::Full8) unsupported("d_own_not_peer");
    return h(b, dcell_index(1, 0), zc);
}

double MomentView::osn_violation_mass() const {
    if (!has_d()) unsupported("osn_violation_mass");
    double mass = 0.0;
    for (int b = 0; b < n_blocks(); ++b) {
        for (int zc = 0; zc < layout_->n_cells(); ++zc) {
            if (zcell_own(zc) == 0) mass += d_own(b, zc);
        }
    }
    return mass;
}

}  // namespace pairiv
