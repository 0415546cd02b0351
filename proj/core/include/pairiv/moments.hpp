#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "pairiv/dataset.hpp"
#include "pairiv/model.hpp"

namespace pairiv {

// Choice of the per-unit statistic block H(Y, D_own, D_peer):
//   Full8  - the eight indicators 1(D=(d,d')) and Y*1(D=(d,d')) over all four
//            assignment cells (the most general block);
//   IttOnly - H = Y (reduced block for intention-to-treat contrasts);
//   Osn4   - H = (D_own, Y, Y(1-D_own), Y(1-D_peer)) over the three cells
//            (0,0), (1,0), (0,1) (the reduced one-sided-noncompliance block).
enum class HBlock { Full8, IttOnly, Osn4 };

// Index layout of the stacked moment vector. Per block (one block per
// stratum; a single block when unstratified):
//   [cell probabilities] then [h-component x cell] in h-major order.
struct MomentLayout {
    HBlock block = HBlock::Full8;
    std::vector<std::string> strata;  // empty => single unstratified block

    int n_cells() const { return block == HBlock::Osn4 ? 3 : 4; }
    int n_h() const {
        switch (block) {
            case HBlock::Full8: return 8;
            case HBlock::IttOnly: return 1;
            case HBlock::Osn4: return 4;
        }
        return 0;
    }
    int block_dim() const { return n_cells() * (1 + n_h()); }
    int n_blocks() const { return strata.empty() ? 1 : static_cast<int>(strata.size()); }
    int dim() const { return n_blocks() * block_dim(); }

    // Position of a cell's zcell index within a block, or -1 if the cell is
    // not part of the layout. Cells are stored in zcell order.
    int cell_slot(int zcell) const { return zcell < n_cells() ? zcell : -1; }

    int cell_index(int block_idx, int zcell) const {
        return block_idx * block_dim() + zcell;
    }
    int h_index(int block_idx, int h, int zcell) const {
        return block_idx * block_dim() + n_cells() + h * n_cells() + zcell;
    }

    // Value of h-component `h` for a unit perspective (y, d_own, d_peer).
    double h_value(int h, double y, int d_own, int d_peer) const;
};

// Stacked moment estimate: the per-group symmetrized mean mu_hat and the
// cluster-robust covariance sigma_hat of the per-group summand, scaled as
// Var(sqrt(G) * (mu_hat - mu)). Immutable output of compute_moments.
struct Moments {
    MomentLayout layout;
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    int n_groups = 0;
};

struct MomentOptions {
    int workers = 1;
    bool bessel = false;  // divide sigma by G-1 instead of G
};

// Per-group symmetrized sample mean and covariance; clustering at the
// household level is automatic because each group contributes one summand.
// Deterministic for a fixed record order regardless of worker count.
Moments compute_moments(const Dataset& ds, const MomentLayout& layout,
                        const MomentOptions& opts = {});

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

// Read access to a (possibly perturbed) moment vector through the layout.
// Component accessors return unconditional products E[stat * 1(Z = cell)];
// callers divide by cell() to form conditional means.
class MomentView {
public:
    MomentView(const MomentLayout& layout, std::span<const double> values)
        : layout_(&layout), v_(values) {}

    const MomentLayout& layout() const { return *layout_; }
    int n_blocks() const { return layout_->n_blocks(); }
    bool has_cell(int zcell) const { return layout_->cell_slot(zcell) >= 0; }

    double cell(int b, int zc) const { return v_[layout_->cell_index(b, zc)]; }
    double h(int b, int h_idx, int zc) const { return v_[layout_->h_index(b, h_idx, zc)]; }

    bool has_y() const { return layout_->block != HBlock::Osn4 || true; }
    bool has_d() const { return layout_->block != HBlock::IttOnly; }
    bool has_d_joint() const { return layout_->block == HBlock::Full8; }

    // E[Y 1(Z=zc)]
    double y(int b, int zc) const;
    // E[D_own 1(Z=zc)]
    double d_own(int b, int zc) const;
    // E[D_peer 1(Z=zc)]
    double d_peer(int b, int zc) const;
    // E[Y D_own 1(Z=zc)]
    double y_d_own(int b, int zc) const;
    // E[Y D_peer 1(Z=zc)]
    double y_d_peer(int b, int zc) const;
    // E[Y (1-D_own) 1(Z=zc)]
    double y_not_own(int b, int zc) const;
    // E[Y (1-D_peer) 1(Z=zc)]
    double y_not_peer(int b, int zc) const;
    // E[D_own D_peer 1(Z=zc)]
    double d_both(int b, int zc) const;
    // E[(1-D_own)(1-D_peer) 1(Z=zc)]
    double d_neither(int b, int zc) const;
    // E[Y (1-D_own)(1-D_peer) 1(Z=zc)]
    double y_d_neither(int b, int zc) const;
    // E[D_own (1-D_peer) 1(Z=zc)]
    double d_own_not_peer(int b, int zc) const;

    // Mass of unit observations with d=1 and own z=0; exactly zero iff the
    // data are consistent with one-sided noncompliance.
    double osn_violation_mass() const;

private:
    const MomentLayout* layout_;
    std::span<const double> v_;
};

}  // namespace pairiv
