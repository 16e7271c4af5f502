#pragma once

// Rate-distortion machinery for finite-support priors: value-distortion
// partitions of the support, the two-point dominance selection, and the
// cell-measurable surrogate environment law.

#include "ids/beliefs.hpp"
#include "ids/info_metrics.hpp"

#include <optional>
#include <span>
#include <vector>

namespace ids {

/// Disjoint, exhaustive grouping of the support such that for every ordered
/// pair (E1, E2) inside a cell, V^{E1}_{1,pi*_E1}(s1) - V^{E2}_{1,pi*_E1}(s1) <= epsilon.
struct Partition {
    std::vector<std::vector<std::size_t>> cells;
    std::vector<std::size_t> cell_of;
    double epsilon = 0.0;

    std::size_t num_cells() const { return cells.size(); }
};

/// Quantizes, for every env, the optimal backed-up values <P_h(.|s,a), V*_{h+1}>
/// on a grid of width epsilon/(2H) and the vectors V*_{h+1}/H on a grid of
/// width epsilon/(2H sqrt(S)); envs with equal keys form a group. Each group is
/// then split greedily, in support order, so that every within-cell ordered
/// pair meets the distortion condition. Throws std::invalid_argument for
/// epsilon <= 0.
Partition build_partition(const FiniteSupportPrior& prior, double epsilon);

/// Largest within-cell distortion V^{E1}_{pi*_E1} - V^{E2}_{pi*_E1} of the partition.
double max_within_cell_distortion(const FiniteSupportPrior& prior, const Partition& partition);

/// log of the covering budget S A H log(4H^2/eps) + S log(2H sqrt(S)/eps + 1).
double covering_budget(const MdpShape& shape, double epsilon);

struct DominancePair {
    std::size_t first = 0;
    std::size_t second = 0;
    double weight = 1.0; ///< probability of `first`
};

/// Finds j, k and r in [0,1] with r a_j + (1-r) a_k <= sum p_i a_i and the
/// same for b, by exhaustive pair search over feasible r intervals.
DominancePair two_point_dominate(std::span<const double> a, std::span<const double> b, std::span<const double> p);

/// Per-cell law of the surrogate environment: given the cell, env `first`
/// with probability `weight`, else env `second`. Cells with no posterior
/// mass carry no law.
struct SurrogateLaw {
    std::vector<std::optional<DominancePair>> cells;
};

SurrogateLaw build_surrogate(const Partition& partition, const FiniteSupportPrior& posterior);

/// E[V^E_{pi*_E} - V^E_{pi_TS}] - E[V^{S}_{pi*_E} - V^{S}_{pi_TS}], where S is the
/// surrogate environment, evaluated exactly over (true env, TS sample,
/// surrogate coin).
double distortion_check(const Partition& partition, const SurrogateLaw& law, const FiniteSupportPrior& posterior);

InfoTarget partition_target(const Partition& partition);
/// Channel env -> surrogate env index, depending on the env only through its cell.
InfoTarget surrogate_target(const Partition& partition, const SurrogateLaw& law);

} // namespace ids
