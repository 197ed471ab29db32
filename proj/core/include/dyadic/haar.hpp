#pragma once

#include "dyadic/grid.hpp"

#include <map>
#include <tuple>

namespace dyadic {

// Children of each cube, ordered by ascending mass with ties broken by child
// alpha. Ascending order makes every tail of the list carry at least its
// proportional share of the cube mass, which keeps the two-value functions
// below well conditioned.
struct ChildOrdering {
    // order[level_index][alpha] = permutation of that cube's children
    std::vector<std::vector<std::vector<std::size_t>>> order;
};

ChildOrdering order_children(const DyadicGrid& g, const PointMassMeasure& mu);

// Exact tail-mass property of the ordering, in cross-multiplied form:
// M * sum_{j >= u} mass(child_j) >= (M - u + 1) * mass(cube), with the cube
// mass evaluated by the same suffix summation. No tolerance.
bool check_tail_mass(const DyadicGrid& g, const PointMassMeasure& mu, const ChildOrdering& ord,
                     std::string* witness = nullptr);

struct HaarFunction {
    int level = 0;      // level of the carrying cube
    std::size_t alpha = 0;
    std::size_t u = 0;  // 1..children-1, or 0 for a scaling function on a coarsest cube
    double a = 0.0;     // value on the u-th child
    double b = 0.0;     // negated value on the tail behind it
    // (cube alpha at level+1, value) pairs for u >= 1; a single
    // (alpha at level, value) pair for u = 0
    std::vector<std::pair<std::size_t, double>> piece_values;
    bool zero = false;  // the u-th child has zero mass; function is identically 0
};

struct HaarBasis {
    const DyadicGrid* grid = nullptr; // must outlive the basis
    ChildOrdering ordering;
    // scaling functions on the coarsest level first (alpha ascending), then
    // cancellative functions level by level, alpha ascending, u ascending
    std::vector<HaarFunction> funcs;
    std::size_t scaling_count = 0;
    std::vector<HaarFunction> dropped_zero; // skipped mass-zero entries, for reporting
    std::map<std::tuple<int, std::size_t, std::size_t>, std::size_t> index; // (level,alpha,u) -> position
};

HaarBasis build_basis(const DyadicGrid& g, const PointMassMeasure& mu);

// pointwise values of one basis function on the whole space
std::vector<double> haar_values(const HaarBasis& basis, const HaarFunction& h);

struct HaarCoefficients {
    double mean = 0.0;         // global average of f
    std::vector<double> coeff; // aligned with basis.funcs; scaling entries hold
                               // the coefficients of f minus its mean
};

HaarCoefficients analyze(const HaarBasis& basis, const PointMassMeasure& mu,
                         const std::vector<double>& f);
// mean * 1 + sum of coefficients times basis functions; inverts analyze
// exactly (up to rounding) whenever the finest level separates points
std::vector<double> synthesize(const HaarBasis& basis, const HaarCoefficients& c);

// plain orthonormal expansion with raw scaling coefficients (no mean split);
// the product machinery tensors these
std::vector<double> full_analyze(const HaarBasis& basis, const PointMassMeasure& mu,
                                 const std::vector<double>& f);
std::vector<double> full_synthesize(const HaarBasis& basis, const std::vector<double>& coeff);

// piecewise average over the level-k cubes (cubes of zero mass average to 0)
std::vector<double> conditional_expectation(const DyadicGrid& g, const PointMassMeasure& mu,
                                            const std::vector<double>& f, int k);
// E_{k+1} f - E_k f, defined for k in [k_min, k_max)
std::vector<double> martingale_difference(const DyadicGrid& g, const PointMassMeasure& mu,
                                          const std::vector<double>& f, int k);

struct NormRatioStats {
    double p = 0.0;        // 0 marks the sup norm
    double lo = 0.0, hi = 0.0; // bracket the ratio must stay in
    double min_seen = 0.0, max_seen = 0.0;
    bool pass = false;
};

struct ValidateBasisResult {
    bool pass = false;
    double max_abs_integral = 0.0; // worst |integral of h|
    double max_l2_dev = 0.0;       // worst | ||h||_2 - 1 |
    bool gram_checked = false;
    double gram_max_offdiag = 0.0;
    double gram_max_diag_dev = 0.0;
    // ||h||_p / mass(u-th child)^{1/p - 1/2} for cancellative h, p in {1,2,4,inf};
    // scaling functions hit the ratio 1 exactly and are checked against that
    std::vector<NormRatioStats> ratios;
    NormRatioStats l1_times_linf; // in [2/M, 2], exactly 1 for scaling functions
    std::vector<std::string> failures;
};

ValidateBasisResult validate_basis(const HaarBasis& basis, const PointMassMeasure& mu,
                                   bool with_gram, double tol_cancel, double tol_norm);

} // namespace dyadic
