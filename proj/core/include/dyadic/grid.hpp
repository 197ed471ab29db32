#pragma once

#include "dyadic/space.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace dyadic {

struct DyadicCube {
    int level = 0;
    std::size_t alpha = 0;
    std::size_t center = 0;
    std::vector<std::size_t> members;  // sorted point indices
    std::ptrdiff_t parent = -1;        // alpha in the coarser level, -1 at the top
    std::vector<std::size_t> children; // alphas in the finer level
    double mass = 0.0;
};

struct GridLevel {
    int k = 0;
    std::vector<std::size_t> centers;    // ascending point indices; alpha = position
    std::vector<DyadicCube> cubes;       // indexed by alpha
    std::vector<std::size_t> point_cube; // point index -> alpha of its cube
};

// Levels run coarse to fine: larger k means finer, cube diameters scale like
// delta^k. Constants c1 and C1 are the achieved inner/outer ball constants;
// C1 is additionally closed upward so that the circumballs
// B(center, C1 delta^k) nest along cube inclusion.
struct DyadicGrid {
    double delta = 0.5;
    int k_min = 0;
    int k_max = 0;
    std::vector<GridLevel> levels;
    double c1 = 0.0; // +inf when no cube has a non-member
    double C1 = 0.0;
    std::size_t distinguished_center = 0;
    std::size_t M = 1; // max child count over cubes that have children

    const GridLevel& level(int k) const { return levels[static_cast<std::size_t>(k - k_min)]; }
    GridLevel& level(int k) { return levels[static_cast<std::size_t>(k - k_min)]; }
    double scale(int k) const; // delta^k
    std::size_t cube_count() const;
};

// Greedy farthest-point net: a maximal `separation`-separated subset containing
// must_include (which must itself be separated). With an empty must_include the
// start point is drawn from the seed. Ties go to the smaller point index.
std::vector<std::size_t> build_net(const FinitePointSpace& s, double separation,
                                   std::uint64_t seed,
                                   const std::vector<std::size_t>& must_include);

// extend an existing separated set to a maximal one at a finer separation
std::vector<std::size_t> extend_net(const FinitePointSpace& s, double separation,
                                    std::vector<std::size_t> net);

struct GridOptions {
    // per level, coarse to fine; each list must contain the previous one
    std::optional<std::vector<std::vector<std::size_t>>> explicit_centers;
    bool strict = false; // throw instead of proceeding when delta is above the
                         // classical small-delta threshold 1/(12 A0^3)
};

DyadicGrid build_grid(const FinitePointSpace& s, const PointMassMeasure& mu, double delta,
                      int k_min, int k_max, std::uint64_t seed,
                      std::size_t distinguished_center, const GridOptions& opt = {});

// [k_min, k_max] such that the coarsest net is a single point and the finest
// level separates every pair of distinct points
std::pair<int, int> auto_k_range(const FinitePointSpace& s, double delta);

struct CubeRef {
    int k = 0;
    std::size_t alpha = 0;
};

CubeRef containing_cube(const DyadicGrid& g, std::size_t x, int k);
const DyadicCube& cube_at(const DyadicGrid& g, CubeRef r);

// Deepest ref carrying the same member set: follows single-child chains down.
// Scale-sensitive consumers want this one, not a coarser duplicate.
CubeRef tightest_ref(const DyadicGrid& g, CubeRef r);

struct GridCheck {
    std::string name;
    bool pass = false;
    std::string detail; // empty when clean
};

struct VerifyGridResult {
    bool pass = false; // all structural checks
    std::vector<GridCheck> checks;
    double c1_rederived = 0.0; // tight constants recomputed from scratch
    double C1_tight = 0.0;     // before nesting closure
    bool single_root = false;  // some level is one cube containing every point
    std::size_t level_count = 0;
    std::size_t cube_total = 0;
};

VerifyGridResult verify_grid(const FinitePointSpace& s, const PointMassMeasure& mu,
                             const DyadicGrid& g);

struct AdjacentSystems {
    std::vector<DyadicGrid> grids;
    std::size_t T = 0;
    double delta = 0.5;
};

// T grids over the same space and scale ladder, built from seeds seed+t; each
// system's distinguished center (and hence greedy start) is drawn from its seed
AdjacentSystems build_adjacent_systems(const FinitePointSpace& s, const PointMassMeasure& mu,
                                       double delta, int k_min, int k_max, std::size_t T,
                                       std::uint64_t seed);

// The level whose cubes are sized to sandwich a ball of radius r: the largest
// k with delta^{k+2} >= r > delta^{k+3}, clipped to [k_min, k_max]. Empty when
// r falls outside the representable window.
std::optional<int> window_level(double delta, double r, int k_min, int k_max);

struct BallSandwich {
    std::size_t center = 0;
    double radius = 0.0;
    int k = 0;       // level from delta^{k+3} < r <= delta^{k+2}
    std::size_t t = 0;
    CubeRef cube;    // B(x,r) subset Q subset B(x, C_ball * r)
    double C_ball = 0.0;
};

struct SandwichFailure {
    std::size_t center = 0;
    double radius = 0.0;
    std::string reason;
};

struct SandwichReport {
    bool all_covered = false;
    double C_empirical = 0.0;   // max over covered balls
    double C_theoretical = 0.0; // 8 A0^3 / delta^3
    std::size_t balls_total = 0;
    std::size_t balls_covered = 0;
    std::vector<BallSandwich> covered;
    std::vector<SandwichFailure> failures;
};

// Checks, for every combinatorially distinct open ball (representative radii
// include both gap midpoints and the exact distance values), that some system
// contains a cube at the window level sandwiched between the ball and its
// C-fold dilate. Empirical by construction; failures are recorded, not hidden.
SandwichReport verify_sandwich(const AdjacentSystems& sys, const FinitePointSpace& s,
                               const PointMassMeasure& mu);

} // namespace dyadic
