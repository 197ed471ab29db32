#pragma once

#include "dyadic/grid.hpp"

namespace dyadic {

// Hardy-Littlewood maximal function: sup over every open ball containing the
// point, of the ball average of |f|. Balls of zero measure are skipped.
std::vector<double> hl_maximal(const FinitePointSpace& s, const PointMassMeasure& mu,
                               const std::vector<double>& f, const BallIndex& bi);

// sup over the grid cubes containing the point, all levels
std::vector<double> dyadic_maximal(const DyadicGrid& g, const PointMassMeasure& mu,
                                   const std::vector<double>& f);

// sup over products of open balls; f is row-major on X1 x X2
std::vector<double> strong_maximal(const FinitePointSpace& s1, const PointMassMeasure& mu1,
                                   const FinitePointSpace& s2, const PointMassMeasure& mu2,
                                   const std::vector<double>& f, const BallIndex& bi1,
                                   const BallIndex& bi2);

// sup over products of dyadic cubes, one grid per factor
std::vector<double> dyadic_strong_maximal(const DyadicGrid& g1, const PointMassMeasure& mu1,
                                          const DyadicGrid& g2, const PointMassMeasure& mu2,
                                          const std::vector<double>& f);

struct MaximalReport {
    // cube averages against ball averages: for every grid t and every point,
    // M_d^t f <= cstar[t] * M f with cstar[t] = C_dbl^{log2(C1/c1)+1}
    bool cube_vs_ball_pass = false;
    std::vector<double> cstar;
    double worst_cube_vs_ball = 0.0; // max over t, x of M_d^t f / (cstar[t] M f)

    // ball averages against cube averages, through the sandwich: for every
    // covered ball, avg_B |f| <= C_dbl^{1+log2 C_ball} * avg_Q |f|
    bool ball_vs_cube_pass = false;
    double worst_ball_vs_cube = 0.0; // max ratio of the two sides
    std::size_t balls_checked = 0;
    std::size_t balls_skipped = 0; // sandwich failures, not judged here

    double c_dbl = 1.0;
    double empirical_sum_constant = 0.0; // max_x M f / sum_t M_d^t f
};

MaximalReport compare_maximal(const FinitePointSpace& s, const PointMassMeasure& mu,
                              const AdjacentSystems& sys, const SandwichReport& sand,
                              const std::vector<double>& f, const BallIndex& bi);

} // namespace dyadic
