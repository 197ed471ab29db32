#pragma once

#include "dyadic/grid.hpp"

namespace dyadic {

// pointwise weight values against the base measure; the weight of a set is
// sum of w * mass over its points
using Weight = std::vector<double>;

double weight_of(const PointMassMeasure& mu, const Weight& w, const std::vector<std::size_t>& pts);

struct DoublingReport {
    double constant = 1.0; // sup over balls of w(2B)/w(B)
    bool finite = true;
    std::size_t center = 0;
    double radius = 0.0;
};

DoublingReport doubling_constant(const FinitePointSpace& s, const PointMassMeasure& mu,
                                 const Weight& w);

struct DyadicDoublingReport {
    double parent_child = 1.0; // max over cubes of w(Q)/w(child)
    double sibling = 1.0;      // max over sibling pairs of w(Q')/w(Q'')
    bool finite = true;
};

DyadicDoublingReport dyadic_doubling_constant(const DyadicGrid& g, const PointMassMeasure& mu,
                                              const Weight& w);

// Muckenhoupt constant over balls; p = 1 uses the essential infimum, finite
// p > 1 the dual-exponent average, p = +inf the exponential mean form.
double ap_constant(const FinitePointSpace& s, const PointMassMeasure& mu, const Weight& w,
                   double p);
double dyadic_ap_constant(const DyadicGrid& g, const PointMassMeasure& mu, const Weight& w,
                          double p);

// Reverse-Holder constant over balls: finite p > 1 compares the L^p average
// with the average; p = +inf uses the essential sup; p = 1 is the entropy
// functional avg of (w/avg w) log(w/avg w), which is 0 exactly for constants.
double rhp_constant(const FinitePointSpace& s, const PointMassMeasure& mu, const Weight& w,
                    double p);

struct DyadicRhReport {
    double sup_part = 0.0;   // the cube sup itself
    double doubling = 1.0;   // dyadic doubling constant (parent/child form)
    double combined = 0.0;   // max of the two, which is the class constant
};

DyadicRhReport dyadic_rhp_constant(const DyadicGrid& g, const PointMassMeasure& mu,
                                   const Weight& w, double p);

// Precomputed two-radius sandwich: for a ball B(x, r), an outer cube at the
// window level of 2r containing B(x, 2r), and a descendant within N levels
// contained in B(x, r). Weight-independent, so it is built once per space and
// system family and shared across weights.
struct TwoRadiusSandwich {
    std::size_t center = 0;
    double radius = 0.0;
    std::size_t t = 0;
    CubeRef outer, inner;
    int depth = 0; // inner.level - outer.level
};

struct TwoRadiusIndex {
    std::vector<TwoRadiusSandwich> covered;
    std::size_t balls_total = 0;
    int N = 0; // ceil(log(16 A0^3 / delta^4) / log(1/delta))
};

TwoRadiusIndex build_two_radius_index(const FinitePointSpace& s, const AdjacentSystems& sys);

struct IntersectionCheck {
    std::string name;
    std::size_t t = 0;
    double p = 0.0; // 0 for doubling entries
    double lhs = 0.0;
    double bound = 0.0;
    bool asserted = false; // report-only entries keep pass = true
    bool pass = true;
};

struct WeightClassReport {
    bool pass = false;
    double a0 = 1.0;
    double c_dbl_mu = 1.0;        // doubling constant of the base measure
    DoublingReport dbl_w;         // doubling of the weight measure
    std::vector<DyadicDoublingReport> dydbl; // per system
    std::vector<double> ap;                  // continuous A_p per requested p
    std::vector<std::vector<double>> ap_dyadic;
    std::vector<double> rhp;
    std::vector<std::vector<DyadicRhReport>> rhp_dyadic;
    std::vector<double> ps;
    std::vector<IntersectionCheck> checks;
    std::size_t balls_total = 0, balls_covered = 0;
    int N = 0;
    double reverse_worst = 0.0; // max over covered balls of w(2B) / (C^depth w(B))
};

// Cross-checks the continuous and dyadic weight classes over the given system
// family: doubling in both directions, Muckenhoupt and reverse-Holder in the
// directions that carry explicit factors (the rest are report-only entries).
WeightClassReport intersection_report(const FinitePointSpace& s, const PointMassMeasure& mu,
                                      const AdjacentSystems& sys, const TwoRadiusIndex& tri,
                                      const Weight& w, const std::vector<double>& ps);

// factorwise product-weight constants: per frozen second coordinate the first
// factor's constant and vice versa, maximized over the frozen coordinate
struct ProductWeightConstants {
    double factor1 = 0.0;
    double factor2 = 0.0;
};

ProductWeightConstants product_ap_constant(const FinitePointSpace& s1, const PointMassMeasure& mu1,
                                           const FinitePointSpace& s2, const PointMassMeasure& mu2,
                                           const Weight& w, double p);
ProductWeightConstants product_rhp_constant(const FinitePointSpace& s1,
                                            const PointMassMeasure& mu1,
                                            const FinitePointSpace& s2,
                                            const PointMassMeasure& mu2, const Weight& w,
                                            double p);

} // namespace dyadic
