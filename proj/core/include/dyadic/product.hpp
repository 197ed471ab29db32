#pragma once

#include "dyadic/haar.hpp"

namespace dyadic {

// Two-factor product machinery. Functions on X1 x X2 are row-major vectors of
// size n1*n2 (index x1*n2 + x2); the product measure is the tensor of the two
// point-mass measures.
struct ProductGrid {
    const FinitePointSpace* s1 = nullptr;
    const FinitePointSpace* s2 = nullptr;
    const DyadicGrid* g1 = nullptr;
    const DyadicGrid* g2 = nullptr;
    const PointMassMeasure* mu1 = nullptr;
    const PointMassMeasure* mu2 = nullptr;
    std::size_t n1 = 0, n2 = 0;
    HaarBasis b1, b2;
    BallIndex bi1, bi2; // for the strong maximal function

    double mass(std::size_t x1, std::size_t x2) const {
        return mu1->mass[x1] * mu2->mass[x2];
    }
};

// grids and measures must outlive the product grid
ProductGrid make_product_grid(const FinitePointSpace& s1, const DyadicGrid& g1,
                              const PointMassMeasure& mu1, const FinitePointSpace& s2,
                              const DyadicGrid& g2, const PointMassMeasure& mu2);

// dense tensor of coefficients against b1 x b2 (scaling entries included);
// row-major m1 x m2
struct CoefficientTensor {
    std::size_t m1 = 0, m2 = 0;
    std::vector<double> c;

    double at(std::size_t i, std::size_t j) const { return c[i * m2 + j]; }
    double& at(std::size_t i, std::size_t j) { return c[i * m2 + j]; }
};

CoefficientTensor zero_tensor(const ProductGrid& pg);

// iterated one-factor transforms: factor 1 down the columns, factor 2 along
// the rows; exact inverse pair up to rounding
CoefficientTensor product_analyze(const ProductGrid& pg, const std::vector<double>& f);
std::vector<double> product_synthesize(const ProductGrid& pg, const CoefficientTensor& t);

// zero out every entry touching a scaling function in either factor
CoefficientTensor cancellative_part(const ProductGrid& pg, CoefficientTensor t);
// the lifting operator: cancellative coefficients of f
CoefficientTensor lifting(const ProductGrid& pg, const std::vector<double>& f);
// the projection operator: synthesis of the cancellative entries only
std::vector<double> projection(const ProductGrid& pg, const CoefficientTensor& t);
// projection(lifting(f)): f minus its one-parameter (scaling) content
std::vector<double> cancellative_projection(const ProductGrid& pg, const std::vector<double>& f);

// pointwise square function from coefficients: for each cancellative pair the
// carrying rectangle spreads |c|^2 / (mu1(Q1) mu2(Q2)) over the full rectangle
std::vector<double> square_function(const ProductGrid& pg, const CoefficientTensor& t);
// the same object through conditional expectations only: per level pair the
// iterated martingale difference, squared, averaged over each rectangle and
// spread as a constant; agrees with the coefficient form pointwise
std::vector<double> square_function_martingale(const ProductGrid& pg,
                                               const std::vector<double>& f);

double product_l1(const ProductGrid& pg, const std::vector<double>& v);
double product_l2(const ProductGrid& pg, const std::vector<double>& v);

// L^1 norm of the square function of the cancellative coefficients
double h1dd_norm(const ProductGrid& pg, const std::vector<double>& f);

// sequence-space norms over cancellative entries
double s1_norm(const ProductGrid& pg, const CoefficientTensor& t);
double s2_norm(const ProductGrid& pg, const CoefficientTensor& t);

// Candidate open sets for the Carleson-type sup: every dyadic rectangle, the
// level sets of the square function at each distinct positive value, the union
// of the rectangles inside each level set, and the whole space. A finite
// family, so the sup below is a certified lower bound of the true one.
std::vector<std::vector<char>> omega_family(const ProductGrid& pg, const CoefficientTensor& t);

// max over the family of (mu(Omega)^{-1} sum_{R subset Omega} sum |c|^2)^{1/2}
double c1_norm(const ProductGrid& pg, const CoefficientTensor& t,
               const std::vector<std::vector<char>>& family);
// c1_norm of the coefficients of f over the default family
double bmodd_functional(const ProductGrid& pg, const std::vector<double>& f);

// sum over cancellative pairs of s * t
double pairing(const ProductGrid& pg, const CoefficientTensor& s, const CoefficientTensor& t);

struct AtomCoeff {
    std::size_t i = 0, j = 0; // positions in b1.funcs / b2.funcs
    double value = 0.0;
};

struct AtomPiece {
    CubeRef r1, r2; // the maximal rectangle of the support set this piece lives on
    std::vector<AtomCoeff> coeffs;
};

struct AtomEntry {
    int k = 0;
    double lambda = 0.0;
    std::vector<char> omega_tilde; // support mask over product points
    double omega_tilde_mass = 0.0;
    std::vector<AtomPiece> pieces;
};

struct AtomicDecomposition {
    std::vector<AtomEntry> atoms;
    double sum_lambda = 0.0;
    double ctilde_used = 0.0;  // threshold after adaptive halving
    std::size_t halvings = 0;
    double recon_error = 0.0;  // max abs deviation of sum lambda_k a_k from the
                               // cancellative projection of f
};

// The level-set construction: Omega_k = {S > 2^k}, each carrying rectangle
// assigned to the deepest k where it fills more than half its measure, support
// sets through the strong maximal function of the level-set indicator, one
// atom per nonempty class. The threshold starts at ctilde and halves until
// every class rectangle lands inside its support set.
AtomicDecomposition atomic_decompose(const ProductGrid& pg, const std::vector<double>& f,
                                     double ctilde = 0.25);

std::vector<double> atom_function(const ProductGrid& pg, const AtomEntry& atom);
std::vector<double> piece_function(const ProductGrid& pg, const AtomEntry& atom,
                                   const AtomPiece& piece);

struct AtomCheck {
    bool pass = false;
    double support_leak = 0.0;     // max |a| off the support set
    double l2_times_sqrt_mass = 0.0; // should be <= 1 (equality by construction)
    double worst_localization = 0.0; // max |piece| off its rectangle
    double worst_cancellation = 0.0; // max abs marginal integral over either factor
    double size_sum = 0.0;           // sum of piece L2 norms squared, times mass
    std::vector<std::string> failures;
};

AtomCheck validate_atom(const ProductGrid& pg, const AtomEntry& atom, double tol);

struct StructureOptions {
    double ctilde = 0.25;
    std::size_t base_t1 = 0, base_t2 = 0; // which pair the decomposition runs on
};

struct StructureBucket {
    std::size_t t1 = 0, t2 = 0;
    double h1 = 0.0;          // H1 norm of the reassembled part, in its own pair
    std::size_t pieces = 0;
};

struct StructureReport {
    bool pass = false;     // reassembly reproduces the cancellative projection
    double base_h1 = 0.0;  // H1 norm of f in the base pair
    std::vector<StructureBucket> buckets;
    double sum_h1 = 0.0;
    double ratio = 0.0;    // sum_h1 / base_h1 (0 when base_h1 is 0)
    std::size_t pieces_total = 0, pieces_unassigned = 0;
    double unassigned_h1 = 0.0; // base-pair H1 of the leftover part
    double recon_error = 0.0;
    std::vector<std::vector<double>> bmo; // [t1][t2] Carleson functional of f
    double bmo_min = 0.0, bmo_max = 0.0;
};

// Splits the base pair's atomic pieces among the system pairs: each piece's
// factor circumballs are sandwiched into cubes of some other system, the piece
// goes to that pair's bucket, and every bucket is measured in its own product
// norm. Pieces whose circumball fits no system stay in a leftover bucket. The
// second half evaluates the Carleson functional of f in every pair.
StructureReport structure_check(const FinitePointSpace& s1, const PointMassMeasure& mu1,
                                const AdjacentSystems& sys1, const FinitePointSpace& s2,
                                const PointMassMeasure& mu2, const AdjacentSystems& sys2,
                                const std::vector<double>& f, const StructureOptions& opt = {});

} // namespace dyadic
