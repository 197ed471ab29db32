#pragma once

#include "dyadic/product.hpp"

#include <string>

namespace dyadic {

// Space files are either JSON ({metric: euclidean|max|matrix, points or
// dist_matrix, optional exponent and masses}) or CSV point lists (header
// id,x0,x1,..., one point per row, euclidean metric, unit masses).
struct SpaceBundle {
    FinitePointSpace space;
    PointMassMeasure mu;
};

SpaceBundle load_space(const std::string& path);

// CSV with header id,mass; every id in [0, n) exactly once
PointMassMeasure load_measure(const std::string& path, std::size_t n);
// CSV with header id,value
std::vector<double> load_signal(const std::string& path, std::size_t n);
void save_signal(const std::string& path, const std::vector<double>& f);

// row-major product signal; the header line names both factor spaces
struct MatrixSignal {
    std::size_t rows = 0, cols = 0;
    std::vector<double> values;
    std::string name1, name2;
};

MatrixSignal load_matrix_signal(const std::string& path);
void save_matrix_csv(const std::string& path, const MatrixSignal& m);

void save_grid_json(const std::string& path, const DyadicGrid& g);
DyadicGrid load_grid_json(const std::string& path);

void save_systems_json(const std::string& path, const AdjacentSystems& sys);
AdjacentSystems load_systems_json(const std::string& path);

// rows level,alpha,u,value in basis order; the global mean rides on a leading
// row whose level column holds the word "mean"
void save_coefficients_csv(const std::string& path, const HaarBasis& basis,
                           const HaarCoefficients& c);
HaarCoefficients load_coefficients_csv(const std::string& path, const HaarBasis& basis);

// rows k1,a1,u1,k2,a2,u2,value; absent entries are zero
void save_tensor_csv(const std::string& path, const ProductGrid& pg, const CoefficientTensor& t);
CoefficientTensor load_tensor_csv(const std::string& path, const ProductGrid& pg);

std::string read_text_file(const std::string& path);
// writes the whole file through a temp name and a rename
void write_text_file(const std::string& path, const std::string& content);

// shortest exact decimal form kept stable across runs
std::string format_double(double v);

} // namespace dyadic
