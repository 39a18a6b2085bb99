#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kprune/types.hpp"

namespace kprune {

// A scalar observable of the state. Monomials, Gaussian RBFs, compactly
// supported Wendland kernels (C^2 order), raw coordinates and the constant.
struct Observable {
    enum class Kind { constant, coordinate, monomial, gaussian_rbf, wendland };

    Kind kind = Kind::constant;
    std::vector<int> exponents;  // monomial
    Vector center;               // gaussian_rbf / wendland
    double scale = 1.0;          // width (gaussian_rbf) or support radius (wendland)
    int index = 0;               // coordinate

    double operator()(const double* x, Index n) const;
};

Observable make_constant();
Observable make_coordinate(int index);
Observable make_monomial(std::vector<int> exponents);
Observable make_gaussian_rbf(Vector center, double width);
Observable make_wendland(Vector center, double support_radius);

struct Dictionary {
    std::vector<Observable> observables;
    int state_dim = 0;

    Index size() const { return static_cast<Index>(observables.size()); }
};

// Batch evaluation: entry (i, j) = psi_j(x_i). Rows are independent and the
// loop is parallelized over them.
Matrix evaluate(const Dictionary& dict, const Matrix& x_rows);

// Rank-revealing preconditioning: returns coefficients such that the columns
// of evaluate(dict, x) * basis_coeff are orthonormal under the empirical
// inner product <f,g> = (1/N) sum_i f(x_i) g(x_i). Retained directions are the
// column-pivoted QR pivots with |r_ii| >= rank_tol * |r_00|.
struct PreconditionResult {
    Matrix basis_coeff;  // s0 x retained_dim
    Index retained_dim = 0;
};

PreconditionResult precondition(const Dictionary& dict, const Matrix& x_rows,
                                double rank_tol);

// Builders for the stock dictionaries.
Dictionary monomial_dictionary(int state_dim, int max_degree);
void append_gaussian_grid(Dictionary& dict, const Vector& lo, const Vector& hi,
                          int per_axis, double width);
void append_wendland_grid(Dictionary& dict, const Vector& lo, const Vector& hi,
                          double spacing, double support_radius);

// JSON schema: {"state_dim": n, "observables": [{"kind": ..., ...}]}.
// Literal kinds: constant, coordinate{index}, monomial{exponents},
// gaussian_rbf{center,width}, wendland{center,support_radius}. Generator
// kinds expand at load time: monomials{max_degree},
// gaussian_grid{lo,hi,per_axis,width}, wendland_grid{lo,hi,spacing,support_radius}.
Dictionary dictionary_from_json(const nlohmann::json& j);
nlohmann::json dictionary_to_json(const Dictionary& dict);

}  // namespace kprune
