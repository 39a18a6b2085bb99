#include "kprune/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "kprune/rng.hpp"

namespace kprune {

Matrix random_matrix(std::uint64_t seed, Index rows, Index cols) {
    CounterRng rng(seed, 0x6D61747269786D61ULL);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
    return m;
}

Matrix random_orthonormal(std::uint64_t seed, Index rows, Index cols) {
    return thin_qr(random_matrix(seed, rows, cols)).q;
}

Vector random_angles(std::uint64_t seed, Index s, double min_angle, double max_angle) {
    CounterRng rng(seed, 0x616E676C65ULL);
    Vector th(s);
    for (Index i = 0; i < s; ++i) th(i) = rng.uniform(min_angle, max_angle);
    std::sort(th.data(), th.data() + s);
    return th;
}

SyntheticInstance synthetic_instance(std::uint64_t seed, Index n_rows, const Vector& theta,
                                     bool shared_r) {
    const Index s = theta.size();
    if (n_rows < 2 * s)
        throw DimensionMismatch("synthetic_instance: need at least 2s rows");

    const Matrix big = random_orthonormal(seed, n_rows, 2 * s);
    const Matrix qa = big.leftCols(s);
    const Matrix qperp = big.rightCols(s);

    SyntheticInstance inst;
    inst.theta = theta;
    inst.q_a = qa;
    inst.q_b.resize(n_rows, s);
    for (Index j = 0; j < s; ++j)
        inst.q_b.col(j) = std::cos(theta(j)) * qa.col(j) + std::sin(theta(j)) * qperp.col(j);

    // Well-conditioned upper-triangular coordinate factor.
    CounterRng rng(seed, 0x7472ULL);
    Matrix r = Matrix::Zero(s, s);
    for (Index j = 0; j < s; ++j) {
        r(j, j) = 1.0 + rng.uniform();
        for (Index i = 0; i < j; ++i) r(i, j) = rng.uniform(-0.3, 0.3);
    }
    inst.r = r;

    inst.data.a = qa * r;
    inst.data.b = shared_r ? Matrix(inst.q_b * r) : Matrix(inst.q_b * (r + 0.1 * random_matrix(seed + 1, s, s).triangularView<Eigen::Upper>().toDenseMatrix()));
    inst.data.basis_coeff = Matrix::Identity(s, s);
    return inst;
}

LiftedData random_lifted_data(std::uint64_t seed, Index n_rows, Index s) {
    LiftedData data;
    data.a = random_matrix(seed, n_rows, s) / std::sqrt(static_cast<double>(n_rows));
    data.b = random_matrix(seed + 0x9E37ULL, n_rows, s) / std::sqrt(static_cast<double>(n_rows));
    data.basis_coeff = Matrix::Identity(s, s);
    return data;
}

}  // namespace kprune
