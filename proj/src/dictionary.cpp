#include "kprune/dictionary.hpp"

#include <cmath>
#include <functional>

#include "kprune/kernels.hpp"
#include "kprune/parallel.hpp"

namespace kprune {

double Observable::operator()(const double* x, Index n) const {
    switch (kind) {
        case Kind::constant:
            return 1.0;
        case Kind::coordinate:
            return x[index];
        case Kind::monomial: {
            double p = 1.0;
            for (Index i = 0; i < n; ++i) {
                const int e = exponents[static_cast<size_t>(i)];
                for (int k = 0; k < e; ++k) p *= x[i];
            }
            return p;
        }
        case Kind::gaussian_rbf: {
            double r2 = 0.0;
            for (Index i = 0; i < n; ++i) {
                const double d = x[i] - center(i);
                r2 += d * d;
            }
            return std::exp(-r2 / (2.0 * scale * scale));
        }
        case Kind::wendland: {
            double r2 = 0.0;
            for (Index i = 0; i < n; ++i) {
                const double d = x[i] - center(i);
                r2 += d * d;
            }
            const double r = std::sqrt(r2);
            if (r >= scale) return 0.0;
            const double u = r / scale;
            const double w = 1.0 - u;
            const double w2 = w * w;
            return w2 * w2 * (4.0 * u + 1.0);
        }
    }
    return 0.0;
}

Observable make_constant() { return Observable{}; }

Observable make_coordinate(int index) {
    Observable o;
    o.kind = Observable::Kind::coordinate;
    o.index = index;
    return o;
}

Observable make_monomial(std::vector<int> exponents) {
    for (int e : exponents)
        if (e < 0) throw InvalidConfig("monomial exponents must be nonnegative");
    Observable o;
    o.kind = Observable::Kind::monomial;
    o.exponents = std::move(exponents);
    return o;
}

Observable make_gaussian_rbf(Vector center, double width) {
    if (width <= 0.0) throw InvalidConfig("gaussian_rbf width must be positive");
    Observable o;
    o.kind = Observable::Kind::gaussian_rbf;
    o.center = std::move(center);
    o.scale = width;
    return o;
}

Observable make_wendland(Vector center, double support_radius) {
    if (support_radius <= 0.0) throw InvalidConfig("wendland support radius must be positive");
    Observable o;
    o.kind = Observable::Kind::wendland;
    o.center = std::move(center);
    o.scale = support_radius;
    return o;
}

Matrix evaluate(const Dictionary& dict, const Matrix& x_rows) {
    if (x_rows.cols() != dict.state_dim)
        throw DimensionMismatch("evaluate: state dimension mismatch");
    const Index n_rows = x_rows.rows();
    const Index s0 = dict.size();
    Matrix out(n_rows, s0);
    const Index n = dict.state_dim;
    const int nt = parallel::thread_count();
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
    for (Index i = 0; i < n_rows; ++i) {
        Vector xi = x_rows.row(i);
        for (Index j = 0; j < s0; ++j)
            out(i, j) = dict.observables[static_cast<size_t>(j)](xi.data(), n);
    }
    return out;
}

PreconditionResult precondition(const Dictionary& dict, const Matrix& x_rows,
                                double rank_tol) {
    if (rank_tol <= 0.0) throw InvalidConfig("precondition: rank_tol must be positive");
    Matrix m = evaluate(dict, x_rows);
    m *= 1.0 / std::sqrt(static_cast<double>(x_rows.rows()));
    const kernels::PivotedQR pq = kernels::pivoted_qr(m, rank_tol);
    if (pq.rank == 0)
        throw DegenerateData("precondition: all pivots below tolerance");
    const Index s = pq.rank;
    const Matrix r11 = pq.r.leftCols(s);
    const Matrix inv = r11.triangularView<Eigen::Upper>().solve(Matrix::Identity(s, s));
    PreconditionResult out;
    out.retained_dim = s;
    out.basis_coeff = Matrix::Zero(dict.size(), s);
    for (Index i = 0; i < s; ++i) out.basis_coeff.row(pq.perm[static_cast<size_t>(i)]) = inv.row(i);
    return out;
}

Dictionary monomial_dictionary(int state_dim, int max_degree) {
    Dictionary dict;
    dict.state_dim = state_dim;
    // Enumerate exponent tuples by total degree, lexicographic within a degree.
    std::vector<int> expo(static_cast<size_t>(state_dim), 0);
    for (int deg = 0; deg <= max_degree; ++deg) {
        std::function<void(int, int)> rec = [&](int pos, int remaining) {
            if (pos == state_dim - 1) {
                expo[static_cast<size_t>(pos)] = remaining;
                dict.observables.push_back(deg == 0 ? make_constant() : make_monomial(expo));
                return;
            }
            for (int e = remaining; e >= 0; --e) {
                expo[static_cast<size_t>(pos)] = e;
                rec(pos + 1, remaining - e);
            }
        };
        rec(0, deg);
    }
    return dict;
}

namespace {

void append_grid(Dictionary& dict, const std::vector<Vector>& centers, double scale,
                 bool wendland) {
    for (const Vector& c : centers)
        dict.observables.push_back(wendland ? make_wendland(c, scale)
                                            : make_gaussian_rbf(c, scale));
}

std::vector<Vector> grid_centers(const Vector& lo, const Vector& hi,
                                 const std::vector<Index>& counts) {
    const Index n = lo.size();
    std::vector<Vector> centers;
    std::vector<Index> idx(static_cast<size_t>(n), 0);
    while (true) {
        Vector c(n);
        for (Index i = 0; i < n; ++i) {
            const Index k = counts[static_cast<size_t>(i)];
            c(i) = k == 1 ? 0.5 * (lo(i) + hi(i))
                          : lo(i) + (hi(i) - lo(i)) * static_cast<double>(idx[static_cast<size_t>(i)]) /
                                        static_cast<double>(k - 1);
        }
        centers.push_back(c);
        Index pos = 0;
        while (pos < n) {
            if (++idx[static_cast<size_t>(pos)] < counts[static_cast<size_t>(pos)]) break;
            idx[static_cast<size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == n) break;
    }
    return centers;
}

}  // namespace

void append_gaussian_grid(Dictionary& dict, const Vector& lo, const Vector& hi,
                          int per_axis, double width) {
    if (lo.size() != dict.state_dim || hi.size() != dict.state_dim)
        throw DimensionMismatch("append_gaussian_grid: box dimension mismatch");
    std::vector<Index> counts(static_cast<size_t>(dict.state_dim), per_axis);
    append_grid(dict, grid_centers(lo, hi, counts), width, false);
}

void append_wendland_grid(Dictionary& dict, const Vector& lo, const Vector& hi,
                          double spacing, double support_radius) {
    if (lo.size() != dict.state_dim || hi.size() != dict.state_dim)
        throw DimensionMismatch("append_wendland_grid: box dimension mismatch");
    std::vector<Index> counts;
    for (Index i = 0; i < dict.state_dim; ++i)
        counts.push_back(static_cast<Index>(std::llround((hi(i) - lo(i)) / spacing)) + 1);
    append_grid(dict, grid_centers(lo, hi, counts), support_radius, true);
}

namespace {

Vector vector_from_json(const nlohmann::json& j) {
    Vector v(static_cast<Index>(j.size()));
    Index i = 0;
    for (const auto& x : j) v(i++) = x.get<double>();
    return v;
}

nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json j = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) j.push_back(v(i));
    return j;
}

}  // namespace

Dictionary dictionary_from_json(const nlohmann::json& j) {
    Dictionary dict;
    dict.state_dim = j.at("state_dim").get<int>();
    for (const auto& o : j.at("observables")) {
        const std::string kind = o.at("kind").get<std::string>();
        if (kind == "constant") {
            dict.observables.push_back(make_constant());
        } else if (kind == "coordinate") {
            dict.observables.push_back(make_coordinate(o.at("index").get<int>()));
        } else if (kind == "monomial") {
            dict.observables.push_back(make_monomial(o.at("exponents").get<std::vector<int>>()));
        } else if (kind == "gaussian_rbf") {
            dict.observables.push_back(
                make_gaussian_rbf(vector_from_json(o.at("center")), o.at("width").get<double>()));
        } else if (kind == "wendland") {
            dict.observables.push_back(make_wendland(vector_from_json(o.at("center")),
                                                     o.at("support_radius").get<double>()));
        } else if (kind == "monomials") {
            Dictionary sub = monomial_dictionary(dict.state_dim, o.at("max_degree").get<int>());
            for (auto& obs : sub.observables) dict.observables.push_back(std::move(obs));
        } else if (kind == "gaussian_grid") {
            append_gaussian_grid(dict, vector_from_json(o.at("lo")), vector_from_json(o.at("hi")),
                                 o.at("per_axis").get<int>(), o.at("width").get<double>());
        } else if (kind == "wendland_grid") {
            append_wendland_grid(dict, vector_from_json(o.at("lo")), vector_from_json(o.at("hi")),
                                 o.at("spacing").get<double>(),
                                 o.at("support_radius").get<double>());
        } else {
            throw IoError("dictionary_from_json: unknown observable kind '" + kind + "'");
        }
    }
    if (dict.observables.empty())
        throw InvalidConfig("dictionary_from_json: dictionary is empty");
    return dict;
}

nlohmann::json dictionary_to_json(const Dictionary& dict) {
    nlohmann::json obs = nlohmann::json::array();
    for (const Observable& o : dict.observables) {
        nlohmann::json e;
        switch (o.kind) {
            case Observable::Kind::constant:
                e["kind"] = "constant";
                break;
            case Observable::Kind::coordinate:
                e["kind"] = "coordinate";
                e["index"] = o.index;
                break;
            case Observable::Kind::monomial:
                e["kind"] = "monomial";
                e["exponents"] = o.exponents;
                break;
            case Observable::Kind::gaussian_rbf:
                e["kind"] = "gaussian_rbf";
                e["center"] = vector_to_json(o.center);
                e["width"] = o.scale;
                break;
            case Observable::Kind::wendland:
                e["kind"] = "wendland";
                e["center"] = vector_to_json(o.center);
                e["support_radius"] = o.scale;
                break;
        }
        obs.push_back(std::move(e));
    }
    return nlohmann::json{{"state_dim", dict.state_dim}, {"observables", std::move(obs)}};
}

}  // namespace kprune
