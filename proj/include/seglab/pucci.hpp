#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "seglab/errors.hpp"
#include "seglab/geometry.hpp"

namespace seglab {

/// Ellipticity bounds 0 < lambda <= Lambda of the extremal operators.
struct Ellipticity {
    double lambda = 1.0;
    double Lambda = 1.0;

    Ellipticity() = default;
    Ellipticity(double lo, double hi) : lambda(lo), Lambda(hi) {
        if (!(lo > 0.0) || !(lo <= hi) || !std::isfinite(hi))
            throw InvalidArgument("ellipticity requires 0 < lambda <= Lambda, got (" +
                                  std::to_string(lo) + ", " + std::to_string(hi) + ")");
    }
};

/// Dense symmetric n x n matrix; only the upper triangle is stored.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int n) : n_(n), upper_(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0) {
        if (n < 1) throw InvalidArgument("matrix dimension must be positive");
    }

    static SymMatrix identity(int n) {
        SymMatrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static SymMatrix diagonal(std::initializer_list<double> d) {
        SymMatrix m(static_cast<int>(d.size()));
        int i = 0;
        for (double v : d) {
            m(i, i) = v;
            ++i;
        }
        return m;
    }
    /// 2x2 matrix [[xx, xy], [xy, yy]].
    static SymMatrix from2(double xx, double xy, double yy) {
        SymMatrix m(2);
        m(0, 0) = xx;
        m(0, 1) = xy;
        m(1, 1) = yy;
        return m;
    }

    int dim() const noexcept { return n_; }

    double& operator()(int i, int j) { return upper_[slot(i, j)]; }
    double operator()(int i, int j) const { return upper_[slot(i, j)]; }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < n_; ++i) t += (*this)(i, i);
        return t;
    }

    SymMatrix& operator+=(const SymMatrix& o) {
        check_same(o);
        for (std::size_t k = 0; k < upper_.size(); ++k) upper_[k] += o.upper_[k];
        return *this;
    }
    SymMatrix& operator*=(double t) {
        for (double& v : upper_) v *= t;
        return *this;
    }
    friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
    friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) {
        a.check_same(b);
        for (std::size_t k = 0; k < a.upper_.size(); ++k) a.upper_[k] -= b.upper_[k];
        return a;
    }
    friend SymMatrix operator-(SymMatrix a) { return a *= -1.0; }
    friend SymMatrix operator*(double t, SymMatrix a) { return a *= t; }

private:
    std::size_t slot(int i, int j) const {
        if (i > j) std::swap(i, j);
        return static_cast<std::size_t>(i) * n_ - static_cast<std::size_t>(i) * (i - 1) / 2 +
               static_cast<std::size_t>(j - i);
    }
    void check_same(const SymMatrix& o) const {
        if (o.n_ != n_) throw InvalidArgument("matrix dimensions differ");
    }

    int n_ = 0;
    std::vector<double> upper_;
};

namespace detail {

/// Ascending eigenvalues of [[a, b], [b, c]].
inline std::pair<double, double> eigen2(double a, double b, double c) {
    const double mean = 0.5 * (a + c);
    const double rad = std::hypot(0.5 * (a - c), b);
    return {mean - rad, mean + rad};
}

/// Cyclic Jacobi rotations until the off-diagonal mass is below 1e-12 of the Frobenius norm.
inline std::vector<double> jacobi_eigenvalues(const SymMatrix& m) {
    const int n = m.dim();
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
    double frob = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            A(i, j) = m(i, j);
            frob += A(i, j) * A(i, j);
        }
    const double target = 1e-12 * std::sqrt(frob);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (std::sqrt(2.0 * off) <= target) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (A(p, q) == 0.0) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = A(k, p);
                    const double akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A(p, k);
                    const double aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = A(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

} // namespace detail

/// Full spectrum in ascending order. Closed form for n = 2, cyclic Jacobi otherwise.
inline std::vector<double> eigenvalues(const SymMatrix& m) {
    if (m.dim() == 1) return {m(0, 0)};
    if (m.dim() == 2) {
        auto [lo, hi] = detail::eigen2(m(0, 0), m(0, 1), m(1, 1));
        return {lo, hi};
    }
    return detail::jacobi_eigenvalues(m);
}

/// Lambda * (sum of negative eigenvalues) + lambda * (sum of positive eigenvalues).
inline double pucci_minus(std::span<const double> spectrum, const Ellipticity& ell) {
    double neg = 0.0, pos = 0.0;
    for (double e : spectrum) (e < 0.0 ? neg : pos) += e;
    return ell.Lambda * neg + ell.lambda * pos;
}

/// lambda * (sum of negative eigenvalues) + Lambda * (sum of positive eigenvalues).
inline double pucci_plus(std::span<const double> spectrum, const Ellipticity& ell) {
    double neg = 0.0, pos = 0.0;
    for (double e : spectrum) (e < 0.0 ? neg : pos) += e;
    return ell.lambda * neg + ell.Lambda * pos;
}

inline double pucci_minus(const SymMatrix& m, const Ellipticity& ell) {
    return pucci_minus(eigenvalues(m), ell);
}
inline double pucci_plus(const SymMatrix& m, const Ellipticity& ell) {
    return pucci_plus(eigenvalues(m), ell);
}

enum class PucciSign : std::uint8_t { Minus, Plus };

/// Planar Hessian [[xx, xy], [xy, yy]] without heap storage; the grid-level hot path.
struct Hessian2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double trace() const noexcept { return xx + yy; }
    SymMatrix matrix() const { return SymMatrix::from2(xx, xy, yy); }
};

inline double pucci_minus(const Hessian2& H, const Ellipticity& ell) {
    auto [lo, hi] = detail::eigen2(H.xx, H.xy, H.yy);
    const double ev[2] = {lo, hi};
    return pucci_minus(std::span<const double>(ev), ell);
}
inline double pucci_plus(const Hessian2& H, const Ellipticity& ell) {
    auto [lo, hi] = detail::eigen2(H.xx, H.xy, H.yy);
    const double ev[2] = {lo, hi};
    return pucci_plus(std::span<const double>(ev), ell);
}
inline double pucci(const Hessian2& H, const Ellipticity& ell, PucciSign sign) {
    return sign == PucciSign::Minus ? pucci_minus(H, ell) : pucci_plus(H, ell);
}

/// Coefficient matrix A in the admissible set {lambda <= eig(A) <= Lambda} attaining the
/// infimum of trace(A H), so trace(A H) == pucci_minus(H). A shares H's eigenvectors and
/// weights negative directions by Lambda, the rest by lambda.
inline Hessian2 minimizing_coefficients(const Hessian2& H, const Ellipticity& ell) {
    auto [lo, hi] = detail::eigen2(H.xx, H.xy, H.yy);
    const double w_lo = lo < 0.0 ? ell.Lambda : ell.lambda;
    const double w_hi = hi < 0.0 ? ell.Lambda : ell.lambda;
    if (w_lo == w_hi) return {w_lo, 0.0, w_lo};
    // unit eigenvector (c, s) of the lower eigenvalue
    double c, s;
    if (std::abs(H.xy) > 0.0) {
        c = H.xy;
        s = lo - H.xx;
        if (std::abs(s) < std::abs(lo - H.yy)) {
            c = lo - H.yy;
            s = H.xy;
        }
    } else if (H.xx <= H.yy) {
        c = 1.0;
        s = 0.0;
    } else {
        c = 0.0;
        s = 1.0;
    }
    const double norm = std::hypot(c, s);
    c /= norm;
    s /= norm;
    // A = w_hi I + (w_lo - w_hi) v v^T
    const double d = w_lo - w_hi;
    return {w_hi + d * c * c, d * c * s, w_hi + d * s * s};
}

/// Central-difference Hessian at (i, j); requires all 8 neighbours in the grid.
inline Hessian2 hessian_at(const ScalarField& f, int i, int j) {
    const double inv_h2 = 1.0 / (f.grid().h() * f.grid().h());
    const double c = f(i, j);
    return {(f(i + 1, j) - 2.0 * c + f(i - 1, j)) * inv_h2,
            (f(i + 1, j + 1) - f(i + 1, j - 1) - f(i - 1, j + 1) + f(i - 1, j - 1)) * 0.25 * inv_h2,
            (f(i, j + 1) - 2.0 * c + f(i, j - 1)) * inv_h2};
}

/// Five-point Laplacian at (i, j).
inline double laplacian_at(const ScalarField& f, int i, int j) {
    const double h = f.grid().h();
    return (f(i + 1, j) + f(i - 1, j) + f(i, j + 1) + f(i, j - 1) - 4.0 * f(i, j)) / (h * h);
}

/// Discrete Hessian at an interior node whose 3x3 stencil avoids exterior nodes.
inline SymMatrix discrete_hessian(const ScalarField& field, const DomainMask& mask, Node node) {
    if (!mask.stencil_complete(node.i, node.j))
        throw InvalidArgument("Hessian stencil at (" + std::to_string(node.i) + ", " +
                              std::to_string(node.j) + ") is not complete");
    return hessian_at(field, node.i, node.j).matrix();
}

struct PucciFieldResult {
    ScalarField values;
    std::vector<std::uint8_t> valid; ///< 1 at stencil-complete interior nodes
};

/// Extremal operator of the discrete Hessian at every stencil-complete node; 0 elsewhere.
inline PucciFieldResult pucci_field(const ScalarField& field, const DomainMask& mask, const Ellipticity& ell,
                                    PucciSign sign) {
    const Grid& g = mask.grid();
    PucciFieldResult out{ScalarField(g), std::vector<std::uint8_t>(g.size(), 0)};
    for (std::size_t k : mask.stencil_nodes()) {
        const Node n = g.node(k);
        out.values[k] = pucci(hessian_at(field, n.i, n.j), ell, sign);
        out.valid[k] = 1;
    }
    return out;
}

} // namespace seglab
