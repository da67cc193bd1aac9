#pragma once

// Bessel functions of the first kind J_n and their positive roots.
//
// Evaluation uses Miller's backward recurrence with normalization
// (J_0 + 2*sum_k J_{2k} = 1), which is stable for every order and argument
// we need (n up to ~250, x up to ~500) and gives near machine-precision
// absolute accuracy. Roots are found per order from interlacing brackets
// (lambda_{n-1,k} < lambda_{n,k} < lambda_{n-1,k+1}) with bisection plus a
// Newton polish; order 0 is seeded by McMahon's expansion. Rows are extended
// on demand so a bracket is always available even where K_n plateaus.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace diskbsp {

namespace detail {

// Fills out[0..nmax] with J_0(x)..J_nmax(x), x >= 0.
inline void bessel_j_all(int nmax, double x, std::vector<double>& out) {
    out.assign(static_cast<size_t>(nmax) + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return;
    }
    const int base = std::max(nmax, static_cast<int>(std::ceil(x)));
    int start = base + static_cast<int>(2.0 * std::sqrt(40.0 * (base + 2))) + 20;
    if (start % 2) ++start;

    double jp = 0.0;   // J_{m+1}
    double j = 1e-30;  // J_m (arbitrary seed, fixed by normalization)
    double norm = 0.0; // accumulates J_0 + 2*sum J_{2k}
    for (int m = start; m >= 1; --m) {
        const double jm = (2.0 * m) / x * j - jp;
        jp = j;
        j = jm;
        if (m - 1 <= nmax) out[static_cast<size_t>(m - 1)] = j;
        if ((m - 1) % 2 == 0) norm += (m - 1 == 0) ? j : 2.0 * j;
        if (std::abs(j) > 1e250) {
            const double s = 1e-250;
            j *= s;
            jp *= s;
            norm *= s;
            for (double& v : out) v *= s;
        }
    }
    const double inv = 1.0 / norm;
    for (double& v : out) v *= inv;
}

// Refines the root of J_n inside [lo, hi]; the bracket must hold a sign change.
inline double refine_root(int n, double lo, double hi) {
    std::vector<double> tmp;
    auto f = [&](double x) {
        bessel_j_all(std::max(n, 1), x, tmp);
        return tmp[static_cast<size_t>(n)];
    };
    double flo = f(lo);
    for (int it = 0; it < 16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((flo < 0) == (fm < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 50; ++it) {
        bessel_j_all(std::max(n, 1), x, tmp);
        const double fx = tmp[static_cast<size_t>(n)];
        const double dfx = (n == 0) ? -tmp[1]
                                    : tmp[static_cast<size_t>(n - 1)] - (n / x) * fx;
        double step = fx / dfx;
        double nx = x - step;
        if (!(nx > lo && nx < hi)) {  // Newton left the bracket, fall back to bisection
            nx = 0.5 * (lo + hi);
            step = x - nx;
        }
        const double fn = f(nx);
        if ((flo < 0) == (fn < 0)) {
            lo = nx;
            flo = fn;
        } else {
            hi = nx;
        }
        x = nx;
        if (std::abs(fn) < 1e-14 && std::abs(step) < 1e-13 * x) break;
    }
    return x;
}

}  // namespace detail

// J_n(x) for n >= 0, x >= 0.
inline double bessel_j(int n, double x) {
    if (n < 0) throw std::invalid_argument("bessel_j: order must be >= 0");
    if (!std::isfinite(x) || x < 0.0)
        throw std::invalid_argument("bessel_j: argument must be finite and >= 0");
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    std::vector<double> tmp;
    detail::bessel_j_all(n, x, tmp);
    return tmp[static_cast<size_t>(n)];
}

// J_n(x) for signed order via J_{-n} = (-1)^n J_n.
inline double bessel_j_signed(int n, double x) {
    if (n >= 0) return bessel_j(n, x);
    const double v = bessel_j(-n, x);
    return (-n) % 2 ? -v : v;
}

// Positive roots lambda_{n,k} of J_n, grown on demand.
class BesselRootTable {
public:
    BesselRootTable() = default;

    // All rows n with lambda_{n,1} <= lambda_max get every root <= lambda_max.
    static BesselRootTable build(double lambda_max) {
        if (!(lambda_max > 0))
            throw std::invalid_argument("BesselRootTable: lambda_max must be > 0");
        BesselRootTable t;
        for (int n = 0;; ++n) {
            t.ensure(n, 1);
            if (t.rows_[static_cast<size_t>(n)][0] > lambda_max) break;
            int k = 1;
            while (t.root(n, k) <= lambda_max) t.ensure(n, ++k);
        }
        t.lambda_max_ = lambda_max;
        return t;
    }

    int max_order() const {
        int n = static_cast<int>(rows_.size()) - 1;
        while (n >= 0 && count_leq(n, lambda_max_) == 0) --n;
        return n;
    }
    double lambda_max() const { return lambda_max_; }

    // k-th positive root of J_|n| (k >= 1); grows the table as needed.
    double root(int n, int k) {
        n = std::abs(n);
        if (k < 1) throw std::invalid_argument("BesselRootTable::root: k >= 1 required");
        ensure(n, k);
        return rows_[static_cast<size_t>(n)][static_cast<size_t>(k - 1)];
    }

    double root(int n, int k) const {
        n = std::abs(n);
        if (n >= static_cast<int>(rows_.size()) || k < 1 ||
            k > static_cast<int>(rows_[static_cast<size_t>(n)].size()))
            throw std::out_of_range("BesselRootTable::root: index outside table");
        return rows_[static_cast<size_t>(n)][static_cast<size_t>(k - 1)];
    }

    // Number of roots of J_|n| that are <= lambda (lambda <= lambda_max).
    int count_leq(int n, double lambda) const {
        n = std::abs(n);
        if (n >= static_cast<int>(rows_.size())) return 0;
        const auto& r = rows_[static_cast<size_t>(n)];
        int c = 0;
        while (c < static_cast<int>(r.size()) && r[static_cast<size_t>(c)] <= lambda) ++c;
        return c;
    }

    const std::vector<std::vector<double>>& rows() const { return rows_; }

private:
    // Guarantees rows_[n] holds at least k roots.
    void ensure(int n, int k) {
        if (static_cast<int>(rows_.size()) <= n) rows_.resize(static_cast<size_t>(n) + 1);
        auto& row = rows_[static_cast<size_t>(n)];
        if (static_cast<int>(row.size()) >= k) return;
        if (n == 0) {
            for (int i = static_cast<int>(row.size()) + 1; i <= k; ++i) {
                const double beta = (i - 0.25) * M_PI;
                const double guess =
                    beta + 1.0 / (8.0 * beta) - 124.0 / (3.0 * std::pow(8.0 * beta, 3));
                row.push_back(detail::refine_root(0, guess - 0.5, guess + 0.5));
            }
            return;
        }
        ensure(n - 1, k + 1);
        const auto& prev = rows_[static_cast<size_t>(n - 1)];
        for (int i = static_cast<int>(row.size()); i < k; ++i)
            row.push_back(detail::refine_root(n, prev[static_cast<size_t>(i)],
                                              prev[static_cast<size_t>(i + 1)]));
    }

    double lambda_max_ = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> rows_;
};

// k-th positive root of J_n for a one-off query.
inline double bessel_root(int n, int k) {
    if (n < 0 || k < 1) throw std::invalid_argument("bessel_root: need n >= 0, k >= 1");
    BesselRootTable t;
    return t.root(n, k);
}

}  // namespace diskbsp
