#pragma once

// Full disk bispectrum b_{j1,j2,k3} = a_{j1} a_{j2} conj(a_{n_{j1}+n_{j2},k3}),
// the selective subset (rows j1 in {0,2}) that is a complete invariant, and
// the recursive inversion back to DH coefficients up to a global rotation.
//
// Full-index convention (frozen; see the count regression tests):
// j1 <= j2 over the full signed plan, -N_m <= n_{j1}+n_{j2} <= N_m,
// 1 <= k3 <= K_{n_{j1}+n_{j2}}. This is the literal index set of the
// definition with the j1 <-> j2 symmetry deduplicated.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "transform.hpp"

namespace diskbsp {

// ---------------------------------------------------------------- selective

struct SelLabel {
    int row;  // 0 or 2
    int n;    // row 2: 0..N_m-1; row 0: unused (0)
    int k;    // row 0: 1..K_0; row 2: 1..K_{n+1}
    bool operator==(const SelLabel&) const = default;
};

struct SelectiveBispectrum {
    std::shared_ptr<const HarmonicPlan> plan;
    std::vector<SelLabel> labels;
    std::vector<std::complex<double>> values;

    static size_t count_for(const HarmonicPlan& plan) {
        size_t n = 0;
        for (int nn = 0; nn <= plan.max_order; ++nn) n += static_cast<size_t>(plan.K(nn));
        return n;
    }

    static std::vector<SelLabel> index_for(const HarmonicPlan& plan) {
        std::vector<SelLabel> labels;
        for (int k = 1; k <= plan.K(0); ++k) labels.push_back({0, 0, k});
        for (int n = 0; n < plan.max_order; ++n)
            for (int k = 1; k <= plan.K(n + 1); ++k) labels.push_back({2, n, k});
        return labels;
    }
};

// b_{0,0,k} = a_{0,1}^2 conj(a_{0,k});  b_{2,n,k} = a_{1,1} a_{n,1} conj(a_{n+1,k}).
inline SelectiveBispectrum selective_bispectrum(const DHCoefficients& coeffs) {
    const auto& plan = *coeffs.plan;
    SelectiveBispectrum out;
    out.plan = coeffs.plan;
    out.labels = SelectiveBispectrum::index_for(plan);
    out.values.resize(out.labels.size());
    const std::complex<double> a01 = coeffs.at(0, 1);
    const std::complex<double> a11 = plan.max_order >= 1 ? coeffs.at(1, 1) : 0.0;
    for (size_t i = 0; i < out.labels.size(); ++i) {
        const SelLabel& l = out.labels[i];
        if (l.row == 0) {
            out.values[i] = (a01 * a01) * std::conj(coeffs.at(0, l.k));
        } else {
            out.values[i] = (a11 * coeffs.at(l.n, 1)) * std::conj(coeffs.at(l.n + 1, l.k));
        }
    }
    return out;
}

// --------------------------------------------------------------------- full

struct FullTriple {
    int j1, j2, k3;
    bool operator==(const FullTriple&) const = default;
};

struct FullBispectrum {
    std::shared_ptr<const HarmonicPlan> plan;
    std::vector<FullTriple> index;
    std::vector<std::complex<double>> values;

    // Closed-form cardinality of the frozen convention; independent of the
    // enumeration path (used as its cross-check).
    static size_t count_for(const HarmonicPlan& plan) {
        const int Nm = plan.max_order;
        size_t count = 0;
        for (int n1 = -Nm; n1 <= Nm; ++n1) {
            const size_t K1 = static_cast<size_t>(plan.K(n1));
            if (K1 == 0) continue;
            for (int n2 = n1; n2 <= Nm; ++n2) {
                const size_t K2 = static_cast<size_t>(plan.K(n2));
                if (K2 == 0) continue;
                const int ns = n1 + n2;
                if (ns < -Nm || ns > Nm) continue;
                const size_t K3 = static_cast<size_t>(plan.K(ns));
                const size_t pairs = (n1 == n2) ? K1 * (K1 + 1) / 2 : K1 * K2;
                count += pairs * K3;
            }
        }
        return count;
    }

    static std::vector<FullTriple> index_for(const HarmonicPlan& plan) {
        std::vector<FullTriple> idx;
        idx.reserve(count_for(plan));
        for (int j1 = 0; j1 < plan.m; ++j1) {
            const int n1 = plan.entries[static_cast<size_t>(j1)].n;
            for (int j2 = j1; j2 < plan.m; ++j2) {
                const int ns = n1 + plan.entries[static_cast<size_t>(j2)].n;
                const int K3 = plan.K(ns);
                if (std::abs(ns) > plan.max_order) continue;
                for (int k3 = 1; k3 <= K3; ++k3) idx.push_back({j1, j2, k3});
            }
        }
        return idx;
    }
};

// Streams (triple, value) without materializing the index; evaluation order
// is the index order.
template <typename Fn>
void full_bispectrum_for_each(const DHCoefficients& coeffs, Fn&& fn) {
    const auto& plan = *coeffs.plan;
    const int Nm = plan.max_order;
    // (n+Nm, k-1) -> j lookup for the third factor
    std::vector<std::vector<int>> j_of(static_cast<size_t>(2 * Nm + 1));
    for (int n = -Nm; n <= Nm; ++n) {
        auto& row = j_of[static_cast<size_t>(n + Nm)];
        row.resize(static_cast<size_t>(plan.K(n)));
        for (int k = 1; k <= plan.K(n); ++k) row[static_cast<size_t>(k - 1)] = plan.find(n, k);
    }
    for (int j1 = 0; j1 < plan.m; ++j1) {
        const int n1 = plan.entries[static_cast<size_t>(j1)].n;
        const std::complex<double> v1 = coeffs.values[static_cast<size_t>(j1)];
        for (int j2 = j1; j2 < plan.m; ++j2) {
            const int ns = n1 + plan.entries[static_cast<size_t>(j2)].n;
            if (ns < -Nm || ns > Nm) continue;
            const auto& row = j_of[static_cast<size_t>(ns + Nm)];
            if (row.empty()) continue;
            const std::complex<double> v12 = v1 * coeffs.values[static_cast<size_t>(j2)];
            for (int k3 = 1; k3 <= static_cast<int>(row.size()); ++k3)
                fn(FullTriple{j1, j2, k3},
                   v12 * std::conj(coeffs.values[static_cast<size_t>(row[static_cast<size_t>(k3 - 1)])]));
        }
    }
}

inline FullBispectrum full_bispectrum(const DHCoefficients& coeffs) {
    FullBispectrum out;
    out.plan = coeffs.plan;
    out.index.reserve(FullBispectrum::count_for(*coeffs.plan));
    out.values.reserve(out.index.capacity());
    full_bispectrum_for_each(coeffs, [&](const FullTriple& t, std::complex<double> v) {
        out.index.push_back(t);
        out.values.push_back(v);
    });
    return out;
}

// ---------------------------------------------------------------- inversion

struct InversionDiagnostics {
    double imag_residual_a01 = 0.0;    // |Im b_{0,0,1}| / |b_{0,0,1}|
    double imag_residual_gauge = 0.0;  // |Im b_{2,0,1}| / |b_{2,0,1}|
    double tau_zero = 0.0;             // threshold used for the a_{n,1} != 0 checks
};

struct InversionResult {
    DHCoefficients coeffs;
    InversionDiagnostics diagnostics;
};

// Recursion with gauge fixing (a_{1,1} real non-negative):
//   a_{0,1} = cbrt(Re b_{0,0,1})
//   a_{0,k} = conj(b_{0,0,k} / a_{0,1}^2)
//   a_{1,1} = sqrt(Re b_{2,0,1} / a_{0,1})
//   a_{1,k} = conj(b_{2,0,k} / (a_{1,1} a_{0,1}))
//   a_{n+1,k} = conj(b_{2,n,k} / (a_{1,1} a_{n,1})),  n = 1..N_m-1
// then a_{-n,k} = (-1)^n conj(a_{n,k}).
// Output equals the true coefficients rotated by -arg(a_{1,1}^true).
inline InversionResult invert_selective(const SelectiveBispectrum& b) {
    const auto& plan = *b.plan;
    InversionResult res;
    res.coeffs = DHCoefficients(b.plan);

    double bmax = 0.0;
    for (const auto& v : b.values) bmax = std::max(bmax, std::abs(v));
    const double tau = 1e-8 * std::cbrt(bmax);
    res.diagnostics.tau_zero = tau;

    // label layout: K_0 row-0 entries, then row-2 groups by n
    const int K0 = plan.K(0);
    auto b0 = [&](int k) { return b.values[static_cast<size_t>(k - 1)]; };
    std::vector<size_t> row2_start(static_cast<size_t>(plan.max_order), 0);
    {
        size_t pos = static_cast<size_t>(K0);
        for (int n = 0; n < plan.max_order; ++n) {
            row2_start[static_cast<size_t>(n)] = pos;
            pos += static_cast<size_t>(plan.K(n + 1));
        }
    }
    auto b2 = [&](int n, int k) {
        return b.values[row2_start[static_cast<size_t>(n)] + static_cast<size_t>(k - 1)];
    };

    const std::complex<double> b001 = b0(1);
    if (std::abs(b001) > 0)
        res.diagnostics.imag_residual_a01 = std::abs(b001.imag()) / std::abs(b001);
    const double a01 = std::cbrt(b001.real());
    if (!(std::abs(a01) > tau) || bmax == 0.0)
        throw degenerate_error("invert_selective: a_{0,1} vanishes", 0);
    res.coeffs.set(0, 1, a01);
    for (int k = 2; k <= K0; ++k) res.coeffs.set(0, k, std::conj(b0(k) / (a01 * a01)));

    if (plan.max_order >= 1) {
        const std::complex<double> b201 = b2(0, 1);
        if (std::abs(b201) > 0)
            res.diagnostics.imag_residual_gauge = std::abs(b201.imag()) / std::abs(b201);
        const double t = b201.real() / a01;
        if (t < 0.0)
            throw degenerate_error("invert_selective: Re(b_{2,0,1})/a_{0,1} < 0", 1);
        const double a11 = std::sqrt(t);
        if (!(a11 > tau))
            throw degenerate_error("invert_selective: a_{1,1} vanishes", 1);
        res.coeffs.set(1, 1, a11);
        for (int k = 2; k <= plan.K(1); ++k)
            res.coeffs.set(1, k, std::conj(b2(0, k) / (a11 * a01)));

        std::complex<double> an1 = a11;
        for (int n = 1; n < plan.max_order; ++n) {
            if (!(std::abs(an1) > tau))
                throw degenerate_error("invert_selective: a_{n,1} vanishes at n=" +
                                           std::to_string(n), n);
            std::complex<double> next1 = 0.0;
            for (int k = 1; k <= plan.K(n + 1); ++k) {
                const std::complex<double> v = std::conj(b2(n, k) / (a11 * an1));
                res.coeffs.set(n + 1, k, v);
                if (k == 1) next1 = v;
            }
            an1 = next1;
        }
    }

    // negative orders from real-signal symmetry
    for (const auto& e : plan.entries) {
        if (e.n >= 0) continue;
        const std::complex<double> v = std::conj(res.coeffs.at(-e.n, e.k));
        res.coeffs.values[static_cast<size_t>(e.j)] = ((-e.n) % 2) ? -v : v;
    }
    return res;
}

// Extracts the selective subset from a full bispectrum and delegates.
inline InversionResult invert_full(const FullBispectrum& b) {
    const auto& plan = *b.plan;
    auto key = [](const FullTriple& t) {
        return (static_cast<uint64_t>(static_cast<uint32_t>(t.j1)) << 40) |
               (static_cast<uint64_t>(static_cast<uint32_t>(t.j2)) << 20) |
               static_cast<uint64_t>(static_cast<uint32_t>(t.k3));
    };
    std::unordered_map<uint64_t, size_t> lookup;
    lookup.reserve(b.index.size());
    for (size_t i = 0; i < b.index.size(); ++i) lookup.emplace(key(b.index[i]), i);

    SelectiveBispectrum sel;
    sel.plan = b.plan;
    sel.labels = SelectiveBispectrum::index_for(plan);
    sel.values.resize(sel.labels.size());
    const int j11 = plan.max_order >= 1 ? plan.find(1, 1) : -1;
    for (size_t i = 0; i < sel.labels.size(); ++i) {
        const SelLabel& l = sel.labels[i];
        FullTriple t{};
        if (l.row == 0) {
            t = {0, 0, l.k};
        } else {
            const int jn1 = plan.find(l.n, 1);
            t = {std::min(j11, jn1), std::max(j11, jn1), l.k};
        }
        auto it = lookup.find(key(t));
        if (it == lookup.end())
            throw std::invalid_argument("invert_full: selective subset missing from index");
        sel.values[i] = b.values[it->second];
    }
    return invert_selective(sel);
}

// ------------------------------------------------------------------ metrics

namespace detail {

inline double rel_error_impl(const std::vector<std::complex<double>>& x,
                             const std::vector<std::complex<double>>& y) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        num += std::norm(x[i] - y[i]);
        den += std::norm(x[i]);
    }
    if (den == 0.0) throw degenerate_error("bispectrum_relative_error: zero reference norm");
    return std::sqrt(num / den);
}

}  // namespace detail

// ||b1 - b2|| / ||b1|| over aligned indices (Euclidean).
inline double bispectrum_relative_error(const SelectiveBispectrum& b1,
                                        const SelectiveBispectrum& b2) {
    if (b1.plan->hash() != b2.plan->hash() || b1.labels.size() != b2.labels.size())
        throw std::invalid_argument("bispectrum_relative_error: index mismatch");
    return detail::rel_error_impl(b1.values, b2.values);
}

inline double bispectrum_relative_error(const FullBispectrum& b1, const FullBispectrum& b2) {
    if (b1.plan->hash() != b2.plan->hash() || b1.index.size() != b2.index.size())
        throw std::invalid_argument("bispectrum_relative_error: index mismatch");
    return detail::rel_error_impl(b1.values, b2.values);
}

}  // namespace diskbsp
