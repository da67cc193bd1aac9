#pragma once

// Shared generators for the test suites.

#include <complex>
#include <random>

#include <diskbsp/image.hpp>
#include <diskbsp/transform.hpp>

namespace testutil {

// Smooth disk-supported image: a few positive Gaussian bumps, masked.
inline diskbsp::ImageGrid smooth_image(int L, uint64_t seed, int bumps = 4) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-0.45, 0.45);
    std::uniform_real_distribution<double> width(0.12, 0.35);
    std::uniform_real_distribution<double> amp(0.3, 1.0);
    struct Bump {
        double x, y, s, a;
    };
    std::vector<Bump> bs;
    for (int i = 0; i < bumps; ++i) bs.push_back({pos(rng), pos(rng), width(rng), amp(rng)});
    diskbsp::ImageGrid img(L);
    for (int r = 0; r < L; ++r) {
        for (int c = 0; c < L; ++c) {
            if (!img.in_disk(r, c)) continue;
            const double x = img.cx(c), y = img.cy(r);
            double v = 0.0;
            for (const auto& b : bs) {
                const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
                v += b.a * std::exp(-d2 / (2.0 * b.s * b.s));
            }
            img.at(r, c) = v;
        }
    }
    return img;
}

// Random coefficients with real-signal conjugate symmetry. `floor_first`
// keeps every |a_{n,1}| at or above the given magnitude (the inversion
// precondition).
inline diskbsp::DHCoefficients random_coeffs(std::shared_ptr<const diskbsp::HarmonicPlan> plan,
                                             uint64_t seed, double floor_first = 0.1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    diskbsp::DHCoefficients out(plan);
    for (const auto& e : plan->entries) {
        if (e.n < 0) continue;
        std::complex<double> v;
        if (e.n == 0) {
            v = gauss(rng);  // n=0 coefficients of a real signal are real
        } else {
            v = {gauss(rng), gauss(rng)};
        }
        if (e.k == 1 && std::abs(v) < floor_first) {
            const double phase = (e.n == 0) ? (v.real() < 0 ? M_PI : 0.0) : std::arg(v);
            v = std::polar(floor_first, phase);
            if (e.n == 0) v = v.real();
        }
        out.set(e.n, e.k, v);
    }
    return diskbsp::extend_negative(out);
}

inline double max_abs_diff(const std::vector<std::complex<double>>& a,
                           const std::vector<std::complex<double>>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double rel_l2_diff(const std::vector<std::complex<double>>& a,
                          const std::vector<std::complex<double>>& b) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(a[i]);
    }
    return std::sqrt(num / den);
}

// Continuum-style L1 norm: dx^2 * sum |f_p| over the disk.
inline double l1_norm(const diskbsp::ImageGrid& img) {
    double s = 0.0;
    for (int r = 0; r < img.L; ++r)
        for (int c = 0; c < img.L; ++c)
            if (img.in_disk(r, c)) s += std::abs(img.at(r, c));
    return s * img.dx() * img.dx();
}

}  // namespace testutil
