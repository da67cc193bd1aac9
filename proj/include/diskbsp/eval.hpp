#pragma once

// Rotational registration in coefficient space and image-space error metrics.

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "transform.hpp"

namespace diskbsp {

enum class ErrorMode { linear, squared };

// Masked-disk norm ratio: ||fhat - f|| / ||f|| (linear) or its square.
inline double image_relative_error(const ImageGrid& fhat, const ImageGrid& f,
                                   ErrorMode mode = ErrorMode::linear) {
    if (fhat.L != f.L) throw std::invalid_argument("image_relative_error: size mismatch");
    double num = 0.0, den = 0.0;
    for (int r = 0; r < f.L; ++r) {
        for (int c = 0; c < f.L; ++c) {
            if (!f.in_disk(r, c)) continue;
            const double d = fhat.at(r, c) - f.at(r, c);
            num += d * d;
            den += f.at(r, c) * f.at(r, c);
        }
    }
    if (den == 0.0) throw degenerate_error("image_relative_error: zero reference norm");
    const double sq = num / den;
    return mode == ErrorMode::squared ? sq : std::sqrt(sq);
}

struct AlignmentResult {
    double phi_star = 0.0;  // in [0, 2pi)
    ImageGrid aligned;      // inverse transform of the aligned estimate
    double rel_error_linear = 0.0;
    double rel_error_squared = 0.0;
};

// phi* minimizes sum_j |a^est_j e^{i n_j phi} - a^ref_j|^2 over a 720-point
// grid with golden-section refinement. The objective reduces to
// A - 2 Re sum_n z_n e^{i n phi} with z_n = sum_{j: n_j=n} conj(a^ref_j) a^est_j,
// so each candidate angle costs O(N_m). Errors are reported against the
// reference's bandlimited reconstruction.
inline AlignmentResult best_rotation_align(const DHCoefficients& estimate,
                                           const DHCoefficients& reference) {
    require_same_plan(*estimate.plan, *reference.plan, "best_rotation_align");
    const auto& plan = *reference.plan;

    double ref_norm2 = 0.0;
    for (const auto& v : reference.values) ref_norm2 += std::norm(v);
    if (ref_norm2 == 0.0)
        throw degenerate_error("best_rotation_align: zero reference norm");

    const int Nm = plan.max_order;
    std::vector<std::complex<double>> z(static_cast<size_t>(2 * Nm + 1), 0.0);
    for (size_t j = 0; j < reference.values.size(); ++j)
        z[static_cast<size_t>(plan.entries[j].n + Nm)] +=
            std::conj(reference.values[j]) * estimate.values[j];

    auto gain = [&](double phi) {  // maximize
        double s = 0.0;
        for (int n = -Nm; n <= Nm; ++n)
            s += (z[static_cast<size_t>(n + Nm)] * std::polar(1.0, n * phi)).real();
        return s;
    };

    const int grid = 720;
    int best = 0;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
        const double g = gain(2.0 * M_PI * i / grid);
        if (g > best_gain) {
            best_gain = g;
            best = i;
        }
    }
    double lo = 2.0 * M_PI * (best - 1) / grid;
    double hi = 2.0 * M_PI * (best + 1) / grid;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double g1 = gain(x1), g2 = gain(x2);
    while (hi - lo > 1e-12) {
        if (g1 < g2) {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + gr * (hi - lo);
            g2 = gain(x2);
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - gr * (hi - lo);
            g1 = gain(x1);
        }
    }

    AlignmentResult res;
    res.phi_star = std::fmod(0.5 * (lo + hi), 2.0 * M_PI);
    if (res.phi_star < 0) res.phi_star += 2.0 * M_PI;
    const DHCoefficients aligned = rotate_coeffs(estimate, res.phi_star);
    res.aligned = dht_inverse(aligned, reference.plan);
    const ImageGrid ref_img = dht_inverse(reference, reference.plan);
    res.rel_error_linear = image_relative_error(res.aligned, ref_img, ErrorMode::linear);
    res.rel_error_squared = image_relative_error(res.aligned, ref_img, ErrorMode::squared);
    return res;
}

}  // namespace diskbsp
