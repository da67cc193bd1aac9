#include <gtest/gtest.h>

#include <diskbsp/eval.hpp>
#include <diskbsp/transform.hpp>

#include "testutil.hpp"

using namespace diskbsp;

namespace {

TEST(DhtForward, ZeroImageGivesZeroCoefficients) {
    auto plan = HarmonicPlan::get(8);
    const DHCoefficients a = dht_forward(ImageGrid(8), plan);
    for (const auto& v : a.values) EXPECT_EQ(v, std::complex<double>(0.0, 0.0));
}

TEST(DhtForward, SizeMismatchRejected) {
    auto plan = HarmonicPlan::get(8);
    EXPECT_THROW(dht_forward(ImageGrid(10), plan), std::invalid_argument);
}

TEST(DhtForward, BasisFunctionImageRecoversUnitCoefficient) {
    auto plan = HarmonicPlan::get(12);
    const int j = plan->find(0, 1);
    ImageGrid img(12);
    for (size_t p = 0; p < plan->pixel_count(); ++p)
        img.pixels[plan->pix[p]] = plan->psi(j, p).real();
    const DHCoefficients a = dht_forward(img, plan);
    EXPECT_NEAR(a.values[j].real(), 1.0, 1e-12);  // unit discrete norm
    // other low-frequency coefficients stay at the Gram leakage level
    const int j2 = plan->find(0, 2);
    EXPECT_LT(std::abs(a.values[j2]), 0.65);
}

TEST(DhtForward, Linearity) {
    auto plan = HarmonicPlan::get(16);
    const ImageGrid f = testutil::smooth_image(16, 11);
    const ImageGrid g = testutil::smooth_image(16, 12);
    const double alpha = 0.7, beta = -1.3;
    ImageGrid combo(16);
    for (size_t i = 0; i < combo.pixels.size(); ++i)
        combo.pixels[i] = alpha * f.pixels[i] + beta * g.pixels[i];
    const auto af = dht_forward(f, plan), ag = dht_forward(g, plan),
               ac = dht_forward(combo, plan);
    double num = 0.0, den = 0.0;
    for (size_t j = 0; j < ac.values.size(); ++j) {
        num += std::norm(ac.values[j] - (alpha * af.values[j] + beta * ag.values[j]));
        den += std::norm(ac.values[j]);
    }
    EXPECT_LT(std::sqrt(num / den), 1e-12);
}

TEST(DhtForward, ConjugateSymmetryOfRealImages) {
    auto plan = HarmonicPlan::get(16);
    const DHCoefficients a = dht_forward(testutil::smooth_image(16, 5).masked(), plan);
    double scale = 0.0;
    for (const auto& v : a.values) scale = std::max(scale, std::abs(v));
    for (const auto& e : plan->entries) {
        if (e.n < 0) continue;
        const std::complex<double> pos = a.at(e.n, e.k);
        const std::complex<double> neg = a.at(-e.n, e.k);
        const std::complex<double> expect = (e.n % 2) ? -std::conj(pos) : std::conj(pos);
        EXPECT_LT(std::abs(neg - expect), 1e-9 * scale);  // tau_sym
        if (e.n == 0) EXPECT_LT(std::abs(pos.imag()), 1e-9 * scale);
    }
}

TEST(DhtForward, ParsevalBound) {
    auto plan = HarmonicPlan::get(16);
    const ImageGrid f = testutil::smooth_image(16, 21).masked();
    const DHCoefficients a = dht_forward(f, plan);
    double coefs = 0.0;
    for (const auto& v : a.values) coefs += std::norm(v);
    double pixels = 0.0;
    for (double v : f.pixels) pixels += v * v;
    pixels *= plan->dx * plan->dx;
    const double tau_orth = 0.47;  // frozen worst Gram deviation at L=16
    EXPECT_LE(coefs, (1.0 + tau_orth) * pixels);
}

TEST(DhtInverse, ZeroCoefficientsGiveZeroImage) {
    auto plan = HarmonicPlan::get(8);
    const ImageGrid img = dht_inverse(DHCoefficients(plan), plan);
    for (double v : img.pixels) EXPECT_EQ(v, 0.0);
}

TEST(DhtInverse, PlanMismatchRejected) {
    auto plan8 = HarmonicPlan::get(8);
    auto plan16 = HarmonicPlan::get(16);
    EXPECT_THROW(dht_inverse(DHCoefficients(plan8), plan16), std::invalid_argument);
}

TEST(DhtInverse, SingleCoefficientNearIdempotent) {
    auto plan = HarmonicPlan::get(12);
    DHCoefficients a(plan);
    a.set(3, 1, 1.0);
    const ImageGrid img = dht_inverse(a, plan);
    const DHCoefficients back = dht_forward(img, plan);
    // Re-projection differs from the input by Gram leakage plus the dropped
    // imaginary part; the target coefficient splits between +-3.
    EXPECT_NEAR(back.at(3, 1).real(), 0.5, 0.08);
    EXPECT_NEAR(back.at(-3, 1).real(), -0.5, 0.08);
}

// Round-trip truncation error for a smooth disk-supported bump at L=28,
// computed once by this very round trip and frozen as a regression value.
TEST(DhtInverse, RoundTripRegressionL28) {
    auto plan = HarmonicPlan::get(28);
    ImageGrid bump(28);
    for (int r = 0; r < 28; ++r)
        for (int c = 0; c < 28; ++c) {
            if (!bump.in_disk(r, c)) continue;
            const double x = bump.cx(c), y = bump.cy(r);
            const double d2 = (x - 0.15) * (x - 0.15) + (y + 0.2) * (y + 0.2);
            bump.at(r, c) = std::exp(-d2 / (2.0 * 0.22 * 0.22));
        }
    const ImageGrid rec = dht_inverse(dht_forward(bump, plan), plan);
    const double err = image_relative_error(rec, bump, ErrorMode::linear);
    EXPECT_NEAR(err, 0.00058531, 5e-6);  // frozen golden from this round trip
}

TEST(RotateCoeffs, IdentityAndPeriodicity) {
    auto plan = HarmonicPlan::get(16);
    const DHCoefficients a = testutil::random_coeffs(plan, 3);
    const DHCoefficients r0 = rotate_coeffs(a, 0.0);
    for (size_t j = 0; j < a.values.size(); ++j) EXPECT_EQ(r0.values[j], a.values[j]);
    const DHCoefficients r2pi = rotate_coeffs(a, 2.0 * M_PI);
    EXPECT_LT(testutil::rel_l2_diff(a.values, r2pi.values), 1e-12);
}

TEST(RotateCoeffs, ExactGroupAction) {
    auto plan = HarmonicPlan::get(16);
    const DHCoefficients a = testutil::random_coeffs(plan, 4);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    for (int trial = 0; trial < 20; ++trial) {
        const double p1 = angle(rng), p2 = angle(rng);
        const auto ab = rotate_coeffs(rotate_coeffs(a, p1), p2);
        const auto once = rotate_coeffs(a, p1 + p2);
        EXPECT_LT(testutil::rel_l2_diff(once.values, ab.values), 1e-12);
    }
}

TEST(RotateCoeffs, AgreesWithPixelRotation) {
    // relative error decreases with L
    double prev = 1.0;
    for (int L : {16, 28, 56}) {
        auto plan = HarmonicPlan::get(L);
        const ImageGrid f = testutil::smooth_image(L, 9).masked();
        const double phi = 0.83;
        const auto via_pixels = dht_forward(bilinear_rotate(f, phi), plan);
        const auto via_coeffs = rotate_coeffs(dht_forward(f, plan), phi);
        const double err = testutil::rel_l2_diff(via_coeffs.values, via_pixels.values);
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LT(prev, 0.02);
}

TEST(BilinearRotate, ZeroAngleIsIdentity) {
    const ImageGrid f = testutil::smooth_image(16, 30).masked();
    const ImageGrid g = bilinear_rotate(f, 0.0);
    for (size_t i = 0; i < f.pixels.size(); ++i) EXPECT_NEAR(g.pixels[i], f.pixels[i], 1e-15);
}

TEST(BilinearRotate, QuarterTurnsArePermutations) {
    const ImageGrid f = testutil::smooth_image(16, 31).masked();
    ImageGrid g = f;
    for (int i = 0; i < 4; ++i) g = bilinear_rotate(g, M_PI / 2.0);
    for (size_t i = 0; i < f.pixels.size(); ++i) EXPECT_NEAR(g.pixels[i], f.pixels[i], 1e-12);
}

TEST(BilinearRotate, PreservesMeanIntensity) {
    const ImageGrid f = testutil::smooth_image(28, 32).masked();
    const ImageGrid g = bilinear_rotate(f, 1.1);
    EXPECT_NEAR(disk_mean(g), disk_mean(f), 0.02 * std::abs(disk_mean(f)));
}

TEST(HalfExtension, RoundTripsForwardOutput) {
    auto plan = HarmonicPlan::get(16);
    const DHCoefficients a = dht_forward(testutil::smooth_image(16, 40).masked(), plan);
    const DHCoefficients rebuilt = extend_negative(nonneg_half_extract(a));
    double scale = 0.0;
    for (const auto& v : a.values) scale = std::max(scale, std::abs(v));
    EXPECT_LT(testutil::max_abs_diff(a.values, rebuilt.values), 1e-9 * scale);
}

TEST(HalfExtension, SignConvention) {
    auto plan = HarmonicPlan::get(8);
    DHCoefficients half(plan);
    half.set(2, 1, 1.0);
    const DHCoefficients full = extend_negative(half);
    EXPECT_EQ(full.at(-2, 1), std::complex<double>(1.0, 0.0));  // (-1)^2 conj(1)
    half.set(2, 1, 0.0);
    half.set(1, 1, std::complex<double>(0.0, 1.0));
    const DHCoefficients odd = extend_negative(half);
    EXPECT_EQ(odd.at(-1, 1), std::complex<double>(0.0, 1.0));  // -conj(i) = i
    // n=0 rows pass through unchanged
    EXPECT_EQ(odd.at(0, 1), std::complex<double>(0.0, 0.0));
}

// --- fast backend ---

TEST(FastDht, ZeroImageGivesZeroCoefficients) {
    auto plan = HarmonicPlan::get(16);
    const DHCoefficients a = dht_forward_fast(ImageGrid(16), plan);
    for (const auto& v : a.values) EXPECT_EQ(v, std::complex<double>(0.0, 0.0));
}

TEST(FastDht, ConstantDiskImageIsRadial) {
    auto plan = HarmonicPlan::get(16);
    ImageGrid ones(16, 1.0);
    ones.mask();
    const DHCoefficients a = dht_forward_fast(ones, plan);
    double radial = 0.0, angular = 0.0;
    for (size_t j = 0; j < a.values.size(); ++j) {
        if (plan->entries[j].n == 0)
            radial = std::max(radial, std::abs(a.values[j]));
        else
            angular = std::max(angular, std::abs(a.values[j]));
    }
    EXPECT_GT(radial, 0.1);
    EXPECT_LT(angular, 0.02 * radial);
}

// epsilon_backend per L, measured once on smooth images and frozen:
// max_j |fast - direct| <= eps * ||f||_1.
TEST(FastDht, AgreesWithDirectWithinFrozenBound) {
    const struct {
        int L;
        double eps;
    } cases[] = {{8, 0.09}, {16, 0.03}, {28, 0.012}, {56, 0.005}};
    for (const auto& c : cases) {
        auto plan = HarmonicPlan::get(c.L);
        for (uint64_t seed : {101, 102, 103}) {
            const ImageGrid f = testutil::smooth_image(c.L, seed).masked();
            const auto direct = dht_forward(f, plan);
            const auto fast = dht_forward_fast(f, plan);
            const double diff = testutil::max_abs_diff(direct.values, fast.values);
            EXPECT_LE(diff, c.eps * testutil::l1_norm(f)) << "L=" << c.L << " seed=" << seed;
        }
    }
}

}  // namespace
