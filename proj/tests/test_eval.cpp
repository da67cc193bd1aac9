#include <gtest/gtest.h>

#include <diskbsp/eval.hpp>

#include "testutil.hpp"

using namespace diskbsp;

namespace {

TEST(ImageRelativeError, Basics) {
    const ImageGrid f = testutil::smooth_image(16, 50).masked();
    EXPECT_EQ(image_relative_error(f, f, ErrorMode::linear), 0.0);
    EXPECT_NEAR(image_relative_error(ImageGrid(16), f, ErrorMode::linear), 1.0, 1e-15);
    ImageGrid twice = f;
    for (auto& v : twice.pixels) v *= 2.0;
    EXPECT_NEAR(image_relative_error(twice, f, ErrorMode::linear), 1.0, 1e-15);
    EXPECT_NEAR(image_relative_error(twice, f, ErrorMode::squared), 1.0, 1e-15);
    EXPECT_THROW(image_relative_error(f, ImageGrid(16), ErrorMode::linear), degenerate_error);
    EXPECT_THROW(image_relative_error(f, ImageGrid(8), ErrorMode::linear), std::invalid_argument);
}

TEST(Align, IdentityEstimate) {
    auto plan = HarmonicPlan::get(16);
    const DHCoefficients a = testutil::random_coeffs(plan, 60);
    const AlignmentResult res = best_rotation_align(a, a);
    const double wrapped = std::min(res.phi_star, 2.0 * M_PI - res.phi_star);
    EXPECT_LT(wrapped, 1e-9);
    EXPECT_LT(res.rel_error_linear, 1e-9);
}

TEST(Align, RecoversAppliedRotation) {
    auto plan = HarmonicPlan::get(16);
    const DHCoefficients ref = testutil::random_coeffs(plan, 61);
    const DHCoefficients est = rotate_coeffs(ref, 0.7);
    const AlignmentResult res = best_rotation_align(est, ref);
    // phi* should be -0.7 mod 2pi
    EXPECT_NEAR(res.phi_star, 2.0 * M_PI - 0.7, 1e-3);
    EXPECT_LT(res.rel_error_linear, 1e-9);
}

TEST(Align, SignFlipOnRadialSupportCannotBeFixed) {
    auto plan = HarmonicPlan::get(8);
    DHCoefficients ref(plan);
    for (int k = 1; k <= plan->K(0); ++k) ref.set(0, k, 1.0);  // n=0 only
    DHCoefficients est = ref;
    for (auto& v : est.values) v = -v;
    const AlignmentResult res = best_rotation_align(est, ref);
    EXPECT_NEAR(res.rel_error_squared, 4.0, 1e-9);  // ||-f - f||^2/||f||^2
    EXPECT_NEAR(res.rel_error_linear, 2.0, 1e-9);
}

TEST(Align, GridOptimality) {
    auto plan = HarmonicPlan::get(16);
    const DHCoefficients ref = testutil::random_coeffs(plan, 62);
    const DHCoefficients est = rotate_coeffs(ref, 2.13);
    const AlignmentResult res = best_rotation_align(est, ref);
    auto objective = [&](double phi) {
        const DHCoefficients r = rotate_coeffs(est, phi);
        double s = 0.0;
        for (size_t j = 0; j < r.values.size(); ++j) s += std::norm(r.values[j] - ref.values[j]);
        return s;
    };
    const double at_star = objective(res.phi_star);
    for (int i = 0; i < 720; ++i)
        EXPECT_LE(at_star, objective(2.0 * M_PI * i / 720.0) + 1e-12);
}

TEST(Align, InvariantToCommonRotation) {
    auto plan = HarmonicPlan::get(16);
    const DHCoefficients ref = testutil::random_coeffs(plan, 63);
    const DHCoefficients est = rotate_coeffs(ref, 1.9);
    const double e0 = best_rotation_align(est, ref).rel_error_linear;
    const double e1 = best_rotation_align(rotate_coeffs(est, 0.8), rotate_coeffs(ref, 0.8))
                          .rel_error_linear;
    EXPECT_NEAR(e0, e1, 1e-9);
}

TEST(Align, ZeroReferenceIsDegenerate) {
    auto plan = HarmonicPlan::get(8);
    const DHCoefficients est = testutil::random_coeffs(plan, 64);
    EXPECT_THROW(best_rotation_align(est, DHCoefficients(plan)), degenerate_error);
}

}  // namespace
