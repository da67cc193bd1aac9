#include <gtest/gtest.h>

#include <diskbsp/bispectrum.hpp>

#include "testutil.hpp"

using namespace diskbsp;

namespace {

TEST(InvertSelective, ExactRecoveryWhenGaugeIsTrivial) {
    auto plan = HarmonicPlan::get(8);
    DHCoefficients a = testutil::random_coeffs(plan, 21);
    // force a_{1,1} real positive: the gauge phase is then zero
    a.set(1, 1, std::abs(a.at(1, 1)));
    a = extend_negative(nonneg_half_extract(a));
    const InversionResult inv = invert_selective(selective_bispectrum(a));
    EXPECT_LT(testutil::rel_l2_diff(a.values, inv.coeffs.values), 1e-10);
}

TEST(InvertSelective, RecoversUpToGaugeRotation) {
    for (int L : {8, 16, 28}) {
        auto plan = HarmonicPlan::get(L);
        for (uint64_t seed = 0; seed < 5; ++seed) {
            const DHCoefficients a = testutil::random_coeffs(plan, 100 + seed, 0.1);
            const InversionResult inv = invert_selective(selective_bispectrum(a));
            const double phi = std::arg(a.at(1, 1));
            const DHCoefficients expected = rotate_coeffs(a, -phi);
            EXPECT_LT(testutil::rel_l2_diff(expected.values, inv.coeffs.values), 1e-8)
                << "L=" << L << " seed=" << seed;
        }
    }
}

TEST(InvertSelective, GaugeConventionHolds) {
    auto plan = HarmonicPlan::get(16);
    const DHCoefficients a = testutil::random_coeffs(plan, 33);
    const InversionResult inv = invert_selective(selective_bispectrum(a));
    const std::complex<double> a11 = inv.coeffs.at(1, 1);
    EXPECT_GE(a11.real(), 0.0);
    EXPECT_NEAR(a11.imag(), 0.0, 1e-15);
}

TEST(InvertSelective, NegativeOrdersFollowConjugateSymmetry) {
    auto plan = HarmonicPlan::get(8);
    const DHCoefficients a = testutil::random_coeffs(plan, 34);
    const InversionResult inv = invert_selective(selective_bispectrum(a));
    for (const auto& e : plan->entries) {
        if (e.n >= 0) continue;
        const std::complex<double> v = inv.coeffs.at(e.n, e.k);
        const std::complex<double> twin = inv.coeffs.at(-e.n, e.k);
        const std::complex<double> expect = ((-e.n) % 2) ? -std::conj(twin) : std::conj(twin);
        EXPECT_EQ(v, expect);
    }
}

TEST(InvertSelective, AllZeroInputIsDegenerate) {
    auto plan = HarmonicPlan::get(8);
    SelectiveBispectrum b;
    b.plan = plan;
    b.labels = SelectiveBispectrum::index_for(*plan);
    b.values.assign(b.labels.size(), 0.0);
    try {
        invert_selective(b);
        FAIL() << "expected degenerate_error";
    } catch (const degenerate_error& e) {
        EXPECT_EQ(e.order(), 0);
    }
}

TEST(InvertSelective, VanishingMidChainIdentifiesOrder) {
    auto plan = HarmonicPlan::get(8);
    DHCoefficients a = testutil::random_coeffs(plan, 35);
    a.set(3, 1, 0.0);  // breaks the recursion when a_{3,1} is needed
    a = extend_negative(nonneg_half_extract(a));
    try {
        invert_selective(selective_bispectrum(a));
        FAIL() << "expected degenerate_error";
    } catch (const degenerate_error& e) {
        EXPECT_EQ(e.order(), 3);
    }
}

TEST(InvertSelective, DiagnosticsReportImaginaryResiduals) {
    auto plan = HarmonicPlan::get(8);
    const DHCoefficients a = testutil::random_coeffs(plan, 36);
    SelectiveBispectrum b = selective_bispectrum(a);
    b.values[0] += std::complex<double>(0.0, 1e-3 * std::abs(b.values[0]));
    const InversionResult inv = invert_selective(b);
    EXPECT_GT(inv.diagnostics.imag_residual_a01, 1e-4);
    EXPECT_LT(inv.diagnostics.imag_residual_a01, 2e-3);
}

TEST(InvertFull, MatchesSelectiveInversionBitwise) {
    auto plan = HarmonicPlan::get(8);
    const DHCoefficients a = testutil::random_coeffs(plan, 40);
    const InversionResult from_full = invert_full(full_bispectrum(a));
    const InversionResult from_sel = invert_selective(selective_bispectrum(a));
    ASSERT_EQ(from_full.coeffs.values.size(), from_sel.coeffs.values.size());
    for (size_t j = 0; j < from_sel.coeffs.values.size(); ++j)
        EXPECT_EQ(from_full.coeffs.values[j], from_sel.coeffs.values[j]);
}

TEST(InvertFull, ZeroInputIsDegenerate) {
    auto plan = HarmonicPlan::get(8);
    const FullBispectrum b = full_bispectrum(DHCoefficients(plan));
    EXPECT_THROW(invert_full(b), degenerate_error);
}

// Completeness on the truncated space: inversion recovers what the forward
// map saw, for every draw satisfying the non-vanishing precondition.
TEST(Completeness, InvertAfterForwardIsGaugeRotation) {
    auto plan = HarmonicPlan::get(16);
    for (uint64_t seed = 200; seed < 220; ++seed) {
        const DHCoefficients a = testutil::random_coeffs(plan, seed, 0.1);
        const InversionResult inv = invert_selective(selective_bispectrum(a));
        const DHCoefficients expected = rotate_coeffs(a, -std::arg(a.at(1, 1)));
        EXPECT_LT(testutil::rel_l2_diff(expected.values, inv.coeffs.values), 1e-8);
    }
}

}  // namespace
