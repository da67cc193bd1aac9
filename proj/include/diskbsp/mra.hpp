#pragma once

// Rotation-invariant multi-reference alignment: dataset synthesis, analytic
// and Monte-Carlo noise-bias terms for the selective bispectrum, the
// average-correct-invert estimator, and the factorial sweep.

#include <chrono>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "bispectrum.hpp"
#include "eval.hpp"
#include "transform.hpp"
#include "util.hpp"

namespace diskbsp {

enum class Correction { off, analytic, monte_carlo };

struct MRAConfig {
    int n_copies = 1;      // n_X
    double sigma2 = 0.0;   // per-pixel Gaussian noise variance
    uint64_t seed = 0;
    int L = 0;
    DhtBackend backend = DhtBackend::direct;
    Correction correction = Correction::analytic;
    std::optional<double> fixed_angle;  // test hook: overrides the angle stream
};

// n_X copies of `clean`, each independently bilinear-rotated by a uniform
// angle, noised per pixel, and re-masked. Per-copy RNG substreams are derived
// from (seed, copy index), so results are order-independent.
inline std::vector<ImageGrid> synthesize_dataset(const ImageGrid& clean, const MRAConfig& cfg) {
    std::vector<ImageGrid> out(static_cast<size_t>(cfg.n_copies));
    parallel_for(out.size(), [&](size_t i) {
        NormalSampler rng(substream_seed(cfg.seed, i));
        const double angle =
            cfg.fixed_angle ? *cfg.fixed_angle : rng.uniform() * 2.0 * M_PI;
        ImageGrid img = bilinear_rotate(clean, angle);
        const double sigma = std::sqrt(cfg.sigma2);
        if (sigma > 0.0)
            for (auto& v : img.pixels) v += sigma * rng();
        img.mask();
        out[i] = std::move(img);
    });
    return out;
}

struct BiasTerm {
    std::shared_ptr<const HarmonicPlan> plan;
    std::vector<SelLabel> labels;
    std::vector<std::complex<double>> delta;
    std::vector<double> stderr_;  // per-entry standard error (monte-carlo only)
    std::string provenance;      // "analytic" | "monte-carlo"
    double sigma2 = 0.0;
};

// Expected bispectrum offset of noisy rotated observations,
// E[b_i] - b^f = delta, from the second-order noise expansion with uniform
// rotation averaging. Only the definition's Kronecker patterns survive:
//   row 0:            delta = sigma^2 dx^2 (a_{0,k} + 2 a_{0,1} [k=1])
//   row 2, n=0, k=1:  delta = sigma^2 dx^2 a_{0,1}
// a_{0,k} are the clean signal's n=0 coefficients; in the MRA pipeline they
// are estimated by the sample mean of the observations' n=0 coefficients
// (rotation-invariant, hence unbiased).
inline BiasTerm analytic_bias(std::shared_ptr<const HarmonicPlan> plan, double sigma2,
                              const std::vector<std::complex<double>>& a0) {
    if (sigma2 < 0) throw std::invalid_argument("analytic_bias: sigma2 must be >= 0");
    if (static_cast<int>(a0.size()) < plan->K(0))
        throw std::invalid_argument("analytic_bias: need a_{0,k} for k = 1..K_0");
    BiasTerm bias;
    bias.plan = plan;
    bias.labels = SelectiveBispectrum::index_for(*plan);
    bias.delta.assign(bias.labels.size(), 0.0);
    bias.provenance = "analytic";
    bias.sigma2 = sigma2;
    const double s = sigma2 * plan->dx * plan->dx;
    const std::complex<double> a01 = a0[0];
    for (size_t i = 0; i < bias.labels.size(); ++i) {
        const SelLabel& l = bias.labels[i];
        if (l.row == 0) {
            bias.delta[i] = s * (a0[static_cast<size_t>(l.k - 1)] +
                                 (l.k == 1 ? 2.0 * a01 : std::complex<double>(0.0)));
        } else if (l.n == 0 && l.k == 1) {
            bias.delta[i] = s * a01;
        }
    }
    return bias;
}

// Empirical oracle for the bias term. Observations are built in coefficient
// space (rotate_coeffs + an independently transformed noise image), so the
// rotation itself adds no interpolation bias to the estimate.
inline BiasTerm monte_carlo_bias(std::shared_ptr<const HarmonicPlan> plan,
                                 const ImageGrid& clean, double sigma2, int trials,
                                 uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("monte_carlo_bias: trials >= 1");
    const DHCoefficients a_clean = dht_forward(clean, plan);
    const SelectiveBispectrum b_ref = selective_bispectrum(a_clean);

    const size_t N = b_ref.values.size();
    std::vector<std::complex<double>> sum(N, 0.0);
    std::vector<double> sq_re(N, 0.0), sq_im(N, 0.0);

    const double sigma = std::sqrt(sigma2);
    const size_t P = plan->pixel_count();
    ImageGrid noise(plan->L);

    for (int t = 0; t < trials; ++t) {
        NormalSampler rng(substream_seed(seed, static_cast<uint64_t>(t)));
        const double angle = rng.uniform() * 2.0 * M_PI;
        DHCoefficients obs = rotate_coeffs(a_clean, angle);
        if (sigma > 0.0) {
            std::fill(noise.pixels.begin(), noise.pixels.end(), 0.0);
            for (size_t p = 0; p < P; ++p)
                noise.pixels[static_cast<size_t>(plan->pix[p])] = sigma * rng();
            const DHCoefficients eta = dht_forward(noise, plan);
            for (size_t j = 0; j < obs.values.size(); ++j) obs.values[j] += eta.values[j];
        }
        const SelectiveBispectrum b = selective_bispectrum(obs);
        for (size_t i = 0; i < N; ++i) {
            const std::complex<double> d = b.values[i] - b_ref.values[i];
            sum[i] += d;
            sq_re[i] += d.real() * d.real();
            sq_im[i] += d.imag() * d.imag();
        }
    }

    BiasTerm bias;
    bias.plan = plan;
    bias.labels = b_ref.labels;
    bias.delta.resize(N);
    bias.stderr_.resize(N);
    bias.provenance = "monte-carlo";
    bias.sigma2 = sigma2;
    const double T = static_cast<double>(trials);
    for (size_t i = 0; i < N; ++i) {
        bias.delta[i] = sum[i] / T;
        const double mre = bias.delta[i].real(), mim = bias.delta[i].imag();
        const double var_re = std::max(0.0, sq_re[i] / T - mre * mre);
        const double var_im = std::max(0.0, sq_im[i] / T - mim * mim);
        bias.stderr_[i] = std::sqrt((var_re + var_im) / T);
    }
    return bias;
}

struct MRATimings {
    double transform_ms = 0.0;
    double bispectrum_ms = 0.0;
    double invert_ms = 0.0;
    double total_ms = 0.0;
};

struct MRAEstimate {
    ImageGrid image;
    DHCoefficients coeffs;
    SelectiveBispectrum corrected_mean;
    MRATimings timings;
    InversionDiagnostics diagnostics;
};

// Per-image selective bispectra -> entrywise mean -> subtract bias -> invert
// -> inverse transform. Degenerate inversions propagate with the failing order.
inline MRAEstimate mra_estimate(const std::vector<ImageGrid>& images, double sigma2,
                                std::shared_ptr<const HarmonicPlan> plan,
                                Correction correction = Correction::analytic,
                                DhtBackend backend = DhtBackend::direct,
                                const BiasTerm* precomputed_bias = nullptr) {
    if (images.empty()) throw std::invalid_argument("mra_estimate: need at least one image");
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();

    for (const auto& img : images)
        if (img.L != plan->L)
            throw std::invalid_argument("mra_estimate: image size != plan size");

    MRAEstimate out;
    std::vector<std::complex<double>> mean;
    std::vector<std::complex<double>> a0_mean(static_cast<size_t>(plan->K(0)), 0.0);
    std::vector<DHCoefficients> coeffs(images.size());
    parallel_for(images.size(), [&](size_t i) { coeffs[i] = dht(images[i], plan, backend); });
    const auto t1 = clock::now();

    SelectiveBispectrum b;
    for (size_t i = 0; i < images.size(); ++i) {
        b = selective_bispectrum(coeffs[i]);
        if (mean.empty()) mean.assign(b.values.size(), 0.0);
        for (size_t q = 0; q < b.values.size(); ++q) mean[q] += b.values[q];
        for (int k = 1; k <= plan->K(0); ++k)
            a0_mean[static_cast<size_t>(k - 1)] += coeffs[i].at(0, k);
    }
    const double inv_n = 1.0 / static_cast<double>(images.size());
    for (auto& v : mean) v *= inv_n;
    for (auto& v : a0_mean) v *= inv_n;

    b.values = mean;
    if (correction == Correction::analytic) {
        const BiasTerm bias = analytic_bias(plan, sigma2, a0_mean);
        for (size_t q = 0; q < b.values.size(); ++q) b.values[q] -= bias.delta[q];
    } else if (correction == Correction::monte_carlo) {
        if (!precomputed_bias || precomputed_bias->provenance != "monte-carlo")
            throw std::invalid_argument("mra_estimate: monte-carlo correction needs a bias term");
        for (size_t q = 0; q < b.values.size(); ++q) b.values[q] -= precomputed_bias->delta[q];
    }
    out.corrected_mean = b;
    const auto t2 = clock::now();

    InversionResult inv = invert_selective(b);
    out.coeffs = std::move(inv.coeffs);
    out.diagnostics = inv.diagnostics;
    const auto t3 = clock::now();

    out.image = dht_inverse(out.coeffs, plan);
    const auto t4 = clock::now();

    auto ms = [](auto a, auto bb) {
        return std::chrono::duration<double, std::milli>(bb - a).count();
    };
    out.timings.transform_ms = ms(t0, t1);
    out.timings.bispectrum_ms = ms(t1, t2);
    out.timings.invert_ms = ms(t2, t3);
    out.timings.total_ms = ms(t0, t4);
    return out;
}

struct MRARecord {
    int n_copies = 0;
    double sigma2 = 0.0;
    uint64_t seed = 0;
    double rel_error = 0.0;          // squared form of the MRA metric
    double rel_error_linear = 0.0;
    double wall_ms = 0.0;
    bool degenerate = false;
    int degenerate_order = -1;
};

struct MRAReport {
    std::vector<MRARecord> records;
    std::vector<ImageGrid> estimates;  // aligned, one per record
    std::shared_ptr<const HarmonicPlan> plan;
};

// Full factorial sweep over (n_X, sigma^2, seed). Cells run independently on
// substreams derived from (seed, cell index); parallel and serial runs agree.
inline MRAReport mra_sweep(const ImageGrid& clean, const std::vector<int>& nx_grid,
                           const std::vector<double>& sigma2_grid,
                           const std::vector<uint64_t>& seeds,
                           std::shared_ptr<const HarmonicPlan> plan,
                           Correction correction = Correction::analytic,
                           DhtBackend backend = DhtBackend::direct) {
    MRAReport report;
    report.plan = plan;
    const size_t cells = nx_grid.size() * sigma2_grid.size() * seeds.size();
    report.records.resize(cells);
    report.estimates.resize(cells);

    const DHCoefficients ref = dht_forward(clean.masked(), plan);

    parallel_for(cells, [&](size_t cell) {
        const size_t si = cell % seeds.size();
        const size_t gi = (cell / seeds.size()) % sigma2_grid.size();
        const size_t ni = cell / (seeds.size() * sigma2_grid.size());

        MRAConfig cfg;
        cfg.n_copies = nx_grid[ni];
        cfg.sigma2 = sigma2_grid[gi];
        cfg.L = clean.L;
        cfg.seed = substream_seed(seeds[si], cell);
        cfg.backend = backend;

        MRARecord rec;
        rec.n_copies = cfg.n_copies;
        rec.sigma2 = cfg.sigma2;
        rec.seed = seeds[si];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto dataset = synthesize_dataset(clean.masked(), cfg);
            const MRAEstimate est = mra_estimate(dataset, cfg.sigma2, plan, correction, backend);
            const AlignmentResult aligned = best_rotation_align(est.coeffs, ref);
            rec.rel_error = aligned.rel_error_squared;
            rec.rel_error_linear = aligned.rel_error_linear;
            report.estimates[cell] = aligned.aligned;
        } catch (const degenerate_error& e) {
            rec.degenerate = true;
            rec.degenerate_order = e.order();
            rec.rel_error = std::numeric_limits<double>::quiet_NaN();
            rec.rel_error_linear = rec.rel_error;
        }
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        report.records[cell] = rec;
    });
    return report;
}

}  // namespace diskbsp
