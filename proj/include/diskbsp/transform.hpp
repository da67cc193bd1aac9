#pragma once

// Forward and inverse disk-harmonic transform (direct and fast backends),
// coefficient-space rotation, and real-signal conjugate-symmetry helpers.

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fft.hpp"
#include "image.hpp"
#include "plan.hpp"

namespace diskbsp {

struct DHCoefficients {
    std::shared_ptr<const HarmonicPlan> plan;
    std::vector<std::complex<double>> values;  // indexed by plan order j

    DHCoefficients() = default;
    explicit DHCoefficients(std::shared_ptr<const HarmonicPlan> p)
        : plan(std::move(p)), values(plan ? static_cast<size_t>(plan->m) : 0) {}

    std::complex<double> at(int n, int k) const {
        const int j = plan->find(n, k);
        if (j < 0) throw std::out_of_range("DHCoefficients::at: (n,k) not in plan");
        return values[static_cast<size_t>(j)];
    }

    void set(int n, int k, std::complex<double> v) {
        const int j = plan->find(n, k);
        if (j < 0) throw std::out_of_range("DHCoefficients::set: (n,k) not in plan");
        values[static_cast<size_t>(j)] = v;
    }
};

inline void require_same_plan(const HarmonicPlan& a, const HarmonicPlan& b, const char* who) {
    if (a.hash() != b.hash())
        throw std::invalid_argument(std::string(who) + ": plan mismatch");
}

// a_j = sum_p f_p conj(psi_j(x_p)) dx^2. Each coefficient (negative orders
// included) is its own independent sum, so the conjugate-symmetry invariant
// is observable rather than built in.
inline DHCoefficients dht_forward(const ImageGrid& image, std::shared_ptr<const HarmonicPlan> plan) {
    if (image.L != plan->L) throw std::invalid_argument("dht_forward: image size != plan size");
    const size_t P = plan->pixel_count();
    const double w = plan->dx * plan->dx;

    // f_p restricted to the disk, premultiplied by either conj(e^{in theta})
    // (orders >= 0) or e^{in theta} (orders < 0).
    std::vector<double> f(P);
    for (size_t p = 0; p < P; ++p) f[p] = image.pixels[static_cast<size_t>(plan->pix[p])];

    DHCoefficients out(plan);
    parallel_for(static_cast<size_t>(plan->m), [&](size_t j) {
        const PlanEntry& e = plan->entries[j];
        const int na = std::abs(e.n);
        const double sign = (e.n < 0 && na % 2) ? -1.0 : 1.0;
        std::complex<double> acc = 0.0;
        for (size_t p = 0; p < P; ++p) {
            const double rad = plan->radial(static_cast<int>(j), plan->radius_id[p]);
            const std::complex<double> ang = plan->angular(na, p);
            // conj(psi_j): orders >= 0 use conj(ang), orders < 0 use ang with sign
            const std::complex<double> cpsi = (e.n >= 0) ? rad * std::conj(ang) : sign * rad * ang;
            acc += f[p] * cpsi;
        }
        out.values[j] = acc * w;
    });
    return out;
}

// f(x_p) = Re(sum_j a_j psi_j(x_p)) inside the disk, 0 outside.
inline ImageGrid dht_inverse(const DHCoefficients& coeffs, std::shared_ptr<const HarmonicPlan> plan) {
    require_same_plan(*coeffs.plan, *plan, "dht_inverse");
    const size_t P = plan->pixel_count();
    ImageGrid out(plan->L);
    parallel_for(P, [&](size_t p) {
        std::complex<double> acc = 0.0;
        for (size_t j = 0; j < static_cast<size_t>(plan->m); ++j) {
            const PlanEntry& e = plan->entries[j];
            const int na = std::abs(e.n);
            const double rad = plan->radial(static_cast<int>(j), plan->radius_id[p]);
            const std::complex<double> ang = plan->angular(na, p);
            const std::complex<double> psi =
                (e.n >= 0) ? rad * ang
                           : ((na % 2) ? -rad : rad) * std::conj(ang);
            acc += coeffs.values[j] * psi;
        }
        out.pixels[static_cast<size_t>(plan->pix[p])] = acc.real();
    });
    return out;
}

// Multiplies each coefficient by e^{i n_j phi} (exact group action on the
// truncated coefficient space).
inline DHCoefficients rotate_coeffs(const DHCoefficients& coeffs, double phi) {
    if (!std::isfinite(phi)) throw std::invalid_argument("rotate_coeffs: phi must be finite");
    DHCoefficients out(coeffs.plan);
    for (size_t j = 0; j < coeffs.values.size(); ++j) {
        const int n = coeffs.plan->entries[j].n;
        out.values[j] = coeffs.values[j] * std::polar(1.0, n * phi);
    }
    return out;
}

// Keeps only n >= 0 entries (others zeroed).
inline DHCoefficients nonneg_half_extract(const DHCoefficients& coeffs) {
    DHCoefficients out(coeffs.plan);
    for (size_t j = 0; j < coeffs.values.size(); ++j)
        out.values[j] = (coeffs.plan->entries[j].n >= 0) ? coeffs.values[j] : 0.0;
    return out;
}

// Fills a_{-n,k} = (-1)^n conj(a_{n,k}) from the n >= 0 half.
inline DHCoefficients extend_negative(const DHCoefficients& half) {
    DHCoefficients out = half;
    const auto& plan = *half.plan;
    for (size_t j = 0; j < out.values.size(); ++j) {
        const PlanEntry& e = plan.entries[j];
        if (e.n >= 0) continue;
        const int twin = plan.find(-e.n, e.k);
        const std::complex<double> v = std::conj(half.values[static_cast<size_t>(twin)]);
        out.values[j] = ((-e.n) % 2) ? -v : v;
    }
    return out;
}

// Fast backend: bilinear resample to a polar grid, FFT over the angle, then
// per-order trapezoid quadrature against c J_n(lambda r) r. The angular node
// count covers every retained order (max_order can exceed L under the
// area-rule truncation, so 2L nodes would alias the top orders).
class FastDht {
public:
    explicit FastDht(std::shared_ptr<const HarmonicPlan> plan) : plan_(std::move(plan)) {
        n_theta_ = next_pow2(std::max<size_t>(2 * static_cast<size_t>(plan_->L),
                                              2 * static_cast<size_t>(plan_->max_order + 1)));
        n_r_ = static_cast<size_t>(std::max(plan_->L, 32));
        radii_.resize(n_r_);
        weights_.resize(n_r_);
        const double h = 1.0 / static_cast<double>(n_r_ - 1);
        for (size_t i = 0; i < n_r_; ++i) {
            radii_[i] = i * h;
            weights_[i] = (i == 0 || i + 1 == n_r_) ? 0.5 * h : h;
        }
        // radial quadrature table: for entry j, c_j J(lambda_j r_i)
        table_.resize(static_cast<size_t>(plan_->m) * n_r_);
        parallel_for(static_cast<size_t>(plan_->m), [&](size_t j) {
            const PlanEntry& e = plan_->entries[j];
            const int na = std::abs(e.n);
            std::vector<double> tmp;
            for (size_t i = 0; i < n_r_; ++i) {
                detail::bessel_j_all(std::max(na, 1), e.lambda * radii_[i], tmp);
                table_[j * n_r_ + i] = e.c * tmp[static_cast<size_t>(na)];
            }
        });
    }

    DHCoefficients apply(const ImageGrid& image) const {
        if (image.L != plan_->L)
            throw std::invalid_argument("dht_forward_fast: image size != plan size");
        const int Nm = plan_->max_order;

        // F[n][i] = (1/T) sum_t f(r_i, theta_t) e^{-i n theta_t}, n = 0..Nm
        std::vector<std::complex<double>> F(static_cast<size_t>(Nm + 1) * n_r_);
        std::vector<std::complex<double>> ring(n_theta_);
        for (size_t i = 0; i < n_r_; ++i) {
            for (size_t t = 0; t < n_theta_; ++t) {
                const double th = 2.0 * M_PI * static_cast<double>(t) / static_cast<double>(n_theta_);
                ring[t] = sample_bilinear(image, radii_[i] * std::cos(th), radii_[i] * std::sin(th));
            }
            fft_pow2(ring, false);
            for (int n = 0; n <= Nm; ++n)
                F[static_cast<size_t>(n) * n_r_ + i] = ring[static_cast<size_t>(n)] /
                                                       static_cast<double>(n_theta_);
        }

        DHCoefficients out(plan_);
        parallel_for(static_cast<size_t>(plan_->m), [&](size_t j) {
            const PlanEntry& e = plan_->entries[j];
            const int na = std::abs(e.n);
            std::complex<double> acc = 0.0;
            const std::complex<double>* Fn = &F[static_cast<size_t>(na) * n_r_];
            for (size_t i = 0; i < n_r_; ++i) {
                const std::complex<double> g = (e.n >= 0) ? Fn[i] : std::conj(Fn[i]);
                acc += weights_[i] * g * table_[j * n_r_ + i] * radii_[i];
            }
            const double sign = (e.n < 0 && na % 2) ? -1.0 : 1.0;
            out.values[j] = 2.0 * M_PI * sign * acc;
        });
        return out;
    }

private:
    std::shared_ptr<const HarmonicPlan> plan_;
    size_t n_theta_ = 0, n_r_ = 0;
    std::vector<double> radii_, weights_, table_;
};

inline DHCoefficients dht_forward_fast(const ImageGrid& image,
                                       std::shared_ptr<const HarmonicPlan> plan) {
    static std::mutex mu;
    static std::map<uint64_t, std::shared_ptr<const FastDht>> cache;
    std::shared_ptr<const FastDht> op;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[plan->hash()];
        if (!slot) slot = std::make_shared<FastDht>(plan);
        op = slot;
    }
    return op->apply(image);
}

enum class DhtBackend { direct, fast };

inline DHCoefficients dht(const ImageGrid& image, std::shared_ptr<const HarmonicPlan> plan,
                          DhtBackend backend) {
    return backend == DhtBackend::direct ? dht_forward(image, plan)
                                         : dht_forward_fast(image, plan);
}

}  // namespace diskbsp
