#pragma once

// L x L real image on [-1,1]^2 with the implied unit-disk mask.
// Pixel centers: x = -1 + (col+0.5)*dx, y = -1 + (row+0.5)*dx, dx = 2/L.
// Everything outside the open disk r < 1 is treated as zero.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace diskbsp {

struct ImageGrid {
    int L = 0;
    std::vector<double> pixels;     // row-major, size L*L
    std::string provenance;         // set by readers when they adjust the input

    ImageGrid() = default;
    explicit ImageGrid(int side, double fill = 0.0)
        : L(side), pixels(static_cast<size_t>(side) * side, fill) {}

    double& at(int row, int col) { return pixels[static_cast<size_t>(row) * L + col]; }
    double at(int row, int col) const { return pixels[static_cast<size_t>(row) * L + col]; }

    double dx() const { return 2.0 / L; }
    double cx(int col) const { return -1.0 + (col + 0.5) * dx(); }
    double cy(int row) const { return -1.0 + (row + 0.5) * dx(); }

    bool in_disk(int row, int col) const {
        const double x = cx(col), y = cy(row);
        return x * x + y * y < 1.0;
    }

    // Zeroes everything outside the disk.
    void mask() {
        for (int r = 0; r < L; ++r)
            for (int c = 0; c < L; ++c)
                if (!in_disk(r, c)) at(r, c) = 0.0;
    }

    ImageGrid masked() const {
        ImageGrid out = *this;
        out.mask();
        return out;
    }
};

// Value at a continuous point by bilinear interpolation between pixel centers.
// Out-of-disk and out-of-frame contributions are zero.
inline double sample_bilinear(const ImageGrid& img, double x, double y) {
    const double dx = img.dx();
    const double fc = (x + 1.0) / dx - 0.5;  // fractional column
    const double fr = (y + 1.0) / dx - 0.5;
    const int c0 = static_cast<int>(std::floor(fc));
    const int r0 = static_cast<int>(std::floor(fr));
    const double wc = fc - c0, wr = fr - r0;
    double v = 0.0;
    for (int dr = 0; dr <= 1; ++dr) {
        for (int dc = 0; dc <= 1; ++dc) {
            const int r = r0 + dr, c = c0 + dc;
            if (r < 0 || r >= img.L || c < 0 || c >= img.L) continue;
            if (!img.in_disk(r, c)) continue;
            const double w = (dr ? wr : 1.0 - wr) * (dc ? wc : 1.0 - wc);
            v += w * img.at(r, c);
        }
    }
    return v;
}

// Rotates about the image center: out(x) = in(R_phi x), then re-masks.
// Matches the coefficient action a_nk -> e^{i n phi} a_nk.
inline ImageGrid bilinear_rotate(const ImageGrid& img, double phi) {
    if (!std::isfinite(phi)) throw std::invalid_argument("bilinear_rotate: phi must be finite");
    ImageGrid out(img.L);
    const double c = std::cos(phi), s = std::sin(phi);
    for (int row = 0; row < img.L; ++row) {
        for (int col = 0; col < img.L; ++col) {
            if (!out.in_disk(row, col)) continue;
            const double x = out.cx(col), y = out.cy(row);
            out.at(row, col) = sample_bilinear(img, c * x - s * y, s * x + c * y);
        }
    }
    return out;
}

// Mean intensity over the disk.
inline double disk_mean(const ImageGrid& img) {
    double sum = 0.0;
    size_t count = 0;
    for (int r = 0; r < img.L; ++r)
        for (int c = 0; c < img.L; ++c)
            if (img.in_disk(r, c)) {
                sum += img.at(r, c);
                ++count;
            }
    return count ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace diskbsp
