#include "leafrec/signature.hpp"

#include <algorithm>
#include <cmath>

namespace leafrec {

namespace {
constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }
}  // namespace

RadialSignature radial_signature(const Contour& contour, int samples) {
    const auto& pts = contour.points;
    if (pts.size() < 3)
        throw DegenerateInput("radial_signature: contour has fewer than 3 points");
    if (!is_pow2(static_cast<std::size_t>(samples)))
        throw std::invalid_argument("radial_signature: samples must be a power of two");

    RadialSignature sig;
    for (const auto& [x, y] : pts) {
        sig.centroid_x += x;
        sig.centroid_y += y;
    }
    sig.centroid_x /= static_cast<double>(pts.size());
    sig.centroid_y /= static_cast<double>(pts.size());

    const std::size_t c = pts.size();
    std::vector<double> radius(c), arclen(c + 1);
    for (std::size_t t = 0; t < c; ++t) {
        double dx = pts[t].first - sig.centroid_x;
        double dy = pts[t].second - sig.centroid_y;
        radius[t] = std::sqrt(dx * dx + dy * dy);
    }
    arclen[0] = 0;
    for (std::size_t t = 0; t < c; ++t) {
        const auto& a = pts[t];
        const auto& b = pts[(t + 1) % c];
        double dx = a.first - b.first, dy = a.second - b.second;
        arclen[t + 1] = arclen[t] + std::sqrt(double(dx * dx + dy * dy));
    }
    const double total = arclen[c];
    if (total <= 0) throw DegenerateInput("radial_signature: zero-length contour");

    // Uniform arc-length resampling with linear interpolation; r wraps.
    sig.r.resize(samples);
    std::size_t seg = 0;
    for (int m = 0; m < samples; ++m) {
        double s = total * m / samples;
        while (seg + 1 < c && arclen[seg + 1] <= s) ++seg;
        double segLen = arclen[seg + 1] - arclen[seg];
        double frac = segLen > 0 ? (s - arclen[seg]) / segLen : 0.0;
        double r0 = radius[seg];
        double r1 = radius[(seg + 1) % c];
        sig.r[m] = r0 + frac * (r1 - r0);
    }
    return sig;
}

std::vector<std::complex<double>> fft(std::vector<std::complex<double>> x) {
    const std::size_t n = x.size();
    if (!is_pow2(n)) throw std::invalid_argument("fft: length must be a power of two");

    // Bit reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = -2.0 * kPi / static_cast<double>(len);
        std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                auto u = x[i + k];
                auto v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    return x;
}

std::vector<std::complex<double>> fft(const std::vector<double>& x) {
    std::vector<std::complex<double>> c(x.begin(), x.end());
    return fft(std::move(c));
}

std::vector<std::complex<double>> ifft(std::vector<std::complex<double>> x) {
    for (auto& v : x) v = std::conj(v);
    auto y = fft(std::move(x));
    const double n = static_cast<double>(y.size());
    for (auto& v : y) v = std::conj(v) / n;
    return y;
}

std::vector<double> fourier_descriptors(const Contour& contour, int k, int samples) {
    if (k < 1 || k >= samples / 2)
        throw std::invalid_argument("fourier_descriptors: need 1 <= k < samples/2");
    RadialSignature sig = radial_signature(contour, samples);
    auto spec = fft(sig.r);
    double dc = std::abs(spec[0]);
    if (dc <= 0)
        throw DegenerateInput("fourier_descriptors: zero DC magnitude");
    std::vector<double> out(k);
    for (int i = 1; i <= k; ++i) out[i - 1] = std::abs(spec[i]) / dc;
    return out;
}

std::array<double, 60> xy_projection(const BinaryMask& mask) {
    if (mask.count() == 0) throw DegenerateInput("xy_projection: empty mask");
    constexpr int kBins = 30;
    std::array<double, 60> out{};

    auto strip = [](int bin, int extent) {
        int a = bin * extent / kBins;
        int b = std::max(a + 1, (bin + 1) * extent / kBins);
        return std::pair<int, int>{std::min(a, extent - 1), std::min(b, extent)};
    };

    for (int bin = 0; bin < kBins; ++bin) {
        auto [x0, x1] = strip(bin, mask.width);
        std::size_t fg = 0, total = 0;
        for (int x = x0; x < x1; ++x)
            for (int y = 0; y < mask.height; ++y) {
                fg += mask.at(x, y);
                ++total;
            }
        out[bin] = static_cast<double>(fg) / static_cast<double>(total);
    }
    for (int bin = 0; bin < kBins; ++bin) {
        auto [y0, y1] = strip(bin, mask.height);
        std::size_t fg = 0, total = 0;
        for (int y = y0; y < y1; ++y)
            for (int x = 0; x < mask.width; ++x) {
                fg += mask.at(x, y);
                ++total;
            }
        out[kBins + bin] = static_cast<double>(fg) / static_cast<double>(total);
    }
    return out;
}

}  // namespace leafrec
