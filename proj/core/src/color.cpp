#include "leafrec/color.hpp"

#include <algorithm>
#include <cmath>

namespace leafrec {

namespace {

double hue_of(double r, double g, double b, double maxc, double delta) {
    if (delta == 0) return 0.0;
    double h;
    if (maxc == r)
        h = 60.0 * std::fmod((g - b) / delta, 6.0);
    else if (maxc == g)
        h = 60.0 * ((b - r) / delta + 2.0);
    else
        h = 60.0 * ((r - g) / delta + 4.0);
    if (h < 0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    return h;
}

}  // namespace

std::array<double, 3> rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
    double maxc = std::max({r, g, b}), minc = std::min({r, g, b});
    double delta = maxc - minc;
    double s = maxc == 0 ? 0.0 : delta / maxc;
    return {hue_of(r, g, b, maxc, delta), s, maxc};
}

std::array<double, 3> rgb_to_hsl(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
    double maxc = std::max({r, g, b}), minc = std::min({r, g, b});
    double delta = maxc - minc;
    double l = (maxc + minc) / 2.0;
    double s = 0.0;
    if (delta > 0) s = delta / (1.0 - std::abs(2.0 * l - 1.0));
    return {hue_of(r, g, b, maxc, delta), s, l};
}

PlanarImageF convert_color_space(const RasterImage& img, ColorSpaceTarget target) {
    PlanarImageF out;
    out.width = img.width;
    out.height = img.height;
    for (auto& p : out.plane) p.resize(img.pixels());
    for (std::size_t i = 0; i < img.pixels(); ++i) {
        std::array<double, 3> c = target == ColorSpaceTarget::HSV
                                      ? rgb_to_hsv(img.r[i], img.g[i], img.b[i])
                                      : rgb_to_hsl(img.r[i], img.g[i], img.b[i]);
        out.plane[0][i] = c[0];
        out.plane[1][i] = c[1];
        out.plane[2][i] = c[2];
    }
    return out;
}

ChannelStats channel_stats(std::span<const double> values) {
    if (values.empty()) throw DegenerateInput("channel_stats: empty input");
    const double n = static_cast<double>(values.size());

    ChannelStats s;
    for (double v : values) s.mean += v;
    s.mean /= n;
    for (double v : values) s.variance += (v - s.mean) * (v - s.mean);
    s.variance /= n;

    // Variance at rounding-noise level means the channel is constant;
    // standardized moments would amplify the noise into garbage.
    double scale2 = 1.0;
    for (double v : values) scale2 = std::max(scale2, v * v);
    if (s.variance <= 1e-24 * scale2) {
        s.variance = 0.0;
        return s;
    }

    double sigma = std::sqrt(s.variance);
    if (sigma > 0) {
        double m3 = 0, m4 = 0;
        for (double v : values) {
            double z = (v - s.mean) / sigma;
            m3 += z * z * z;
            m4 += z * z * z * z;
        }
        s.skewness = m3 / n;
        s.kurtosis = m4 / n - 3.0;
    }
    return s;
}

std::array<double, 36> color_features(const RasterImage& img, const BinaryMask& mask) {
    if (img.width != mask.width || img.height != mask.height)
        throw std::invalid_argument("color_features: image/mask size mismatch");
    if (mask.count() == 0) throw DegenerateInput("color_features: empty mask");

    std::array<std::vector<double>, 9> chan;  // R,G,B,H,S,V,Hl,Sl,L
    for (std::size_t i = 0; i < img.pixels(); ++i) {
        if (!mask.v[i]) continue;
        chan[0].push_back(img.r[i]);
        chan[1].push_back(img.g[i]);
        chan[2].push_back(img.b[i]);
        auto hsv = rgb_to_hsv(img.r[i], img.g[i], img.b[i]);
        auto hsl = rgb_to_hsl(img.r[i], img.g[i], img.b[i]);
        for (int k = 0; k < 3; ++k) {
            chan[3 + k].push_back(hsv[k]);
            chan[6 + k].push_back(hsl[k]);
        }
    }

    std::array<double, 36> out{};
    for (int c = 0; c < 9; ++c) {
        ChannelStats s = channel_stats(chan[c]);
        out[c * 4 + 0] = s.mean;
        out[c * 4 + 1] = s.variance;
        out[c * 4 + 2] = s.skewness;
        out[c * 4 + 3] = s.kurtosis;
    }
    return out;
}

}  // namespace leafrec
