#ifndef LEAFREC_COLOR_HPP
#define LEAFREC_COLOR_HPP

#include <array>
#include <span>
#include <vector>

#include "leafrec/image.hpp"

namespace leafrec {

/// Real-valued 3-plane image used for HSV / HSL conversions.
/// Hue is in degrees [0,360); the other channels are in [0,1].
struct PlanarImageF {
    int width = 0;
    int height = 0;
    std::array<std::vector<double>, 3> plane;

    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * width + x;
    }
};

enum class ColorSpaceTarget { HSV, HSL };

std::array<double, 3> rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);
std::array<double, 3> rgb_to_hsl(std::uint8_t r, std::uint8_t g, std::uint8_t b);

PlanarImageF convert_color_space(const RasterImage& img, ColorSpaceTarget target);

struct ChannelStats {
    double mean = 0;
    double variance = 0;
    double skewness = 0;
    double kurtosis = 0;  // excess kurtosis
};

/// Population statistics; skewness and kurtosis are defined as 0 for
/// constant input.
ChannelStats channel_stats(std::span<const double> values);

/// 36 values ordered (RGB, HSV, HSL) x channel x (mean, var, skew, kurt),
/// over foreground pixels only. RGB channels keep their 0..255 range.
std::array<double, 36> color_features(const RasterImage& img, const BinaryMask& mask);

}  // namespace leafrec

#endif
