#include "leafrec/vein.hpp"

#include <algorithm>
#include <cmath>

namespace leafrec {

namespace {

std::vector<double> gaussian_kernel(int ksize, double sigma) {
    if (ksize < 1 || ksize % 2 == 0)
        throw std::invalid_argument("gaussian_blur: kernel size must be odd");
    if (sigma <= 0) sigma = 0.3 * ((ksize - 1) / 2.0 - 1.0) + 0.8;
    std::vector<double> k(ksize);
    int half = ksize / 2;
    double sum = 0;
    for (int i = 0; i < ksize; ++i) {
        double d = i - half;
        k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (auto& v : k) v /= sum;
    return k;
}

ImageF convolve_separable(const ImageF& img, const std::vector<double>& k) {
    const int half = static_cast<int>(k.size()) / 2;
    ImageF tmp(img.width, img.height), out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0;
            for (int t = -half; t <= half; ++t) {
                int sx = std::clamp(x + t, 0, img.width - 1);
                acc += k[t + half] * img.at(sx, y);
            }
            tmp.v[tmp.idx(x, y)] = acc;
        }
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0;
            for (int t = -half; t <= half; ++t) {
                int sy = std::clamp(y + t, 0, img.height - 1);
                acc += k[t + half] * tmp.at(x, sy);
            }
            out.v[out.idx(x, y)] = acc;
        }
    return out;
}

}  // namespace

ImageF gaussian_blur(const ImageF& img, int ksize, double sigma) {
    return convolve_separable(img, gaussian_kernel(ksize, sigma));
}

ImageF gaussian_blur(const GrayImage& gray, int ksize, double sigma) {
    ImageF f(gray.width, gray.height);
    for (std::size_t i = 0; i < gray.v.size(); ++i) f.v[i] = gray.v[i];
    return gaussian_blur(f, ksize, sigma);
}

std::vector<std::pair<int, int>> disk_offsets(int radius) {
    if (radius < 1 || radius > 4)
        throw std::invalid_argument("morph: radius must be in 1..4");
    std::vector<std::pair<int, int>> off;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius) off.emplace_back(dx, dy);
    return off;
}

ImageF morph(const ImageF& img, MorphOp op, int radius) {
    auto off = disk_offsets(radius);
    ImageF out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double best = op == MorphOp::Erode ? 1e300 : -1e300;
            for (auto [dx, dy] : off) {
                int sx = std::clamp(x + dx, 0, img.width - 1);
                int sy = std::clamp(y + dy, 0, img.height - 1);
                double v = img.at(sx, sy);
                best = op == MorphOp::Erode ? std::min(best, v) : std::max(best, v);
            }
            out.v[out.idx(x, y)] = best;
        }
    return out;
}

ImageF morph_open(const ImageF& img, int radius) {
    return morph(morph(img, MorphOp::Erode, radius), MorphOp::Dilate, radius);
}

VeinStack extract_vein(const GrayImage& gray, const BinaryMask& mask,
                       int blur_ksize) {
    if (gray.width != mask.width || gray.height != mask.height)
        throw std::invalid_argument("extract_vein: image/mask size mismatch");
    if (mask.count() == 0) throw DegenerateInput("extract_vein: empty mask");

    ImageF smooth = gaussian_blur(gray, blur_ksize);
    VeinStack stack;
    stack.fused = ImageF(gray.width, gray.height, 0.0);
    for (int r = 1; r <= 4; ++r) {
        ImageF opened = morph_open(smooth, r);
        ImageF plane(gray.width, gray.height, 0.0);
        for (std::size_t i = 0; i < plane.v.size(); ++i) {
            if (!mask.v[i]) continue;
            double d = std::clamp(std::abs(opened.v[i] - smooth.v[i]), 0.0, 255.0);
            plane.v[i] = d;
            stack.fused.v[i] = std::max(stack.fused.v[i], d);
        }
        stack.plane[r - 1] = std::move(plane);
    }
    return stack;
}

}  // namespace leafrec
