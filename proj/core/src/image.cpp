#include "leafrec/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <queue>

namespace leafrec {

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(v.begin(), v.end(), 1));
}

GrayImage to_grayscale(const RasterImage& img) {
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels(); ++i) {
        double g = 0.2989 * img.r[i] + 0.5870 * img.g[i] + 0.1140 * img.b[i];
        out.v[i] = static_cast<std::uint8_t>(std::clamp(std::lround(g), 0L, 255L));
    }
    return out;
}

int otsu_threshold(const GrayImage& gray) {
    std::array<std::size_t, 256> hist{};
    for (std::uint8_t p : gray.v) hist[p]++;
    int occupied = 0;
    for (auto h : hist) occupied += h > 0;
    if (occupied < 2)
        throw DegenerateInput("otsu_threshold: single-intensity image");

    const double total = static_cast<double>(gray.v.size());
    double sumAll = 0;
    for (int i = 0; i < 256; ++i) sumAll += i * static_cast<double>(hist[i]);

    double sumB = 0, wB = 0, bestVar = -1.0;
    int best = 0;
    for (int t = 0; t < 255; ++t) {
        wB += static_cast<double>(hist[t]);
        if (wB == 0) continue;
        double wF = total - wB;
        if (wF == 0) break;
        sumB += t * static_cast<double>(hist[t]);
        double mB = sumB / wB;
        double mF = (sumAll - sumB) / wF;
        double var = wB * wF * (mB - mF) * (mB - mF);
        if (var > bestVar) {
            bestVar = var;
            best = t;
        }
    }
    return best;
}

BinaryMask largest_component(const BinaryMask& mask) {
    const int w = mask.width, h = mask.height;
    std::vector<int> label(mask.v.size(), -1);
    int nLabels = 0;
    std::size_t bestSize = 0;
    int bestLabel = -1;
    std::vector<std::size_t> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::size_t i = mask.idx(x, y);
            if (mask.v[i] != 1 || label[i] >= 0) continue;
            int cur = nLabels++;
            std::size_t size = 0;
            stack.push_back(i);
            label[i] = cur;
            while (!stack.empty()) {
                std::size_t p = stack.back();
                stack.pop_back();
                ++size;
                int px = static_cast<int>(p % w), py = static_cast<int>(p / w);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = px + dx, ny = py + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        std::size_t n = mask.idx(nx, ny);
                        if (mask.v[n] == 1 && label[n] < 0) {
                            label[n] = cur;
                            stack.push_back(n);
                        }
                    }
                }
            }
            if (size > bestSize) {
                bestSize = size;
                bestLabel = cur;
            }
        }
    }
    BinaryMask out(w, h, 0);
    if (bestLabel >= 0)
        for (std::size_t i = 0; i < out.v.size(); ++i)
            out.v[i] = label[i] == bestLabel ? 1 : 0;
    return out;
}

BinaryMask binarize(const GrayImage& gray) {
    int t = otsu_threshold(gray);
    BinaryMask mask(gray.width, gray.height, 0);
    for (std::size_t i = 0; i < gray.v.size(); ++i)
        mask.v[i] = gray.v[i] <= t ? 1 : 0;

    // Leaf is dark on a light background; flip if thresholding picked the
    // brighter side as foreground.
    double fgSum = 0, bgSum = 0;
    std::size_t fgN = 0, bgN = 0;
    for (std::size_t i = 0; i < gray.v.size(); ++i) {
        if (mask.v[i]) {
            fgSum += gray.v[i];
            ++fgN;
        } else {
            bgSum += gray.v[i];
            ++bgN;
        }
    }
    if (fgN > 0 && bgN > 0 && fgSum / fgN > bgSum / bgN)
        for (auto& p : mask.v) p ^= 1;

    return largest_component(mask);
}

BBox content_bbox(const BinaryMask& mask) {
    int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
    if (x1 < 0) throw DegenerateInput("content_bbox: empty foreground");
    return BBox{x0, y0, x1 + 1, y1 + 1};
}

CropResult crop_to_content(const RasterImage& img, const BinaryMask& mask) {
    BBox bb = content_bbox(mask);
    RasterImage ci(bb.width(), bb.height());
    BinaryMask cm(bb.width(), bb.height());
    for (int y = 0; y < bb.height(); ++y) {
        for (int x = 0; x < bb.width(); ++x) {
            std::size_t s = img.idx(bb.x0 + x, bb.y0 + y);
            std::size_t d = ci.idx(x, y);
            ci.r[d] = img.r[s];
            ci.g[d] = img.g[s];
            ci.b[d] = img.b[s];
            cm.v[d] = mask.v[s];
        }
    }
    return {std::move(ci), std::move(cm)};
}

namespace {

// Bilinear sample with the half-pixel-center mapping; clamped at borders.
template <typename Plane, typename Fetch>
double sample_bilinear(const Plane& img, Fetch fetch, double sx, double sy) {
    sx = std::clamp(sx, 0.0, static_cast<double>(img.width - 1));
    sy = std::clamp(sy, 0.0, static_cast<double>(img.height - 1));
    int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
    int x1 = std::min(x0 + 1, img.width - 1);
    int y1 = std::min(y0 + 1, img.height - 1);
    double fx = sx - x0, fy = sy - y0;
    double top = fetch(x0, y0) * (1 - fx) + fetch(x1, y0) * fx;
    double bot = fetch(x0, y1) * (1 - fx) + fetch(x1, y1) * fx;
    return top * (1 - fy) + bot * fy;
}

double src_coord(int dst, double scale) { return (dst + 0.5) / scale - 0.5; }

}  // namespace

RasterImage resize_bilinear(const RasterImage& img, int w, int h) {
    RasterImage out(w, h);
    double sx = static_cast<double>(w) / img.width;
    double sy = static_cast<double>(h) / img.height;
    for (int y = 0; y < h; ++y) {
        double cy = src_coord(y, sy);
        for (int x = 0; x < w; ++x) {
            double cx = src_coord(x, sx);
            std::size_t d = out.idx(x, y);
            auto fr = [&](int a, int b) { return double(img.r[img.idx(a, b)]); };
            auto fg = [&](int a, int b) { return double(img.g[img.idx(a, b)]); };
            auto fb = [&](int a, int b) { return double(img.b[img.idx(a, b)]); };
            out.r[d] = static_cast<std::uint8_t>(std::lround(sample_bilinear(img, fr, cx, cy)));
            out.g[d] = static_cast<std::uint8_t>(std::lround(sample_bilinear(img, fg, cx, cy)));
            out.b[d] = static_cast<std::uint8_t>(std::lround(sample_bilinear(img, fb, cx, cy)));
        }
    }
    return out;
}

GrayImage resize_bilinear(const GrayImage& img, int w, int h) {
    GrayImage out(w, h);
    double sx = static_cast<double>(w) / img.width;
    double sy = static_cast<double>(h) / img.height;
    auto f = [&](int a, int b) { return double(img.v[img.idx(a, b)]); };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.v[out.idx(x, y)] = static_cast<std::uint8_t>(std::lround(
                sample_bilinear(img, f, src_coord(x, sx), src_coord(y, sy))));
    return out;
}

ImageF resize_bilinear(const ImageF& img, int w, int h) {
    ImageF out(w, h);
    double sx = static_cast<double>(w) / img.width;
    double sy = static_cast<double>(h) / img.height;
    auto f = [&](int a, int b) { return img.v[img.idx(a, b)]; };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.v[out.idx(x, y)] =
                sample_bilinear(img, f, src_coord(x, sx), src_coord(y, sy));
    return out;
}

RasterImage resize(const RasterImage& img, int side) {
    if (side < 1) throw std::invalid_argument("resize: side must be >= 1");
    if (img.width == side && img.height == side) return img;
    double scale = static_cast<double>(side) / std::max(img.width, img.height);
    int nw = std::max(1, static_cast<int>(std::lround(img.width * scale)));
    int nh = std::max(1, static_cast<int>(std::lround(img.height * scale)));
    RasterImage scaled = resize_bilinear(img, nw, nh);
    RasterImage out(side, side, 255, 255, 255);
    int ox = (side - nw) / 2, oy = (side - nh) / 2;
    for (int y = 0; y < nh; ++y)
        for (int x = 0; x < nw; ++x) {
            std::size_t d = out.idx(ox + x, oy + y), s = scaled.idx(x, y);
            out.r[d] = scaled.r[s];
            out.g[d] = scaled.g[s];
            out.b[d] = scaled.b[s];
        }
    return out;
}

BinaryMask resize_mask(const BinaryMask& mask, int side) {
    if (side < 1) throw std::invalid_argument("resize_mask: side must be >= 1");
    double scale = static_cast<double>(side) / std::max(mask.width, mask.height);
    int nw = std::max(1, static_cast<int>(std::lround(mask.width * scale)));
    int nh = std::max(1, static_cast<int>(std::lround(mask.height * scale)));
    BinaryMask out(side, side, 0);
    int ox = (side - nw) / 2, oy = (side - nh) / 2;
    for (int y = 0; y < nh; ++y) {
        int sy = std::clamp(static_cast<int>((y + 0.5) / scale), 0, mask.height - 1);
        for (int x = 0; x < nw; ++x) {
            int sx = std::clamp(static_cast<int>((x + 0.5) / scale), 0, mask.width - 1);
            out.v[out.idx(ox + x, oy + y)] = mask.at(sx, sy);
        }
    }
    return out;
}

}  // namespace leafrec
