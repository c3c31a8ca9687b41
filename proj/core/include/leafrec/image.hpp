#ifndef LEAFREC_IMAGE_HPP
#define LEAFREC_IMAGE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace leafrec {

struct ImageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 8-bit color image stored as three planes in R,G,B order.
struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> r, g, b;

    RasterImage() = default;
    RasterImage(int w, int h, std::uint8_t fr = 255, std::uint8_t fg = 255,
                std::uint8_t fb = 255)
        : width(w), height(h),
          r(static_cast<std::size_t>(w) * h, fr),
          g(static_cast<std::size_t>(w) * h, fg),
          b(static_cast<std::size_t>(w) * h, fb) {}

    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * width + x;
    }
    std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
};

/// Single-plane 8-bit intensity image.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> v;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), v(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * width + x;
    }
    std::uint8_t at(int x, int y) const { return v[idx(x, y)]; }
    std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
};

/// Foreground mask; values are strictly 0 or 1, foreground (1) = leaf.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> v;

    BinaryMask() = default;
    BinaryMask(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), v(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * width + x;
    }
    std::uint8_t at(int x, int y) const { return v[idx(x, y)]; }
    std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
    std::size_t count() const;
};

/// Single-plane real-valued image, used where 8-bit rounding would lose
/// information (Gaussian smoothing, vein response maps).
struct ImageF {
    int width = 0;
    int height = 0;
    std::vector<double> v;

    ImageF() = default;
    ImageF(int w, int h, double fill = 0.0)
        : width(w), height(h), v(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * width + x;
    }
    double at(int x, int y) const { return v[idx(x, y)]; }
};

// --- decoding / encoding (PNG and JPEG) ---

RasterImage load_image(const std::string& path);
void save_png(const RasterImage& img, const std::string& path);
void save_png(const GrayImage& img, const std::string& path);

// --- pixel-level operations ---

/// gray = round(0.2989 R + 0.5870 G + 0.1140 B), clamped to [0,255].
GrayImage to_grayscale(const RasterImage& img);

/// Otsu threshold; dark pixels become foreground; only the largest
/// 8-connected component is kept. Throws DegenerateInput when the
/// histogram has a single occupied bin.
BinaryMask binarize(const GrayImage& gray);

/// Otsu threshold over the 256-bin histogram (exposed for tests).
int otsu_threshold(const GrayImage& gray);

/// Keep only the largest 8-connected foreground component.
BinaryMask largest_component(const BinaryMask& mask);

struct CropResult {
    RasterImage image;
    BinaryMask mask;
};

/// Tight bounding box of the mask foreground applied to both inputs.
CropResult crop_to_content(const RasterImage& img, const BinaryMask& mask);

struct BBox {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open [x0,x1) x [y0,y1)
    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
};
BBox content_bbox(const BinaryMask& mask);

/// Aspect-preserving resize onto a side x side canvas; the longer
/// dimension is scaled to `side`, the shorter padded with white,
/// padding centered. Bilinear interpolation.
RasterImage resize(const RasterImage& img, int side);
BinaryMask resize_mask(const BinaryMask& mask, int side);

/// Plain bilinear resize to an arbitrary target size (no padding).
RasterImage resize_bilinear(const RasterImage& img, int w, int h);
GrayImage resize_bilinear(const GrayImage& img, int w, int h);
ImageF resize_bilinear(const ImageF& img, int w, int h);

}  // namespace leafrec

#endif
