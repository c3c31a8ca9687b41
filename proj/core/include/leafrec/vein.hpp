#ifndef LEAFREC_VEIN_HPP
#define LEAFREC_VEIN_HPP

#include <array>

#include "leafrec/image.hpp"

namespace leafrec {

enum class MorphOp { Erode, Dilate };

/// Separable Gaussian smoothing with edge replication. sigma <= 0 derives
/// it from the kernel size as 0.3*((ksize-1)/2 - 1) + 0.8.
ImageF gaussian_blur(const GrayImage& gray, int ksize = 25, double sigma = -1.0);
ImageF gaussian_blur(const ImageF& img, int ksize = 25, double sigma = -1.0);

/// Grayscale min/max filter over the disk {(dx,dy): dx^2+dy^2 <= r^2},
/// edge replication at borders.
ImageF morph(const ImageF& img, MorphOp op, int radius);

/// Disk offsets used by morph (exposed for tests).
std::vector<std::pair<int, int>> disk_offsets(int radius);

/// Opening = dilate(erode(x, r), r).
ImageF morph_open(const ImageF& img, int radius);

/// Per radius r in 1..4: |open(blur(gray), r) - blur(gray)| with the
/// background zeroed; `fused` is the pixelwise max of the four planes.
struct VeinStack {
    std::array<ImageF, 4> plane;
    ImageF fused;
};

VeinStack extract_vein(const GrayImage& gray, const BinaryMask& mask,
                       int blur_ksize = 25);

}  // namespace leafrec

#endif
