#ifndef LEAFREC_GEOMETRY_HPP
#define LEAFREC_GEOMETRY_HPP

#include <array>
#include <utility>
#include <vector>

#include "leafrec/image.hpp"

namespace leafrec {

/// Closed outer boundary of a foreground component; consecutive points are
/// 8-neighbors, clockwise in image coordinates (y grows downward).
struct Contour {
    std::vector<std::pair<int, int>> points;  // (x, y)
    bool closed = true;
};

struct PrincipalAxes {
    double angle = 0.0;   // first eigenvector direction, in (-pi/2, pi/2]
    double major = 0.0;   // larger eigenvalue of the coordinate covariance
    double minor = 0.0;   // smaller eigenvalue
};

/// PCA over foreground pixel coordinates. Throws DegenerateInput for
/// fewer than 2 foreground pixels.
PrincipalAxes principal_axes(const BinaryMask& mask);
double principal_axis(const BinaryMask& mask);

struct AlignResult {
    RasterImage image;
    BinaryMask mask;
    bool rotated = false;
};

/// Rotate so the major axis is vertical; skipped when the eigenvalue
/// ratio is below `gate` (near-isotropic shapes). Rotation about the
/// foreground centroid, canvas enlarged to avoid clipping; bilinear for
/// the image, nearest-neighbor for the mask.
AlignResult align_upright(const RasterImage& img, const BinaryMask& mask,
                          double gate = 1.2);

/// Moore-neighbor boundary following with Jacob's stopping criterion.
Contour trace_contour(const BinaryMask& mask);

struct GeometricFeatures {
    double length = 0;     // L_p: vertical extent, pixels
    double width = 0;      // W_p: horizontal extent, pixels
    double area = 0;       // A: foreground pixel count
    double perimeter = 0;  // P: chain length, 1 per axial step, sqrt(2) diagonal
    double diameter = 0;   // D = sqrt(4A/pi)
};

GeometricFeatures geometric_features(const BinaryMask& mask, const Contour& contour);

/// [L/W, 4*pi*A/P^2, L*W/A, D/L, P/D, P/(L+W)]
std::array<double, 6> morphological_features(const GeometricFeatures& g);

/// 10 spatial moments (M00,M01,M02,M03,M10,M11,M12,M20,M21,M30),
/// 7 central (mu02,mu03,mu11,mu12,mu20,mu21,mu30) and the 7 matching
/// normalized central moments. Intensities are scaled to [0,1] and the
/// background is zeroed before summation.
std::array<double, 24> moment_features(const GrayImage& gray, const BinaryMask& mask);

/// The 35-entry shape vector: [L,W,A,P,D] + 6 morphological + 24 moments.
std::array<double, 35> shape_vector(const GrayImage& gray, const BinaryMask& mask,
                                    const Contour& contour);

}  // namespace leafrec

#endif
