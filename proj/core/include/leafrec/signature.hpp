#ifndef LEAFREC_SIGNATURE_HPP
#define LEAFREC_SIGNATURE_HPP

#include <array>
#include <complex>
#include <vector>

#include "leafrec/geometry.hpp"
#include "leafrec/image.hpp"

namespace leafrec {

/// Centroid-distance signature resampled uniformly in arc length.
struct RadialSignature {
    std::vector<double> r;  // M samples, M a power of two
    double centroid_x = 0;
    double centroid_y = 0;
};

RadialSignature radial_signature(const Contour& contour, int samples = 128);

/// Radix-2 decimation-in-time transform, unnormalized forward convention
/// X_k = sum_n x_n e^{-2 pi i k n / M}. M must be a power of two.
std::vector<std::complex<double>> fft(const std::vector<double>& x);
std::vector<std::complex<double>> fft(std::vector<std::complex<double>> x);

/// Inverse transform (provided for tests).
std::vector<std::complex<double>> ifft(std::vector<std::complex<double>> x);

/// Magnitudes |F(1)|..|F(k)| of the resampled signature, divided by |F(0)|.
std::vector<double> fourier_descriptors(const Contour& contour, int k = 16,
                                        int samples = 128);

/// 30 vertical (per-column-strip) then 30 horizontal (per-row-strip)
/// foreground fractions of the rotated, cropped mask.
std::array<double, 60> xy_projection(const BinaryMask& mask);

}  // namespace leafrec

#endif
