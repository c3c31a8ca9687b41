#ifndef LEAFREC_TEXTURE_HPP
#define LEAFREC_TEXTURE_HPP

#include <array>
#include <utility>
#include <vector>

#include "leafrec/image.hpp"

namespace leafrec {

struct GlcmConfig {
    int levels = 32;
    int distance = 1;
    /// Offsets for 0, 45, 90 and 135 degrees at unit distance; scaled by
    /// `distance` when counting pairs.
    std::vector<std::pair<int, int>> angles = {{1, 0}, {1, -1}, {0, -1}, {-1, -1}};
    bool symmetric = true;
};

/// Normalized co-occurrence matrix: per-angle counts are symmetrized,
/// normalized by their pair count, then averaged over angles.
struct Glcm {
    int levels = 0;
    std::vector<double> p;      // levels x levels, row-major
    std::size_t pair_count = 0;

    double at(int i, int j) const {
        return p[static_cast<std::size_t>(i) * levels + j];
    }
    double& at(int i, int j) {
        return p[static_cast<std::size_t>(i) * levels + j];
    }
};

Glcm compute_glcm(const GrayImage& gray, const BinaryMask& mask,
                  const GlcmConfig& cfg = {});

/// The fourteen features in canonical order plus the marginal
/// intermediates they are built from.
struct HaralickVector {
    std::array<double, 14> f{};
    double mu_x = 0, mu_y = 0, sigma_x = 0, sigma_y = 0;
    double hx = 0, hy = 0, hxy = 0, hxy1 = 0, hxy2 = 0;
    std::vector<double> p_x, p_y;      // marginals, size N
    std::vector<double> p_sum;         // p_{x+y}, index 2..2N stored at [i-2]
    std::vector<double> p_diff;        // p_{x-y}, index 0..N-1
};

HaralickVector haralick_features(const Glcm& g);

}  // namespace leafrec

#endif
