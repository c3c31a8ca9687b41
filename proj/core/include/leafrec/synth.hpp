#ifndef LEAFREC_SYNTH_HPP
#define LEAFREC_SYNTH_HPP

#include <cstdint>
#include <string>

#include "leafrec/image.hpp"

namespace leafrec {

inline constexpr int kSynthClasses = 8;
inline constexpr int kSynthCanvas = 256;

struct SynthSample {
    RasterImage image;
    int label = 0;
    double scale = 1.0;     // applied jitter, for the analytic-area check
    double rotation = 0.0;  // radians
};

/// Renders one leaf of the given class on a white canvas. Classes differ
/// in blade shape, serration, hue, vein pattern and surface noise, with
/// per-sample jitter on rotation (+-40 deg), scale (+-20%), hue and noise.
///
/// Classes 0 and 1 share everything except hue (at matched luma), and
/// classes 2 and 3 differ only in vein branch angle — deliberate
/// near-collisions so that no single feature family separates all classes.
SynthSample synth_leaf(int class_id, std::uint64_t seed);

/// Analytic blade area of the class's radial shape at the given scale,
/// before rasterization.
double synth_shape_area(int class_id, double scale);

/// Writes `per_class` PNGs per class under dir/class_k/, seeded.
void generate_synth_dataset(const std::string& dir, int per_class = 40,
                            std::uint64_t seed = 1);

}  // namespace leafrec

#endif
