#include "leafrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fs = std::filesystem;

namespace leafrec {

namespace {

struct ClassSpec {
    double ecc;        // elongation term e in r = R(1 + e cos 2t + A sin Ft)
    double serr_amp;   // A
    int serr_freq;     // F
    double radius;     // R, pixels on the 256 canvas
    std::uint8_t cr, cg, cb;
    int vein_pairs;
    double vein_angle;  // radians from the midrib
    double vein_width;  // half-width, pixels
    double vein_delta;  // darkening
    double noise_sigma;
};

// Classes 0/1 share geometry, veins and luma (0.2989*70+0.587*150+0.114*80
// = 118.09 vs 0.2989*150+0.587*107+0.114*92 = 118.13) and differ only in
// hue; classes 2/3 differ only in vein branch angle. Everything else is
// pairwise distinct.
const ClassSpec kClasses[kSynthClasses] = {
    {0.45, 0.06, 12, 62, 70, 150, 80, 4, 0.87, 1.2, 45, 6},
    {0.45, 0.06, 12, 62, 150, 107, 92, 4, 0.87, 1.2, 45, 6},
    {0.25, 0.05, 9, 66, 60, 160, 90, 5, 0.61, 1.0, 30, 6},
    {0.25, 0.05, 9, 66, 60, 160, 90, 5, 1.08, 1.0, 30, 6},
    {0.65, 0.08, 16, 58, 90, 140, 60, 7, 0.79, 1.5, 50, 6},
    {0.10, 0.12, 5, 60, 50, 130, 110, 3, 1.22, 2.0, 55, 6},
    {0.35, 0.10, 20, 64, 110, 160, 70, 6, 0.52, 1.0, 40, 9},
    {0.50, 0.03, 7, 66, 80, 120, 50, 2, 0.96, 2.5, 60, 4},
};

double shape_radius(const ClassSpec& c, double theta) {
    return c.radius * (1.0 + c.ecc * std::cos(2 * theta) +
                       c.serr_amp * std::sin(c.serr_freq * theta));
}

double point_segment_dist(double px, double py, double ax, double ay, double bx,
                          double by) {
    double dx = bx - ax, dy = by - ay;
    double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    double qx = ax + t * dx, qy = ay + t * dy;
    return std::hypot(px - qx, py - qy);
}

/// Distance from a canonical-frame point to the nearest vein stroke.
double vein_distance(const ClassSpec& c, double u, double v) {
    double half_len = 0.85 * c.radius * (1.0 + c.ecc);
    double d = point_segment_dist(u, v, -half_len, 0, half_len, 0);  // midrib
    for (int i = 1; i <= c.vein_pairs; ++i) {
        double ui = -0.8 * half_len +
                    1.6 * half_len * i / (c.vein_pairs + 1.0);
        double blen = 0.7 * c.radius * (1.0 - 0.5 * std::abs(ui) / half_len);
        double bx = std::cos(c.vein_angle) * blen;
        double by = std::sin(c.vein_angle) * blen;
        d = std::min(d, point_segment_dist(u, v, ui, 0, ui + bx, by));
        d = std::min(d, point_segment_dist(u, v, ui, 0, ui + bx, -by));
    }
    return d;
}

}  // namespace

double synth_shape_area(int class_id, double scale) {
    if (class_id < 0 || class_id >= kSynthClasses)
        throw std::invalid_argument("synth: class id out of range");
    const ClassSpec& c = kClasses[class_id];
    // 1/2 * integral of r(t)^2 dt; the cos/sin cross terms vanish.
    return std::numbers::pi * c.radius * c.radius * scale * scale *
           (1.0 + c.ecc * c.ecc / 2.0 + c.serr_amp * c.serr_amp / 2.0);
}

SynthSample synth_leaf(int class_id, std::uint64_t seed) {
    if (class_id < 0 || class_id >= kSynthClasses)
        throw std::invalid_argument("synth: class id out of range");
    const ClassSpec& c = kClasses[class_id];

    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull +
                        static_cast<std::uint64_t>(class_id) + 1);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    SynthSample s;
    s.label = class_id;
    s.rotation = (uni(rng) * 2 - 1) * (40.0 * std::numbers::pi / 180.0);
    s.scale = 1.0 + (uni(rng) * 2 - 1) * 0.2;
    // Hue jitter along a luma-neutral direction so the grayscale image
    // statistics stay class-stable (and identical for classes 0/1).
    double hue_t = (uni(rng) * 2 - 1) * 12.0;
    double base_r = c.cr - 0.587 * hue_t * 1.518;
    double base_g = c.cg + 0.2989 * hue_t * 1.518;
    double base_b = static_cast<double>(c.cb);
    double delta = c.vein_delta * (1.0 + (uni(rng) * 2 - 1) * 0.15);

    std::normal_distribution<double> noise(0.0, c.noise_sigma);

    const int n = kSynthCanvas;
    const double cx = n / 2.0, cy = n / 2.0;
    const double cosr = std::cos(-s.rotation), sinr = std::sin(-s.rotation);
    s.image = RasterImage(n, n);  // white

    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            // 2x2 supersampled coverage for a smooth margin.
            double cover = 0;
            double uc = 0, vc = 0;
            for (int sy = 0; sy < 2; ++sy)
                for (int sx = 0; sx < 2; ++sx) {
                    double px = x + 0.25 + 0.5 * sx - cx;
                    double py = y + 0.25 + 0.5 * sy - cy;
                    double u = (px * cosr - py * sinr) / s.scale;
                    double v = (px * sinr + py * cosr) / s.scale;
                    double theta = std::atan2(v, u);
                    if (std::hypot(u, v) <= shape_radius(c, theta)) {
                        cover += 0.25;
                        uc = u;
                        vc = v;
                    }
                }
            if (cover == 0) continue;

            double pr = base_r, pg = base_g, pb = base_b;
            if (vein_distance(c, uc, vc) <= c.vein_width) {
                pr -= delta;
                pg -= delta;
                pb -= delta;
            }
            pr += noise(rng);
            pg += noise(rng);
            pb += noise(rng);
            auto mix = [&](double fg) {
                double v = cover * fg + (1 - cover) * 255.0;
                return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0) + 0.5);
            };
            std::size_t i = s.image.idx(x, y);
            s.image.r[i] = mix(pr);
            s.image.g[i] = mix(pg);
            s.image.b[i] = mix(pb);
        }
    return s;
}

void generate_synth_dataset(const std::string& dir, int per_class,
                            std::uint64_t seed) {
    for (int cls = 0; cls < kSynthClasses; ++cls) {
        fs::path cdir = fs::path(dir) / ("class_" + std::to_string(cls));
        fs::create_directories(cdir);
        for (int i = 0; i < per_class; ++i) {
            SynthSample s =
                synth_leaf(cls, seed + 1000003ull * static_cast<std::uint64_t>(
                                     cls * per_class + i));
            char name[32];
            std::snprintf(name, sizeof name, "leaf_c%d_%03d.png", cls, i);
            save_png(s.image, (cdir / name).string());
        }
    }
}

}  // namespace leafrec
