#include "leafrec/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace leafrec {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Clockwise in image coordinates (y down): E, SE, S, SW, W, NW, N, NE.
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

int direction_of(std::pair<int, int> from, std::pair<int, int> to) {
    for (int d = 0; d < 8; ++d)
        if (from.first + kDx[d] == to.first && from.second + kDy[d] == to.second)
            return d;
    throw std::logic_error("direction_of: points are not 8-neighbors");
}

struct Centroid {
    double x, y;
    std::size_t n;
};

Centroid mask_centroid(const BinaryMask& mask) {
    double sx = 0, sy = 0;
    std::size_t n = 0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
    if (n == 0) throw DegenerateInput("mask_centroid: empty foreground");
    return {sx / n, sy / n, n};
}

}  // namespace

PrincipalAxes principal_axes(const BinaryMask& mask) {
    Centroid c = mask_centroid(mask);
    if (c.n < 2) throw DegenerateInput("principal_axes: fewer than 2 foreground pixels");
    double cxx = 0, cyy = 0, cxy = 0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                double dx = x - c.x, dy = y - c.y;
                cxx += dx * dx;
                cyy += dy * dy;
                cxy += dx * dy;
            }
    cxx /= static_cast<double>(c.n);
    cyy /= static_cast<double>(c.n);
    cxy /= static_cast<double>(c.n);

    double tr = cxx + cyy;
    double disc = std::sqrt((cxx - cyy) * (cxx - cyy) + 4.0 * cxy * cxy);
    double l1 = 0.5 * (tr + disc);
    double l2 = 0.5 * (tr - disc);
    double angle = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
    if (angle <= -kPi / 2) angle += kPi;
    if (angle > kPi / 2) angle -= kPi;
    return {angle, l1, l2};
}

double principal_axis(const BinaryMask& mask) { return principal_axes(mask).angle; }

AlignResult align_upright(const RasterImage& img, const BinaryMask& mask,
                          double gate) {
    if (img.width != mask.width || img.height != mask.height)
        throw std::invalid_argument("align_upright: image/mask size mismatch");
    PrincipalAxes ax = principal_axes(mask);
    if (ax.minor > 0 && ax.major / ax.minor < gate)
        return {img, mask, false};

    double delta = kPi / 2 - ax.angle;  // -(angle - pi/2)
    Centroid c = mask_centroid(mask);
    double cosd = std::cos(delta), sind = std::sin(delta);

    // Forward-rotate the input corners to size the output canvas.
    double minX = 1e30, minY = 1e30, maxX = -1e30, maxY = -1e30;
    for (int cy : {0, img.height - 1})
        for (int cx : {0, img.width - 1}) {
            double rx = c.x + cosd * (cx - c.x) - sind * (cy - c.y);
            double ry = c.y + sind * (cx - c.x) + cosd * (cy - c.y);
            minX = std::min(minX, rx);
            maxX = std::max(maxX, rx);
            minY = std::min(minY, ry);
            maxY = std::max(maxY, ry);
        }
    int ow = static_cast<int>(std::ceil(maxX - minX)) + 1;
    int oh = static_cast<int>(std::ceil(maxY - minY)) + 1;

    RasterImage oimg(ow, oh, 255, 255, 255);
    BinaryMask omask(ow, oh, 0);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            // Inverse map into the source frame.
            double px = x + minX - c.x, py = y + minY - c.y;
            double sx = c.x + cosd * px + sind * py;
            double sy = c.y - sind * px + cosd * py;
            int nx = static_cast<int>(std::lround(sx));
            int ny = static_cast<int>(std::lround(sy));
            std::size_t o = oimg.idx(x, y);
            if (nx >= 0 && ny >= 0 && nx < mask.width && ny < mask.height)
                omask.v[o] = mask.at(nx, ny);
            if (sx >= 0 && sy >= 0 && sx <= img.width - 1 && sy <= img.height - 1) {
                int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
                int x1 = std::min(x0 + 1, img.width - 1);
                int y1 = std::min(y0 + 1, img.height - 1);
                double fx = sx - x0, fy = sy - y0;
                auto lerp2 = [&](const std::vector<std::uint8_t>& p) {
                    double top = p[img.idx(x0, y0)] * (1 - fx) + p[img.idx(x1, y0)] * fx;
                    double bot = p[img.idx(x0, y1)] * (1 - fx) + p[img.idx(x1, y1)] * fx;
                    return static_cast<std::uint8_t>(
                        std::lround(top * (1 - fy) + bot * fy));
                };
                oimg.r[o] = lerp2(img.r);
                oimg.g[o] = lerp2(img.g);
                oimg.b[o] = lerp2(img.b);
            }
        }
    }
    return {std::move(oimg), std::move(omask), true};
}

Contour trace_contour(const BinaryMask& mask) {
    if (mask.count() < 3)
        throw DegenerateInput("trace_contour: foreground smaller than 3 pixels");

    // Uppermost-leftmost foreground pixel; its west neighbor is background.
    std::pair<int, int> start{-1, -1};
    for (int y = 0; y < mask.height && start.first < 0; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                start = {x, y};
                break;
            }

    auto fg = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < mask.width && y < mask.height &&
               mask.at(x, y) == 1;
    };

    Contour out;
    out.points.push_back(start);
    std::pair<int, int> cur = start, back{start.first - 1, start.second};
    std::pair<int, int> firstNext{-1, -1};
    const std::size_t cap = 4 * mask.pixels() + 16;

    for (std::size_t step = 0; step < cap; ++step) {
        int d = direction_of(cur, back);
        std::pair<int, int> next{-1, -1}, prevProbe = back;
        for (int k = 1; k <= 8; ++k) {
            int nd = (d + k) % 8;
            std::pair<int, int> cand{cur.first + kDx[nd], cur.second + kDy[nd]};
            if (fg(cand.first, cand.second)) {
                next = cand;
                break;
            }
            prevProbe = cand;
        }
        if (next.first < 0)
            throw DegenerateInput("trace_contour: isolated foreground pixel");
        // Jacob's criterion: the circuit is closed once the first boundary
        // edge start->firstNext is about to repeat. Comparing against the
        // first edge (rather than the backtrack cell) also terminates on
        // one-pixel-thin structures, where the trace walks both sides.
        if (step > 0 && cur == start && next == firstNext) break;
        if (step == 0) firstNext = next;
        back = prevProbe;
        cur = next;
        out.points.push_back(cur);
    }
    if (out.points.size() > 1 && out.points.back() == start) out.points.pop_back();
    return out;
}

GeometricFeatures geometric_features(const BinaryMask& mask, const Contour& contour) {
    BBox bb = content_bbox(mask);
    GeometricFeatures g;
    g.length = bb.height();
    g.width = bb.width();
    g.area = static_cast<double>(mask.count());

    const auto& pts = contour.points;
    double p = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        int dx = std::abs(a.first - b.first), dy = std::abs(a.second - b.second);
        if (dx + dy == 0) continue;
        p += (dx && dy) ? std::sqrt(2.0) : 1.0;
    }
    g.perimeter = p;
    g.diameter = std::sqrt(4.0 * g.area / kPi);
    return g;
}

std::array<double, 6> morphological_features(const GeometricFeatures& g) {
    return {g.length / g.width,
            4.0 * kPi * g.area / (g.perimeter * g.perimeter),
            g.length * g.width / g.area,
            g.diameter / g.length,
            g.perimeter / g.diameter,
            g.perimeter / (g.length + g.width)};
}

std::array<double, 24> moment_features(const GrayImage& gray, const BinaryMask& mask) {
    if (gray.width != mask.width || gray.height != mask.height)
        throw std::invalid_argument("moment_features: image/mask size mismatch");

    // Raw spatial moments over intensity scaled to [0,1], background zeroed.
    double m[4][4] = {};
    for (int y = 0; y < gray.height; ++y)
        for (int x = 0; x < gray.width; ++x) {
            if (!mask.at(x, y)) continue;
            double v = gray.at(x, y) / 255.0;
            double xp = 1;
            for (int i = 0; i < 4; ++i) {
                double yp = 1;
                for (int j = 0; j < 4 - i; ++j) {
                    m[i][j] += xp * yp * v;
                    yp *= y;
                }
                xp *= x;
            }
        }
    if (m[0][0] == 0) throw DegenerateInput("moment_features: zero mass");

    double xb = m[1][0] / m[0][0], yb = m[0][1] / m[0][0];
    double mu[4][4] = {};
    for (int y = 0; y < gray.height; ++y)
        for (int x = 0; x < gray.width; ++x) {
            if (!mask.at(x, y)) continue;
            double v = gray.at(x, y) / 255.0;
            double xp = 1;
            for (int i = 0; i < 4; ++i) {
                double yp = 1;
                for (int j = 0; j < 4 - i; ++j) {
                    mu[i][j] += xp * yp * v;
                    yp *= (y - yb);
                }
                xp *= (x - xb);
            }
        }

    auto eta = [&](int i, int j) {
        return mu[i][j] / std::pow(m[0][0], 1.0 + (i + j) / 2.0);
    };

    return {m[0][0],  m[0][1],  m[0][2],  m[0][3],  m[1][0],  m[1][1],
            m[1][2],  m[2][0],  m[2][1],  m[3][0],  mu[0][2], mu[0][3],
            mu[1][1], mu[1][2], mu[2][0], mu[2][1], mu[3][0], eta(0, 2),
            eta(0, 3), eta(1, 1), eta(1, 2), eta(2, 0), eta(2, 1), eta(3, 0)};
}

std::array<double, 35> shape_vector(const GrayImage& gray, const BinaryMask& mask,
                                    const Contour& contour) {
    GeometricFeatures g = geometric_features(mask, contour);
    std::array<double, 6> morph = morphological_features(g);
    std::array<double, 24> mom = moment_features(gray, mask);
    std::array<double, 35> out{};
    out[0] = g.length;
    out[1] = g.width;
    out[2] = g.area;
    out[3] = g.perimeter;
    out[4] = g.diameter;
    std::copy(morph.begin(), morph.end(), out.begin() + 5);
    std::copy(mom.begin(), mom.end(), out.begin() + 11);
    return out;
}

}  // namespace leafrec
