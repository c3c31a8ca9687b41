#include "leafrec/texture.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace leafrec {

namespace {

inline double xlogx(double p) { return p > 0 ? p * std::log(p) : 0.0; }

inline int quantize(std::uint8_t v, int levels) {
    return static_cast<int>(v) * levels / 256;
}

}  // namespace

Glcm compute_glcm(const GrayImage& gray, const BinaryMask& mask,
                  const GlcmConfig& cfg) {
    if (gray.width != mask.width || gray.height != mask.height)
        throw std::invalid_argument("compute_glcm: image/mask size mismatch");
    if (cfg.levels < 2 || cfg.levels > 256)
        throw std::invalid_argument("compute_glcm: levels out of range");

    const int n = cfg.levels;
    Glcm out;
    out.levels = n;
    out.p.assign(static_cast<std::size_t>(n) * n, 0.0);

    std::vector<double> counts(out.p.size());
    int usedAngles = 0;
    for (auto [ax, ay] : cfg.angles) {
        int dx = ax * cfg.distance, dy = ay * cfg.distance;
        std::fill(counts.begin(), counts.end(), 0.0);
        std::size_t pairs = 0;
        for (int y = 0; y < gray.height; ++y) {
            for (int x = 0; x < gray.width; ++x) {
                int x2 = x + dx, y2 = y + dy;
                if (x2 < 0 || y2 < 0 || x2 >= gray.width || y2 >= gray.height)
                    continue;
                if (!mask.at(x, y) || !mask.at(x2, y2)) continue;
                int a = quantize(gray.at(x, y), n);
                int b = quantize(gray.at(x2, y2), n);
                counts[static_cast<std::size_t>(a) * n + b] += 1.0;
                ++pairs;
                if (cfg.symmetric) counts[static_cast<std::size_t>(b) * n + a] += 1.0;
            }
        }
        if (pairs == 0) continue;
        double norm = cfg.symmetric ? 2.0 * pairs : static_cast<double>(pairs);
        for (std::size_t i = 0; i < out.p.size(); ++i) out.p[i] += counts[i] / norm;
        out.pair_count += pairs;
        ++usedAngles;
    }
    if (usedAngles == 0)
        throw DegenerateInput("compute_glcm: no valid pixel pair");
    for (auto& v : out.p) v /= usedAngles;
    return out;
}

HaralickVector haralick_features(const Glcm& g) {
    const int n = g.levels;
    if (n < 2) throw DegenerateInput("haralick_features: fewer than 2 levels");

    HaralickVector h;
    h.p_x.assign(n, 0.0);
    h.p_y.assign(n, 0.0);
    h.p_sum.assign(2 * n - 1, 0.0);  // indices 2..2N at [k-2]
    h.p_diff.assign(n, 0.0);         // indices 0..N-1

    // Gray levels are treated as 1-based values, matching the summation
    // ranges i = 2..2N and i = 0..N-1 of the marginal distributions.
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double p = g.at(i, j);
            h.p_x[i] += p;
            h.p_y[j] += p;
            h.p_sum[i + j] += p;
            h.p_diff[std::abs(i - j)] += p;
        }

    for (int i = 0; i < n; ++i) {
        h.mu_x += (i + 1) * h.p_x[i];
        h.mu_y += (i + 1) * h.p_y[i];
    }
    for (int i = 0; i < n; ++i) {
        h.sigma_x += (i + 1 - h.mu_x) * (i + 1 - h.mu_x) * h.p_x[i];
        h.sigma_y += (i + 1 - h.mu_y) * (i + 1 - h.mu_y) * h.p_y[i];
    }
    h.sigma_x = std::sqrt(h.sigma_x);
    h.sigma_y = std::sqrt(h.sigma_y);

    double f1 = 0, f2 = 0, f5 = 0, f9 = 0, corrNum = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double p = g.at(i, j);
            f1 += p * p;
            f2 += (i - j) * (i - j) * p;
            f5 += p / (1.0 + (i - j) * (i - j));
            f9 -= xlogx(p);
            corrNum += (i + 1.0) * (j + 1.0) * p;
        }

    double f3 = 0;
    if (h.sigma_x > 0 && h.sigma_y > 0)
        f3 = (corrNum - h.mu_x * h.mu_y) / (h.sigma_x * h.sigma_y);

    double f4 = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            f4 += (i + 1 - h.mu_x) * (i + 1 - h.mu_x) * g.at(i, j);

    double f6 = 0, f7 = 0, f8 = 0;
    for (int k = 0; k < 2 * n - 1; ++k) {
        f6 += (k + 2) * h.p_sum[k];
        f8 -= xlogx(h.p_sum[k]);
    }
    for (int k = 0; k < 2 * n - 1; ++k)
        f7 += (k + 2 - f6) * (k + 2 - f6) * h.p_sum[k];

    // Difference variance as the variance of p_{x-y} (the printed raw
    // second moment carries a sign error).
    double muD = 0, f10 = 0, f11 = 0;
    for (int k = 0; k < n; ++k) {
        muD += k * h.p_diff[k];
        f11 -= xlogx(h.p_diff[k]);
    }
    for (int k = 0; k < n; ++k) f10 += (k - muD) * (k - muD) * h.p_diff[k];

    for (int i = 0; i < n; ++i) {
        h.hx -= xlogx(h.p_x[i]);
        h.hy -= xlogx(h.p_y[i]);
    }
    h.hxy = f9;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double pp = h.p_x[i] * h.p_y[j];
            if (pp <= 0) continue;
            if (g.at(i, j) > 0) h.hxy1 -= g.at(i, j) * std::log(pp);
            h.hxy2 -= pp * std::log(pp);
        }

    double denom = std::max(h.hx, h.hy);
    double f12 = denom > 0 ? (h.hxy - h.hxy1) / denom : 0.0;
    double f13 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (h.hxy2 - h.hxy))));

    // f14: sqrt of the second-largest eigenvalue of
    //   Q(i,j) = sum_k p(i,k) p(j,k) / (p_x(i) p_y(k)),
    // computed on the similar symmetric matrix
    //   S(a,b) = sum_k p(a,k) p(b,k) / (sqrt(p_x(a) p_x(b)) p_y(k))
    // after removing empty rows and columns.
    std::vector<int> rows, cols;
    for (int i = 0; i < n; ++i) {
        if (h.p_x[i] > 0) rows.push_back(i);
        if (h.p_y[i] > 0) cols.push_back(i);
    }
    double f14 = 0;
    if (rows.size() >= 2) {
        const int m = static_cast<int>(rows.size());
        Eigen::MatrixXd s(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = a; b < m; ++b) {
                double acc = 0;
                for (int k : cols)
                    acc += g.at(rows[a], k) * g.at(rows[b], k) / h.p_y[k];
                acc /= std::sqrt(h.p_x[rows[a]] * h.p_x[rows[b]]);
                s(a, b) = acc;
                s(b, a) = acc;
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
        double l2 = es.eigenvalues()(m - 2);  // ascending order
        f14 = std::sqrt(std::clamp(l2, 0.0, 1.0));
    }

    h.f = {f1, f2, f3, f4, f5, f6, f7, f8, f9, f10, f11, f12, f13, f14};
    return h;
}

}  // namespace leafrec
