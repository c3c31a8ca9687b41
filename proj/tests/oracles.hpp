// Independent reference implementations used to cross-check the library.
// These are deliberately written as straight-line transcriptions of the
// defining formulas, sharing no code with core/.
#ifndef LEAFREC_TESTS_ORACLES_HPP
#define LEAFREC_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "leafrec/image.hpp"
#include "leafrec/texture.hpp"

namespace oracle {

// --- naive DFT ---

inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
    const std::size_t m = x.size();
    std::vector<std::complex<double>> out(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::complex<double> acc = 0;
        for (std::size_t n = 0; n < m; ++n)
            acc += x[n] * std::exp(std::complex<double>(
                              0, -2.0 * std::numbers::pi * k * n / m));
        out[k] = acc;
    }
    return out;
}

// --- Haralick features, straight-line transcription ---
// Input: normalized co-occurrence matrix p (levels x levels), levels >= 2.
// Gray levels are 1-based; p_{x+y} runs over 2..2N, p_{x-y} over 0..N-1.

inline std::array<double, 14> haralick(const std::vector<double>& p, int N) {
    auto P = [&](int i, int j) { return p[(i - 1) * N + (j - 1)]; };  // 1-based
    auto lg = [](double v) { return v > 0 ? std::log(v) : 0.0; };

    std::vector<double> px(N + 1, 0), py(N + 1, 0);
    std::vector<double> psum(2 * N + 1, 0), pdiff(N, 0);
    for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j) {
            px[i] += P(i, j);
            py[j] += P(i, j);
            psum[i + j] += P(i, j);
            pdiff[std::abs(i - j)] += P(i, j);
        }

    double mux = 0, muy = 0;
    for (int i = 1; i <= N; ++i) mux += i * px[i];
    for (int j = 1; j <= N; ++j) muy += j * py[j];
    double sx = 0, sy = 0;
    for (int i = 1; i <= N; ++i) sx += (i - mux) * (i - mux) * px[i];
    for (int j = 1; j <= N; ++j) sy += (j - muy) * (j - muy) * py[j];
    sx = std::sqrt(sx);
    sy = std::sqrt(sy);

    std::array<double, 14> f{};
    // f1 angular second moment
    for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j) f[0] += P(i, j) * P(i, j);
    // f2 contrast
    for (int d = 0; d <= N - 1; ++d) f[1] += double(d) * d * pdiff[d];
    // f3 correlation
    if (sx > 0 && sy > 0) {
        double acc = 0;
        for (int i = 1; i <= N; ++i)
            for (int j = 1; j <= N; ++j) acc += i * j * P(i, j);
        f[2] = (acc - mux * muy) / (sx * sy);
    }
    // f4 sum of squares: variance (about mu_x)
    for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j) f[3] += (i - mux) * (i - mux) * P(i, j);
    // f5 inverse difference moment
    for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j) f[4] += P(i, j) / (1.0 + (i - j) * (i - j));
    // f6 sum average
    for (int k = 2; k <= 2 * N; ++k) f[5] += k * psum[k];
    // f7 sum variance (about f6)
    for (int k = 2; k <= 2 * N; ++k) f[6] += (k - f[5]) * (k - f[5]) * psum[k];
    // f8 sum entropy
    for (int k = 2; k <= 2 * N; ++k) f[7] -= psum[k] * lg(psum[k]);
    // f9 entropy
    for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j) f[8] -= P(i, j) * lg(P(i, j));
    // f10 difference variance = variance of p_{x-y}
    double mud = 0;
    for (int d = 0; d <= N - 1; ++d) mud += d * pdiff[d];
    for (int d = 0; d <= N - 1; ++d) f[9] += (d - mud) * (d - mud) * pdiff[d];
    // f11 difference entropy
    for (int d = 0; d <= N - 1; ++d) f[10] -= pdiff[d] * lg(pdiff[d]);
    // f12, f13 information measures of correlation
    double hx = 0, hy = 0, hxy = f[8], hxy1 = 0, hxy2 = 0;
    for (int i = 1; i <= N; ++i) hx -= px[i] * lg(px[i]);
    for (int j = 1; j <= N; ++j) hy -= py[j] * lg(py[j]);
    for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j) {
            if (px[i] * py[j] > 0) {
                if (P(i, j) > 0) hxy1 -= P(i, j) * std::log(px[i] * py[j]);
                hxy2 -= px[i] * py[j] * std::log(px[i] * py[j]);
            }
        }
    f[11] = std::max(hx, hy) > 0 ? (hxy - hxy1) / std::max(hx, hy) : 0.0;
    f[12] = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - hxy))));
    // f14 via the general (non-symmetric) eigenproblem on Q itself,
    // restricted to non-empty rows/columns.
    std::vector<int> rows, cols;
    for (int i = 1; i <= N; ++i) {
        if (px[i] > 0) rows.push_back(i);
        if (py[i] > 0) cols.push_back(i);
    }
    if (rows.size() >= 2) {
        const int m = static_cast<int>(rows.size());
        Eigen::MatrixXd q(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
                double acc = 0;
                for (int k : cols)
                    acc += P(rows[a], k) * P(rows[b], k) / (px[rows[a]] * py[k]);
                q(a, b) = acc;
            }
        Eigen::EigenSolver<Eigen::MatrixXd> es(q);
        std::vector<double> ev;
        for (int i = 0; i < m; ++i) ev.push_back(es.eigenvalues()(i).real());
        std::sort(ev.begin(), ev.end());
        f[13] = std::sqrt(std::clamp(ev[m - 2], 0.0, 1.0));
    }
    return f;
}

// --- brute-force GLCM (pair enumeration) ---

inline std::vector<double> glcm_brute(const leafrec::GrayImage& g,
                                      const leafrec::BinaryMask& m, int levels,
                                      int distance) {
    const std::pair<int, int> offs[4] = {{1, 0}, {1, -1}, {0, -1}, {-1, -1}};
    std::vector<double> avg(levels * levels, 0.0);
    int used = 0;
    for (auto [ox, oy] : offs) {
        std::vector<double> c(levels * levels, 0.0);
        long pairs = 0;
        for (int y = 0; y < g.height; ++y)
            for (int x = 0; x < g.width; ++x) {
                int x2 = x + ox * distance, y2 = y + oy * distance;
                if (x2 < 0 || x2 >= g.width || y2 < 0 || y2 >= g.height) continue;
                if (!m.at(x, y) || !m.at(x2, y2)) continue;
                int a = g.at(x, y) * levels / 256;
                int b = g.at(x2, y2) * levels / 256;
                c[a * levels + b] += 1;
                c[b * levels + a] += 1;
                ++pairs;
            }
        if (!pairs) continue;
        for (int i = 0; i < levels * levels; ++i) avg[i] += c[i] / (2.0 * pairs);
        ++used;
    }
    for (auto& v : avg) v /= used;
    return avg;
}

// --- spatial/central/normalized moments, double loop ---

struct Moments {
    double M[4][4]{};    // M[i][j] = sum x^i y^j I
    double mu[4][4]{};   // central
    double eta[4][4]{};  // normalized central
};

inline Moments moments(const leafrec::GrayImage& g, const leafrec::BinaryMask& m) {
    Moments out;
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            if (!m.at(x, y)) continue;
            double I = g.at(x, y) / 255.0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    out.M[i][j] += std::pow(x, i) * std::pow(y, j) * I;
        }
    double xc = out.M[1][0] / out.M[0][0], yc = out.M[0][1] / out.M[0][0];
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            if (!m.at(x, y)) continue;
            double I = g.at(x, y) / 255.0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    out.mu[i][j] += std::pow(x - xc, i) * std::pow(y - yc, j) * I;
        }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            out.eta[i][j] =
                out.mu[i][j] / std::pow(out.M[0][0], 1.0 + (i + j) / 2.0);
    return out;
}

// --- projected-gradient solver for the SVM dual QP ---
// maximize sum(a) - 0.5 a^T H a  s.t.  0 <= a <= C,  y^T a = 0,
// where H(i,j) = y_i y_j K(x_i, x_j).

inline double qp_dual(const std::vector<std::vector<double>>& x,
                      const std::vector<int>& y, double c, double gamma,
                      int iters = 200000) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd h(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double d2 = 0;
            for (std::size_t k = 0; k < x[i].size(); ++k)
                d2 += (x[i][k] - x[j][k]) * (x[i][k] - x[j][k]);
            h(i, j) = y[i] * y[j] * std::exp(-gamma * d2);
        }
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd yv(n);
    for (int i = 0; i < n; ++i) yv(i) = y[i];

    double lips = h.cwiseAbs().rowwise().sum().maxCoeff();
    double step = 1.0 / std::max(lips, 1e-12);

    auto project = [&](Eigen::VectorXd v) {
        // Find lambda with sum_i y_i clip(v_i + lambda y_i, 0, C) = 0.
        double lo = -10 * (c + v.cwiseAbs().maxCoeff()), hi = -lo;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            double s = 0;
            for (int i = 0; i < n; ++i)
                s += yv(i) * std::clamp(v(i) + mid * yv(i), 0.0, c);
            (s > 0 ? hi : lo) = mid;
        }
        double lambda = 0.5 * (lo + hi);
        for (int i = 0; i < n; ++i)
            v(i) = std::clamp(v(i) + lambda * yv(i), 0.0, c);
        return v;
    };

    for (int it = 0; it < iters; ++it) {
        Eigen::VectorXd grad = Eigen::VectorXd::Ones(n) - h * a;
        a = project(a + step * grad);
    }
    return a.sum() - 0.5 * a.dot(h * a);
}

}  // namespace oracle

#endif
