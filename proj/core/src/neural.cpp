#include "leafrec/neural.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace leafrec {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

void he_uniform(std::vector<double>& w, int fan_in, std::mt19937_64& rng) {
    double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : w) v = dist(rng);
}

int conv_out(int n, int k) { return n >= k ? n - k + 1 : 1; }
int pool_out(int n) { return n >= 2 ? n / 2 : 1; }

}  // namespace

// ---------- Conv2d ----------

Conv2d::Conv2d(int in_ch_, int out_ch_, int ksize_)
    : in_ch(in_ch_), out_ch(out_ch_), ksize(ksize_) {
    w.assign(static_cast<std::size_t>(out_ch) * in_ch * ksize * ksize, 0.0);
    b.assign(out_ch, 0.0);
    gw.assign(w.size(), 0.0);
    gb.assign(b.size(), 0.0);
}

std::vector<ParamRef> Conv2d::params() {
    return {{&w, &gw, true}, {&b, &gb, false}};
}

Tensor Conv2d::forward(const Tensor& x, bool) {
    if (x.rank() != 4 || x.dim(1) != in_ch)
        throw ShapeError("conv2d: expected [B," + std::to_string(in_ch) +
                         ",H,W], got " + shape_str(x.shape));
    x_ = x;
    const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
    const int khe = std::min(ksize, H), kwe = std::min(ksize, W);
    const int oh = conv_out(H, ksize), ow = conv_out(W, ksize);
    const int kcols = in_ch * khe * kwe;

    // Effective weight block [out_ch, in_ch*khe*kwe]; when clamped, only
    // the leading khe x kwe window of each kernel participates.
    RowMat wm(out_ch, kcols);
    for (int o = 0; o < out_ch; ++o)
        for (int c = 0; c < in_ch; ++c)
            for (int ki = 0; ki < khe; ++ki)
                for (int kj = 0; kj < kwe; ++kj)
                    wm(o, (c * khe + ki) * kwe + kj) =
                        w[((static_cast<std::size_t>(o) * in_ch + c) * ksize + ki) *
                              ksize +
                          kj];

    Tensor y({B, out_ch, oh, ow});
    RowMat col(kcols, oh * ow);
    const std::size_t xStride = static_cast<std::size_t>(in_ch) * H * W;
    const std::size_t yStride = static_cast<std::size_t>(out_ch) * oh * ow;
    for (int n = 0; n < B; ++n) {
        const double* xp = x.data.data() + n * xStride;
        for (int c = 0; c < in_ch; ++c)
            for (int ki = 0; ki < khe; ++ki)
                for (int kj = 0; kj < kwe; ++kj) {
                    int row = (c * khe + ki) * kwe + kj;
                    for (int oy = 0; oy < oh; ++oy)
                        for (int ox = 0; ox < ow; ++ox)
                            col(row, oy * ow + ox) =
                                xp[(static_cast<std::size_t>(c) * H + oy + ki) * W +
                                   ox + kj];
                }
        MapMat ym(y.data.data() + n * yStride, out_ch, oh * ow);
        ym.noalias() = wm * col;
        for (int o = 0; o < out_ch; ++o) ym.row(o).array() += b[o];
    }
    return y;
}

Tensor Conv2d::backward(const Tensor& gy) {
    const int B = x_.dim(0), H = x_.dim(2), W = x_.dim(3);
    const int khe = std::min(ksize, H), kwe = std::min(ksize, W);
    const int oh = conv_out(H, ksize), ow = conv_out(W, ksize);
    const int kcols = in_ch * khe * kwe;
    expect_shape(gy, {B, out_ch, oh, ow}, "conv2d backward");

    RowMat wm(out_ch, kcols), dwm = RowMat::Zero(out_ch, kcols);
    for (int o = 0; o < out_ch; ++o)
        for (int c = 0; c < in_ch; ++c)
            for (int ki = 0; ki < khe; ++ki)
                for (int kj = 0; kj < kwe; ++kj)
                    wm(o, (c * khe + ki) * kwe + kj) =
                        w[((static_cast<std::size_t>(o) * in_ch + c) * ksize + ki) *
                              ksize +
                          kj];

    Tensor gx(x_.shape);
    RowMat col(kcols, oh * ow), dcol(kcols, oh * ow);
    const std::size_t xStride = static_cast<std::size_t>(in_ch) * H * W;
    const std::size_t yStride = static_cast<std::size_t>(out_ch) * oh * ow;
    for (int n = 0; n < B; ++n) {
        const double* xp = x_.data.data() + n * xStride;
        for (int c = 0; c < in_ch; ++c)
            for (int ki = 0; ki < khe; ++ki)
                for (int kj = 0; kj < kwe; ++kj) {
                    int row = (c * khe + ki) * kwe + kj;
                    for (int oy = 0; oy < oh; ++oy)
                        for (int ox = 0; ox < ow; ++ox)
                            col(row, oy * ow + ox) =
                                xp[(static_cast<std::size_t>(c) * H + oy + ki) * W +
                                   ox + kj];
                }
        CMapMat gym(gy.data.data() + n * yStride, out_ch, oh * ow);
        dwm.noalias() += gym * col.transpose();
        for (int o = 0; o < out_ch; ++o) gb[o] += gym.row(o).sum();
        dcol.noalias() = wm.transpose() * gym;
        double* gxp = gx.data.data() + n * xStride;
        for (int c = 0; c < in_ch; ++c)
            for (int ki = 0; ki < khe; ++ki)
                for (int kj = 0; kj < kwe; ++kj) {
                    int row = (c * khe + ki) * kwe + kj;
                    for (int oy = 0; oy < oh; ++oy)
                        for (int ox = 0; ox < ow; ++ox)
                            gxp[(static_cast<std::size_t>(c) * H + oy + ki) * W + ox +
                                kj] += dcol(row, oy * ow + ox);
                }
    }
    for (int o = 0; o < out_ch; ++o)
        for (int c = 0; c < in_ch; ++c)
            for (int ki = 0; ki < khe; ++ki)
                for (int kj = 0; kj < kwe; ++kj)
                    gw[((static_cast<std::size_t>(o) * in_ch + c) * ksize + ki) *
                           ksize +
                       kj] += dwm(o, (c * khe + ki) * kwe + kj);
    return gx;
}

// ---------- Conv1d ----------

Conv1d::Conv1d(int in_ch_, int out_ch_, int ksize_)
    : in_ch(in_ch_), out_ch(out_ch_), ksize(ksize_) {
    w.assign(static_cast<std::size_t>(out_ch) * in_ch * ksize, 0.0);
    b.assign(out_ch, 0.0);
    gw.assign(w.size(), 0.0);
    gb.assign(b.size(), 0.0);
}

std::vector<ParamRef> Conv1d::params() {
    return {{&w, &gw, true}, {&b, &gb, false}};
}

Tensor Conv1d::forward(const Tensor& x, bool) {
    if (x.rank() != 3 || x.dim(1) != in_ch)
        throw ShapeError("conv1d: expected [B," + std::to_string(in_ch) +
                         ",L], got " + shape_str(x.shape));
    x_ = x;
    const int B = x.dim(0), L = x.dim(2);
    const int ke = std::min(ksize, L);
    const int ol = conv_out(L, ksize);

    Tensor y({B, out_ch, ol});
    for (int n = 0; n < B; ++n) {
        const double* xp = x.data.data() + static_cast<std::size_t>(n) * in_ch * L;
        double* yp = y.data.data() + static_cast<std::size_t>(n) * out_ch * ol;
        for (int o = 0; o < out_ch; ++o)
            for (int t = 0; t < ol; ++t) {
                double acc = b[o];
                for (int c = 0; c < in_ch; ++c)
                    for (int k = 0; k < ke; ++k)
                        acc += w[(static_cast<std::size_t>(o) * in_ch + c) * ksize + k] *
                               xp[static_cast<std::size_t>(c) * L + t + k];
                yp[static_cast<std::size_t>(o) * ol + t] = acc;
            }
    }
    return y;
}

Tensor Conv1d::backward(const Tensor& gy) {
    const int B = x_.dim(0), L = x_.dim(2);
    const int ke = std::min(ksize, L);
    const int ol = conv_out(L, ksize);
    expect_shape(gy, {B, out_ch, ol}, "conv1d backward");

    Tensor gx(x_.shape);
    for (int n = 0; n < B; ++n) {
        const double* xp = x_.data.data() + static_cast<std::size_t>(n) * in_ch * L;
        const double* gyp = gy.data.data() + static_cast<std::size_t>(n) * out_ch * ol;
        double* gxp = gx.data.data() + static_cast<std::size_t>(n) * in_ch * L;
        for (int o = 0; o < out_ch; ++o)
            for (int t = 0; t < ol; ++t) {
                double g = gyp[static_cast<std::size_t>(o) * ol + t];
                gb[o] += g;
                for (int c = 0; c < in_ch; ++c)
                    for (int k = 0; k < ke; ++k) {
                        std::size_t wi =
                            (static_cast<std::size_t>(o) * in_ch + c) * ksize + k;
                        gw[wi] += g * xp[static_cast<std::size_t>(c) * L + t + k];
                        gxp[static_cast<std::size_t>(c) * L + t + k] += g * w[wi];
                    }
            }
    }
    return gx;
}

// ---------- Relu ----------

Tensor Relu::forward(const Tensor& x, bool) {
    shape_ = x.shape;
    pass_.resize(x.size());
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) {
        pass_[i] = x.data[i] > 0;
        y.data[i] = pass_[i] ? x.data[i] : 0.0;
    }
    return y;
}

Tensor Relu::backward(const Tensor& gy) {
    expect_shape(gy, shape_, "relu backward");
    Tensor gx(shape_);
    for (std::size_t i = 0; i < gy.size(); ++i)
        gx.data[i] = pass_[i] ? gy.data[i] : 0.0;
    return gx;
}

// ---------- BatchNorm ----------

BatchNorm::BatchNorm(int channels_, double momentum_, double eps_)
    : channels(channels_), momentum(momentum_), eps(eps_) {
    gamma.assign(channels, 1.0);
    beta.assign(channels, 0.0);
    ggamma.assign(channels, 0.0);
    gbeta.assign(channels, 0.0);
    running_mean.assign(channels, 0.0);
    running_var.assign(channels, 1.0);
}

std::vector<ParamRef> BatchNorm::params() {
    return {{&gamma, &ggamma, false}, {&beta, &gbeta, false}};
}

std::vector<std::vector<double>*> BatchNorm::state() {
    return {&running_mean, &running_var};
}

namespace {
// Iterate a [B, C, spatial...] tensor channel-wise.
struct BnLayout {
    int batch, spatial;
    std::size_t chanStride, batchStride;
};

BnLayout bn_layout(const std::vector<int>& shape, int channels) {
    if (shape.size() < 2 || shape[1] != channels)
        throw ShapeError("batchnorm: expected channel axis 1 of size " +
                         std::to_string(channels) + ", got " + shape_str(shape));
    int spatial = 1;
    for (std::size_t i = 2; i < shape.size(); ++i) spatial *= shape[i];
    return {shape[0], spatial, static_cast<std::size_t>(spatial),
            static_cast<std::size_t>(channels) * spatial};
}
}  // namespace

Tensor BatchNorm::forward(const Tensor& x, bool train) {
    BnLayout lo = bn_layout(x.shape, channels);
    Tensor y(x.shape);
    mean_.assign(channels, 0.0);
    var_.assign(channels, 0.0);
    const double n = static_cast<double>(lo.batch) * lo.spatial;

    if (train) {
        x_ = x;
        for (int c = 0; c < channels; ++c) {
            double m = 0;
            for (int b = 0; b < lo.batch; ++b) {
                const double* p = x.data.data() + b * lo.batchStride + c * lo.chanStride;
                for (int s = 0; s < lo.spatial; ++s) m += p[s];
            }
            m /= n;
            double v = 0;
            for (int b = 0; b < lo.batch; ++b) {
                const double* p = x.data.data() + b * lo.batchStride + c * lo.chanStride;
                for (int s = 0; s < lo.spatial; ++s) v += (p[s] - m) * (p[s] - m);
            }
            v /= n;
            mean_[c] = m;
            var_[c] = v;
            running_mean[c] = (1 - momentum) * running_mean[c] + momentum * m;
            running_var[c] = (1 - momentum) * running_var[c] + momentum * v;
        }
    } else {
        mean_ = running_mean;
        var_ = running_var;
    }

    for (int c = 0; c < channels; ++c) {
        double inv = 1.0 / std::sqrt(var_[c] + eps);
        for (int b = 0; b < lo.batch; ++b) {
            const double* p = x.data.data() + b * lo.batchStride + c * lo.chanStride;
            double* q = y.data.data() + b * lo.batchStride + c * lo.chanStride;
            for (int s = 0; s < lo.spatial; ++s)
                q[s] = gamma[c] * (p[s] - mean_[c]) * inv + beta[c];
        }
    }
    return y;
}

Tensor BatchNorm::backward(const Tensor& gy) {
    BnLayout lo = bn_layout(gy.shape, channels);
    expect_shape(gy, x_.shape, "batchnorm backward");
    Tensor gx(gy.shape);
    const double n = static_cast<double>(lo.batch) * lo.spatial;

    for (int c = 0; c < channels; ++c) {
        double inv = 1.0 / std::sqrt(var_[c] + eps);
        double sumG = 0, sumGX = 0;
        for (int b = 0; b < lo.batch; ++b) {
            const double* g = gy.data.data() + b * lo.batchStride + c * lo.chanStride;
            const double* p = x_.data.data() + b * lo.batchStride + c * lo.chanStride;
            for (int s = 0; s < lo.spatial; ++s) {
                double xh = (p[s] - mean_[c]) * inv;
                sumG += g[s];
                sumGX += g[s] * xh;
            }
        }
        gbeta[c] += sumG;
        ggamma[c] += sumGX;
        for (int b = 0; b < lo.batch; ++b) {
            const double* g = gy.data.data() + b * lo.batchStride + c * lo.chanStride;
            const double* p = x_.data.data() + b * lo.batchStride + c * lo.chanStride;
            double* o = gx.data.data() + b * lo.batchStride + c * lo.chanStride;
            for (int s = 0; s < lo.spatial; ++s) {
                double xh = (p[s] - mean_[c]) * inv;
                o[s] = gamma[c] * inv * (g[s] - sumG / n - xh * sumGX / n);
            }
        }
    }
    return gx;
}

// ---------- MaxPool2d ----------

Tensor MaxPool2d::forward(const Tensor& x, bool) {
    if (x.rank() != 4) throw ShapeError("maxpool2d: expected rank-4 input");
    in_shape_ = x.shape;
    const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int oh = pool_out(H), ow = pool_out(W);
    const int wy = H >= 2 ? 2 : 1, wx = W >= 2 ? 2 : 1;

    Tensor y({B, C, oh, ow});
    argmax_.resize(y.size());
    std::size_t yi = 0;
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c) {
            const double* xp =
                x.data.data() + (static_cast<std::size_t>(b) * C + c) * H * W;
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    double best = -1e300;
                    std::size_t bi = 0;
                    for (int dy = 0; dy < wy; ++dy)
                        for (int dx = 0; dx < wx; ++dx) {
                            std::size_t i =
                                static_cast<std::size_t>(oy * wy + dy) * W + ox * wx + dx;
                            if (xp[i] > best) {
                                best = xp[i];
                                bi = i;
                            }
                        }
                    y.data[yi] = best;
                    argmax_[yi] = (static_cast<std::size_t>(b) * C + c) * H * W + bi;
                    ++yi;
                }
        }
    return y;
}

Tensor MaxPool2d::backward(const Tensor& gy) {
    Tensor gx(in_shape_);
    if (gy.size() != argmax_.size())
        throw ShapeError("maxpool2d backward: gradient size mismatch");
    for (std::size_t i = 0; i < gy.size(); ++i) gx.data[argmax_[i]] += gy.data[i];
    return gx;
}

// ---------- MaxPool1d ----------

Tensor MaxPool1d::forward(const Tensor& x, bool) {
    if (x.rank() != 3) throw ShapeError("maxpool1d: expected rank-3 input");
    in_shape_ = x.shape;
    const int B = x.dim(0), C = x.dim(1), L = x.dim(2);
    const int ol = pool_out(L);
    const int wl = L >= 2 ? 2 : 1;

    Tensor y({B, C, ol});
    argmax_.resize(y.size());
    std::size_t yi = 0;
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c) {
            const double* xp = x.data.data() + (static_cast<std::size_t>(b) * C + c) * L;
            for (int t = 0; t < ol; ++t) {
                double best = -1e300;
                std::size_t bi = 0;
                for (int d = 0; d < wl; ++d) {
                    std::size_t i = static_cast<std::size_t>(t) * wl + d;
                    if (xp[i] > best) {
                        best = xp[i];
                        bi = i;
                    }
                }
                y.data[yi] = best;
                argmax_[yi] = (static_cast<std::size_t>(b) * C + c) * L + bi;
                ++yi;
            }
        }
    return y;
}

Tensor MaxPool1d::backward(const Tensor& gy) {
    Tensor gx(in_shape_);
    if (gy.size() != argmax_.size())
        throw ShapeError("maxpool1d backward: gradient size mismatch");
    for (std::size_t i = 0; i < gy.size(); ++i) gx.data[argmax_[i]] += gy.data[i];
    return gx;
}

// ---------- Flatten ----------

Tensor Flatten::forward(const Tensor& x, bool) {
    in_shape_ = x.shape;
    int f = 1;
    for (std::size_t i = 1; i < x.shape.size(); ++i) f *= x.shape[i];
    return Tensor({x.dim(0), f}, x.data);
}

Tensor Flatten::backward(const Tensor& gy) { return Tensor(in_shape_, gy.data); }

// ---------- Dense ----------

Dense::Dense(int in_features_, int out_features_)
    : in_features(in_features_), out_features(out_features_) {
    w.assign(static_cast<std::size_t>(out_features) * in_features, 0.0);
    b.assign(out_features, 0.0);
    gw.assign(w.size(), 0.0);
    gb.assign(b.size(), 0.0);
}

std::vector<ParamRef> Dense::params() {
    return {{&w, &gw, true}, {&b, &gb, false}};
}

Tensor Dense::forward(const Tensor& x, bool) {
    if (x.rank() != 2 || x.dim(1) != in_features)
        throw ShapeError("dense: expected [B," + std::to_string(in_features) +
                         "], got " + shape_str(x.shape));
    x_ = x;
    const int B = x.dim(0);
    Tensor y({B, out_features});
    CMapMat xm(x.data.data(), B, in_features);
    CMapMat wm(w.data(), out_features, in_features);
    MapMat ym(y.data.data(), B, out_features);
    ym.noalias() = xm * wm.transpose();
    for (int o = 0; o < out_features; ++o) ym.col(o).array() += b[o];
    return y;
}

Tensor Dense::backward(const Tensor& gy) {
    const int B = x_.dim(0);
    expect_shape(gy, {B, out_features}, "dense backward");
    CMapMat gym(gy.data.data(), B, out_features);
    CMapMat xm(x_.data.data(), B, in_features);
    CMapMat wm(w.data(), out_features, in_features);
    MapMat gwm(gw.data(), out_features, in_features);
    gwm.noalias() += gym.transpose() * xm;
    for (int o = 0; o < out_features; ++o) gb[o] += gym.col(o).sum();

    Tensor gx({B, in_features});
    MapMat gxm(gx.data.data(), B, in_features);
    gxm.noalias() = gym * wm;
    return gx;
}

// ---------- Dropout ----------

Dropout::Dropout(double rate_, std::uint64_t seed) : rate(rate_), rng_(seed) {
    if (rate < 0 || rate >= 1)
        throw std::invalid_argument("dropout: rate must be in [0,1)");
}

Tensor Dropout::forward(const Tensor& x, bool train) {
    shape_ = x.shape;
    if (!train || rate == 0.0) {
        scale_.clear();
        return x;
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double keep = 1.0 - rate;
    scale_.resize(x.size());
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) {
        scale_[i] = u(rng_) < keep ? 1.0 / keep : 0.0;
        y.data[i] = x.data[i] * scale_[i];
    }
    return y;
}

Tensor Dropout::backward(const Tensor& gy) {
    expect_shape(gy, shape_, "dropout backward");
    if (scale_.empty()) return gy;
    Tensor gx(shape_);
    for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] = gy.data[i] * scale_[i];
    return gx;
}

// ---------- loss ----------

Tensor softmax(const Tensor& logits) {
    if (logits.rank() != 2) throw ShapeError("softmax: expected rank-2 input");
    const int B = logits.dim(0), K = logits.dim(1);
    Tensor p(logits.shape);
    for (int b = 0; b < B; ++b) {
        const double* z = logits.data.data() + static_cast<std::size_t>(b) * K;
        double* q = p.data.data() + static_cast<std::size_t>(b) * K;
        double mx = *std::max_element(z, z + K);
        double sum = 0;
        for (int k = 0; k < K; ++k) {
            q[k] = std::exp(z[k] - mx);
            sum += q[k];
        }
        for (int k = 0; k < K; ++k) q[k] /= sum;
    }
    return p;
}

LossResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    const int B = logits.dim(0), K = logits.dim(1);
    if (static_cast<int>(labels.size()) != B)
        throw ShapeError("softmax_cross_entropy: label count mismatch");
    Tensor p = softmax(logits);
    LossResult res{0.0, Tensor(logits.shape), 0};
    for (int b = 0; b < B; ++b) {
        const double* q = p.data.data() + static_cast<std::size_t>(b) * K;
        double* g = res.grad.data.data() + static_cast<std::size_t>(b) * K;
        res.loss -= std::log(std::max(q[labels[b]], 1e-300));
        int arg = 0;
        for (int k = 0; k < K; ++k) {
            g[k] = q[k] / B;
            if (q[k] > q[arg]) arg = k;
        }
        g[labels[b]] -= 1.0 / B;
        res.correct += arg == labels[b];
    }
    res.loss /= B;
    return res;
}

// ---------- encoder assembly ----------

std::vector<int> EncoderArch::input_shape() const {
    switch (kind) {
        case EncoderKind::Conv2d: return {in_channels, in_extent, in_extent};
        case EncoderKind::Conv1d: return {in_channels, in_extent};
        case EncoderKind::Dense: return {in_extent};
    }
    throw std::logic_error("unknown encoder kind");
}

EncoderModel::EncoderModel(const EncoderArch& arch, int num_classes,
                           std::uint64_t seed)
    : arch_(arch), num_classes_(num_classes) {
    std::mt19937_64 rng(seed);

    auto add_conv2d = [&](int ic, int oc, int k) {
        auto c = std::make_unique<Conv2d>(ic, oc, k);
        he_uniform(c->w, ic * k * k, rng);
        encoder.push_back(std::move(c));
        encoder.push_back(std::make_unique<Relu>());
        encoder.push_back(std::make_unique<BatchNorm>(oc));
        encoder.push_back(std::make_unique<MaxPool2d>());
    };
    auto add_conv1d = [&](int ic, int oc, int k) {
        auto c = std::make_unique<Conv1d>(ic, oc, k);
        he_uniform(c->w, ic * k, rng);
        encoder.push_back(std::move(c));
        encoder.push_back(std::make_unique<Relu>());
        encoder.push_back(std::make_unique<BatchNorm>(oc));
        encoder.push_back(std::make_unique<MaxPool1d>());
    };

    int flat = 0;
    switch (arch.kind) {
        case EncoderKind::Conv2d: {
            add_conv2d(arch.in_channels, 16, 3);
            add_conv2d(16, 16, 3);
            add_conv2d(16, 32, 5);
            add_conv2d(32, 32, 5);
            add_conv2d(32, 32, 5);
            int s = arch.in_extent;
            for (int k : {3, 3, 5, 5, 5}) s = pool_out(conv_out(s, k));
            flat = 32 * s * s;
            break;
        }
        case EncoderKind::Conv1d: {
            add_conv1d(arch.in_channels, 16, 3);
            add_conv1d(16, 16, 3);
            add_conv1d(16, 32, 3);
            int s = arch.in_extent;
            for (int i = 0; i < 3; ++i) s = pool_out(conv_out(s, 3));
            flat = 32 * s;
            break;
        }
        case EncoderKind::Dense:
            flat = arch.in_extent;
            break;
    }
    if (arch.kind != EncoderKind::Dense)
        encoder.push_back(std::make_unique<Flatten>());
    encoder.push_back(std::make_unique<Dropout>(arch.dropout, rng()));
    auto embed = std::make_unique<Dense>(flat, arch.embedding);
    he_uniform(embed->w, flat, rng);
    encoder.push_back(std::move(embed));
    encoder.push_back(std::make_unique<Relu>());

    head = std::make_unique<Dense>(arch.embedding, num_classes);
    he_uniform(head->w, arch.embedding, rng);
}

Tensor EncoderModel::embed(const Tensor& x, bool train) {
    Tensor t = x;
    if (t.shape == arch_.input_shape()) {
        std::vector<int> s = {1};
        s.insert(s.end(), t.shape.begin(), t.shape.end());
        t.shape = s;
    }
    for (auto& layer : encoder) t = layer->forward(t, train);
    return t;
}

Tensor EncoderModel::logits(const Tensor& x, bool train) {
    return head->forward(embed(x, train), train);
}

void EncoderModel::backward(const Tensor& loss_grad) {
    Tensor g = head->backward(loss_grad);
    for (auto it = encoder.rbegin(); it != encoder.rend(); ++it)
        g = (*it)->backward(g);
}

std::vector<ParamRef> EncoderModel::params() {
    std::vector<ParamRef> out;
    for (auto& layer : encoder)
        for (auto p : layer->params()) out.push_back(p);
    for (auto p : head->params()) out.push_back(p);
    return out;
}

std::vector<std::vector<double>*> EncoderModel::state() {
    std::vector<std::vector<double>*> out;
    for (auto& layer : encoder)
        for (auto* s : layer->state()) out.push_back(s);
    return out;
}

void EncoderModel::zero_grads() {
    for (auto p : params()) std::fill(p.grad->begin(), p.grad->end(), 0.0);
}

std::vector<double> EncoderModel::snapshot() const {
    std::vector<double> snap;
    auto* self = const_cast<EncoderModel*>(this);
    for (auto p : self->params())
        snap.insert(snap.end(), p.value->begin(), p.value->end());
    for (auto* s : self->state()) snap.insert(snap.end(), s->begin(), s->end());
    return snap;
}

void EncoderModel::restore(const std::vector<double>& snap) {
    std::size_t off = 0;
    for (auto p : params()) {
        std::copy(snap.begin() + off, snap.begin() + off + p.value->size(),
                  p.value->begin());
        off += p.value->size();
    }
    for (auto* s : state()) {
        std::copy(snap.begin() + off, snap.begin() + off + s->size(), s->begin());
        off += s->size();
    }
    if (off != snap.size())
        throw ShapeError("encoder restore: snapshot length mismatch");
}

// ---------- training ----------

namespace {

Tensor gather_rows(const Tensor& x, const std::vector<int>& idx, std::size_t lo,
                   std::size_t hi) {
    const int n = x.dim(0);
    const std::size_t stride = x.size() / n;
    std::vector<int> shape = x.shape;
    shape[0] = static_cast<int>(hi - lo);
    Tensor out(shape);
    for (std::size_t r = lo; r < hi; ++r)
        std::copy(x.data.begin() + idx[r] * stride,
                  x.data.begin() + (idx[r] + 1) * stride,
                  out.data.begin() + (r - lo) * stride);
    return out;
}

struct EvalStats {
    double loss = 0, acc = 0;
};

EvalStats evaluate(EncoderModel& model, const Tensor& x, const std::vector<int>& y,
                   int batch) {
    const int n = x.dim(0);
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    double loss = 0;
    int correct = 0;
    for (int lo = 0; lo < n; lo += batch) {
        int hi = std::min(lo + batch, n);
        Tensor bx = gather_rows(x, idx, lo, hi);
        std::vector<int> by(y.begin() + lo, y.begin() + hi);
        LossResult r = softmax_cross_entropy(model.logits(bx, false), by);
        loss += r.loss * (hi - lo);
        correct += r.correct;
    }
    return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace

TrainResult train_encoder(const Tensor& train_x, const std::vector<int>& train_y,
                          const Tensor& valid_x, const std::vector<int>& valid_y,
                          const EncoderArch& arch, int num_classes,
                          const TrainConfig& cfg) {
    if (num_classes < 2)
        throw std::invalid_argument("train_encoder: need at least 2 classes");
    EncoderArch a = arch;
    a.dropout = cfg.dropout;

    TrainResult res;
    res.model = EncoderModel(a, num_classes, cfg.seed);
    EncoderModel& model = res.model;

    auto prefs = model.params();
    std::vector<std::vector<double>> velocity;
    velocity.reserve(prefs.size());
    for (auto& p : prefs) velocity.emplace_back(p.value->size(), 0.0);

    std::mt19937_64 shuffleRng(cfg.seed ^ 0x9E3779B97F4A7C15ull);
    const int n = train_x.dim(0);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> bestSnap = model.snapshot();
    res.best_valid_acc = -1.0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffleRng);
        double epochLoss = 0;
        int epochCorrect = 0;
        for (int lo = 0; lo < n; lo += cfg.batch) {
            int hi = std::min(lo + cfg.batch, n);
            Tensor bx = gather_rows(train_x, order, lo, hi);
            std::vector<int> by(hi - lo);
            for (int i = lo; i < hi; ++i) by[i - lo] = train_y[order[i]];

            model.zero_grads();
            Tensor z = model.logits(bx, true);
            LossResult r = softmax_cross_entropy(z, by);
            if (!std::isfinite(r.loss))
                throw DivergenceError("train_encoder: non-finite loss at epoch " +
                                      std::to_string(epoch) + ", lr " +
                                      std::to_string(cfg.lr));
            model.backward(r.grad);

            for (std::size_t pi = 0; pi < prefs.size(); ++pi) {
                auto& p = prefs[pi];
                auto& vel = velocity[pi];
                for (std::size_t i = 0; i < p.value->size(); ++i) {
                    double g = (*p.grad)[i];
                    if (p.weight_decay) g += cfg.l2 * (*p.value)[i];
                    vel[i] = cfg.momentum * vel[i] - cfg.lr * g;
                    (*p.value)[i] += vel[i];
                }
            }
            epochLoss += r.loss * (hi - lo);
            epochCorrect += r.correct;
        }

        EpochStats st;
        st.train_loss = epochLoss / n;
        st.train_acc = static_cast<double>(epochCorrect) / n;
        EvalStats ev = evaluate(model, valid_x, valid_y, cfg.batch);
        st.valid_loss = ev.loss;
        st.valid_acc = ev.acc;
        res.history.push_back(st);

        if (ev.acc > res.best_valid_acc) {
            res.best_valid_acc = ev.acc;
            res.best_epoch = epoch;
            bestSnap = model.snapshot();
        }
    }
    model.restore(bestSnap);
    return res;
}

Tensor encode(EncoderModel& model, const Tensor& x) { return model.embed(x, false); }

std::vector<int> head_predict(EncoderModel& model, const Tensor& x) {
    Tensor z = model.logits(x, false);
    const int B = z.dim(0), K = z.dim(1);
    std::vector<int> out(B);
    for (int b = 0; b < B; ++b) {
        const double* p = z.data.data() + static_cast<std::size_t>(b) * K;
        out[b] = static_cast<int>(std::max_element(p, p + K) - p);
    }
    return out;
}

// ---------- serialization ----------

namespace {
constexpr char kEncMagic[8] = {'L', 'E', 'A', 'F', 'E', 'N', 'C', '1'};

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
void read_pod(std::ifstream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
}
}  // namespace

void save_encoder(const EncoderModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_encoder: cannot write " + path);
    os.write(kEncMagic, sizeof kEncMagic);
    const EncoderArch& a = model.arch();
    write_pod(os, static_cast<std::int32_t>(a.kind));
    write_pod(os, static_cast<std::int32_t>(a.in_channels));
    write_pod(os, static_cast<std::int32_t>(a.in_extent));
    write_pod(os, static_cast<std::int32_t>(a.embedding));
    write_pod(os, a.dropout);
    write_pod(os, static_cast<std::int32_t>(model.num_classes()));
    std::vector<double> snap = model.snapshot();
    write_pod(os, static_cast<std::uint64_t>(snap.size()));
    os.write(reinterpret_cast<const char*>(snap.data()),
             static_cast<std::streamsize>(snap.size() * sizeof(double)));
    if (!os) throw std::runtime_error("save_encoder: write failed for " + path);
}

EncoderModel load_encoder(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_encoder: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kEncMagic, sizeof magic) != 0)
        throw std::runtime_error("load_encoder: bad container magic in " + path);
    std::int32_t kind, inCh, inExt, embedding, classes;
    double dropout;
    read_pod(is, kind);
    read_pod(is, inCh);
    read_pod(is, inExt);
    read_pod(is, embedding);
    read_pod(is, dropout);
    read_pod(is, classes);
    std::uint64_t count;
    read_pod(is, count);
    std::vector<double> snap(count);
    is.read(reinterpret_cast<char*>(snap.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) throw std::runtime_error("load_encoder: truncated file " + path);

    EncoderArch a;
    a.kind = static_cast<EncoderKind>(kind);
    a.in_channels = inCh;
    a.in_extent = inExt;
    a.embedding = embedding;
    a.dropout = dropout;
    EncoderModel model(a, classes, 0);
    model.restore(snap);
    return model;
}

}  // namespace leafrec
