#include "leafrec/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

namespace leafrec {

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
    if (x.size() != y.size())
        throw std::invalid_argument("rbf_kernel: length mismatch");
    double d2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

void Standardizer::fit(const std::vector<std::vector<double>>& x) {
    if (x.empty()) throw std::invalid_argument("standardizer: empty fit set");
    const std::size_t dim = x[0].size();
    mean.assign(dim, 0.0);
    scale.assign(dim, 1.0);
    for (const auto& row : x)
        for (std::size_t d = 0; d < dim; ++d) mean[d] += row[d];
    for (auto& m : mean) m /= static_cast<double>(x.size());
    std::vector<double> var(dim, 0.0);
    for (const auto& row : x)
        for (std::size_t d = 0; d < dim; ++d)
            var[d] += (row[d] - mean[d]) * (row[d] - mean[d]);
    for (std::size_t d = 0; d < dim; ++d) {
        double s = std::sqrt(var[d] / static_cast<double>(x.size()));
        scale[d] = s > 0 ? s : 1.0;
    }
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
    if (x.size() != mean.size())
        throw std::invalid_argument("standardizer: dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) out[d] = (x[d] - mean[d]) / scale[d];
    return out;
}

std::vector<std::vector<double>> Standardizer::apply_all(
    const std::vector<std::vector<double>>& x) const {
    std::vector<std::vector<double>> out;
    out.reserve(x.size());
    for (const auto& row : x) out.push_back(apply(row));
    return out;
}

double BinarySvm::decision(std::span<const double> x) const {
    double acc = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i)
        acc += coef[i] * rbf_kernel(support_vectors[i], x, gamma);
    return acc;
}

double dual_objective(const std::vector<std::vector<double>>& x,
                      const std::vector<int>& y, const std::vector<double>& alpha,
                      double gamma) {
    const std::size_t n = x.size();
    double obj = 0;
    for (std::size_t i = 0; i < n; ++i) obj += alpha[i];
    for (std::size_t i = 0; i < n; ++i) {
        if (alpha[i] == 0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (alpha[j] == 0) continue;
            obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] *
                   rbf_kernel(x[i], x[j], gamma);
        }
    }
    return obj;
}

BinarySvmFit train_binary_fit(const std::vector<std::vector<double>>& x,
                              const std::vector<int>& y, double c, double gamma,
                              const SmoOptions& opts) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n)
        throw std::invalid_argument("train_binary: need matched inputs, n >= 2");
    bool hasPos = false, hasNeg = false;
    for (int yi : y) {
        if (yi == 1) hasPos = true;
        else if (yi == -1) hasNeg = true;
        else throw std::invalid_argument("train_binary: labels must be -1/+1");
    }
    if (!hasPos || !hasNeg)
        throw std::invalid_argument("train_binary: both classes must be present");

    // Full Gram cache.
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double v = rbf_kernel(x[i], x[j], gamma);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }

    std::vector<double> alpha(n, 0.0);
    // f_i = sum_j alpha_j y_j K_ij - y_i; at alpha = 0 this is -y_i.
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = -static_cast<double>(y[i]);

    auto in_up = [&](std::size_t i) {
        return (y[i] == 1 && alpha[i] < c) || (y[i] == -1 && alpha[i] > 0);
    };
    auto in_low = [&](std::size_t i) {
        return (y[i] == 1 && alpha[i] > 0) || (y[i] == -1 && alpha[i] < c);
    };

    double bUp = 0, bLow = 0;
    std::size_t pass = 0;
    for (;; ++pass) {
        // Maximal violating pair.
        std::size_t iUp = n, iLow = n;
        bUp = std::numeric_limits<double>::infinity();
        bLow = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (in_up(i) && f[i] < bUp) {
                bUp = f[i];
                iUp = i;
            }
            if (in_low(i) && f[i] > bLow) {
                bLow = f[i];
                iLow = i;
            }
        }
        if (iUp == n || iLow == n || bLow - bUp <= 2 * opts.tol) break;
        if (pass >= opts.max_passes)
            throw ConvergenceError("train_binary: SMO exceeded " +
                                   std::to_string(opts.max_passes) +
                                   " passes, dual gap " +
                                   std::to_string(bLow - bUp));

        const std::size_t i = iLow, j = iUp;  // E_i > E_j
        const double s = static_cast<double>(y[i]) * y[j];
        double lo, hi;
        if (y[i] != y[j]) {
            lo = std::max(0.0, alpha[j] - alpha[i]);
            hi = std::min(c, c + alpha[j] - alpha[i]);
        } else {
            lo = std::max(0.0, alpha[i] + alpha[j] - c);
            hi = std::min(c, alpha[i] + alpha[j]);
        }
        double eta = k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j];
        double ajOld = alpha[j], aiOld = alpha[i];
        double ajNew;
        if (eta > 1e-12) {
            ajNew = ajOld + y[j] * (f[i] - f[j]) / eta;
            ajNew = std::clamp(ajNew, lo, hi);
        } else {
            // Linear along the constraint direction; jump to the helpful bound.
            ajNew = y[j] * (f[i] - f[j]) > 0 ? hi : lo;
        }
        double aiNew = aiOld + s * (ajOld - ajNew);
        // Snap to the exact box bounds so rounding residue (e.g. an alpha
        // of 1e-16) cannot keep a variable in the working sets and wedge
        // the pair selection against a zero-width feasible interval.
        const double snap = 1e-12 * c;
        auto snapped = [&](double a) {
            if (a < snap) return 0.0;
            if (a > c - snap) return c;
            return a;
        };
        aiNew = snapped(aiNew);
        ajNew = snapped(ajNew);
        if (aiNew == aiOld && ajNew == ajOld)
            throw ConvergenceError("train_binary: SMO made no progress at pass " +
                                   std::to_string(pass) + ", dual gap " +
                                   std::to_string(bLow - bUp));
        alpha[i] = aiNew;
        alpha[j] = ajNew;

        double di = (aiNew - aiOld) * y[i];
        double dj = (ajNew - ajOld) * y[j];
        for (std::size_t t = 0; t < n; ++t)
            f[t] += di * k[i * n + t] + dj * k[j * n + t];
    }

    BinarySvmFit fit;
    fit.alpha = alpha;
    fit.svm.gamma = gamma;
    fit.svm.c = c;
    fit.svm.bias = -(bUp + bLow) / 2.0;
    for (std::size_t i = 0; i < n; ++i)
        if (alpha[i] > 1e-12) {
            fit.svm.support_vectors.push_back(x[i]);
            fit.svm.coef.push_back(alpha[i] * y[i]);
        }
    return fit;
}

BinarySvm train_binary(const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, double c, double gamma,
                       const SmoOptions& opts) {
    return train_binary_fit(x, y, c, gamma, opts).svm;
}

SvmModel train_multiclass(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& labels, double c, double gamma,
                          bool standardize, const SmoOptions& opts) {
    if (x.size() != labels.size() || x.empty())
        throw std::invalid_argument("train_multiclass: empty or mismatched inputs");

    SvmModel model;
    if (standardize) {
        model.standardizer.fit(x);
    } else {
        model.standardizer.mean.assign(x[0].size(), 0.0);
        model.standardizer.scale.assign(x[0].size(), 1.0);
    }
    std::vector<std::vector<double>> xs = model.standardizer.apply_all(x);

    std::map<int, std::vector<std::size_t>> byClass;
    for (std::size_t i = 0; i < labels.size(); ++i) byClass[labels[i]].push_back(i);
    if (byClass.size() < 2)
        throw std::invalid_argument("train_multiclass: need at least 2 classes");
    for (auto& [lbl, idx] : byClass) model.class_labels.push_back(lbl);

    const int kClasses = static_cast<int>(model.class_labels.size());
    for (int a = 0; a < kClasses; ++a)
        for (int b = a + 1; b < kClasses; ++b) {
            std::vector<std::vector<double>> px;
            std::vector<int> py;
            // Canonical ordering by original sample index keeps SMO
            // deterministic under permutations of the input.
            std::vector<std::size_t> merged;
            for (auto i : byClass[model.class_labels[a]]) merged.push_back(i);
            for (auto i : byClass[model.class_labels[b]]) merged.push_back(i);
            std::sort(merged.begin(), merged.end());
            for (auto i : merged) {
                px.push_back(xs[i]);
                py.push_back(labels[i] == model.class_labels[a] ? 1 : -1);
            }
            model.pairs.push_back({a, b, train_binary(px, py, c, gamma, opts)});
        }
    return model;
}

int SvmModel::predict(std::span<const double> x) const {
    std::vector<double> xs = standardizer.apply(x);
    const int kClasses = static_cast<int>(class_labels.size());
    std::vector<int> votes(kClasses, 0);
    std::vector<double> margin(kClasses, 0.0);
    for (const auto& pr : pairs) {
        double d = pr.svm.decision(xs);
        (d > 0 ? votes[pr.a] : votes[pr.b])++;
        margin[pr.a] += d;
        margin[pr.b] -= d;
    }
    int best = 0;
    for (int cix = 1; cix < kClasses; ++cix) {
        if (votes[cix] > votes[best] ||
            (votes[cix] == votes[best] && margin[cix] > margin[best]))
            best = cix;
    }
    return class_labels[best];
}

std::vector<int> SvmModel::predict_all(
    const std::vector<std::vector<double>>& x) const {
    std::vector<int> out;
    out.reserve(x.size());
    for (const auto& row : x) out.push_back(predict(row));
    return out;
}

bool kkt_satisfied(const std::vector<std::vector<double>>& x,
                   const std::vector<int>& y, const BinarySvmFit& fit,
                   double tol) {
    const double slack = tol + 1e-9;  // floating-point headroom
    const double c = fit.svm.c;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double yf = y[i] * fit.svm.decision(x[i]);
        double a = fit.alpha[i];
        if (a < -1e-12 || a > c + 1e-12) return false;
        if (a <= 1e-12) {
            if (yf < 1 - slack) return false;
        } else if (a >= c - 1e-12) {
            if (yf > 1 + slack) return false;
        } else {
            if (std::abs(yf - 1) > slack) return false;
        }
    }
    return true;
}

bool audit_multiclass_kkt(const SvmModel& model,
                          const std::vector<std::vector<double>>& x,
                          const std::vector<int>& labels, double tol,
                          const SmoOptions& opts) {
    std::vector<std::vector<double>> xs = model.standardizer.apply_all(x);
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(i);
    for (const auto& pr : model.pairs) {
        int la = model.class_labels[pr.a], lb = model.class_labels[pr.b];
        std::vector<std::size_t> merged;
        for (auto i : by_class[la]) merged.push_back(i);
        for (auto i : by_class[lb]) merged.push_back(i);
        std::sort(merged.begin(), merged.end());
        std::vector<std::vector<double>> px;
        std::vector<int> py;
        for (auto i : merged) {
            px.push_back(xs[i]);
            py.push_back(labels[i] == la ? 1 : -1);
        }
        BinarySvmFit fit =
            train_binary_fit(px, py, pr.svm.c, pr.svm.gamma, opts);
        if (!kkt_satisfied(px, py, fit, tol)) return false;
    }
    return true;
}

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw std::invalid_argument("accuracy: mismatched or empty inputs");
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == truth[i];
    return static_cast<double>(hit) / static_cast<double>(pred.size());
}

GridSearchResult grid_search(const std::vector<std::vector<double>>& train_x,
                             const std::vector<int>& train_y,
                             const std::vector<std::vector<double>>& valid_x,
                             const std::vector<int>& valid_y,
                             const GridSearchSpec& spec) {
    if (train_x.empty() || valid_x.empty())
        throw std::invalid_argument("grid_search: empty train or validation set");
    std::vector<double> cs = spec.c_values;
    std::vector<double> gs = spec.gamma_values;
    if (gs.empty()) {
        double dim = static_cast<double>(train_x[0].size());
        gs = {1e-3 / dim, 1e-2 / dim, 1e-1 / dim, 1.0 / dim};
    }
    std::sort(cs.begin(), cs.end());
    std::sort(gs.begin(), gs.end());

    GridSearchResult best;
    best.valid_accuracy = -1.0;
    for (double c : cs)
        for (double g : gs) {
            SvmModel m = train_multiclass(train_x, train_y, c, g);
            double acc = accuracy(m.predict_all(valid_x), valid_y);
            if (acc > best.valid_accuracy) {
                best = {c, g, acc, std::move(m)};
            }
        }
    return best;
}

// ---------- serialization ----------

namespace {
constexpr char kSvmMagic[8] = {'L', 'E', 'A', 'F', 'S', 'V', 'M', '1'};

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
void read_pod(std::ifstream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
}

void write_vec(std::ofstream& os, const std::vector<double>& v) {
    write_pod(os, static_cast<std::uint64_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_vec(std::ifstream& is) {
    std::uint64_t n;
    read_pod(is, n);
    std::vector<double> v(n);
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    return v;
}
}  // namespace

void save_svm(const SvmModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_svm: cannot write " + path);
    os.write(kSvmMagic, sizeof kSvmMagic);
    write_vec(os, model.standardizer.mean);
    write_vec(os, model.standardizer.scale);
    write_pod(os, static_cast<std::uint64_t>(model.class_labels.size()));
    for (int lbl : model.class_labels) write_pod(os, static_cast<std::int32_t>(lbl));
    write_pod(os, static_cast<std::uint64_t>(model.pairs.size()));
    for (const auto& pr : model.pairs) {
        write_pod(os, static_cast<std::int32_t>(pr.a));
        write_pod(os, static_cast<std::int32_t>(pr.b));
        write_pod(os, pr.svm.bias);
        write_pod(os, pr.svm.gamma);
        write_pod(os, pr.svm.c);
        write_vec(os, pr.svm.coef);
        write_pod(os, static_cast<std::uint64_t>(pr.svm.support_vectors.size()));
        for (const auto& sv : pr.svm.support_vectors) write_vec(os, sv);
    }
    if (!os) throw std::runtime_error("save_svm: write failed for " + path);
}

SvmModel load_svm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_svm: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kSvmMagic, sizeof magic) != 0)
        throw std::runtime_error("load_svm: bad container magic in " + path);
    SvmModel model;
    model.standardizer.mean = read_vec(is);
    model.standardizer.scale = read_vec(is);
    std::uint64_t n;
    read_pod(is, n);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::int32_t lbl;
        read_pod(is, lbl);
        model.class_labels.push_back(lbl);
    }
    read_pod(is, n);
    for (std::uint64_t i = 0; i < n; ++i) {
        SvmModel::Pair pr;
        std::int32_t a, b;
        read_pod(is, a);
        read_pod(is, b);
        pr.a = a;
        pr.b = b;
        read_pod(is, pr.svm.bias);
        read_pod(is, pr.svm.gamma);
        read_pod(is, pr.svm.c);
        pr.svm.coef = read_vec(is);
        std::uint64_t nsv;
        read_pod(is, nsv);
        for (std::uint64_t s = 0; s < nsv; ++s)
            pr.svm.support_vectors.push_back(read_vec(is));
        model.pairs.push_back(std::move(pr));
    }
    if (!is) throw std::runtime_error("load_svm: truncated file " + path);
    return model;
}

}  // namespace leafrec
