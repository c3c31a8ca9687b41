#include "leafrec/cv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "leafrec/serialize.hpp"

namespace leafrec {

namespace {

enum Branch { kColor = 0, kVein, kXyp, kShape, kTexture, kColorStats, kFourier };

std::vector<double> branch_vector(const LeafFeatureSet& f, int branch) {
    switch (branch) {
        case kShape: return {f.shape.begin(), f.shape.end()};
        case kTexture: return {f.texture.begin(), f.texture.end()};
        case kColorStats: return {f.color_stats.begin(), f.color_stats.end()};
        case kFourier: return {f.fourier.begin(), f.fourier.end()};
        case kXyp: return {f.xy_proj.begin(), f.xy_proj.end()};
        default: throw std::logic_error("branch_vector: not a vector branch");
    }
}

Tensor image_tensor(const std::vector<LeafFeatureSet>& feats,
                    const std::vector<int>& idx, bool color, int side) {
    const int n = static_cast<int>(idx.size());
    const std::size_t plane = static_cast<std::size_t>(side) * side;
    Tensor t({n, color ? 3 : 1, side, side});
    for (int b = 0; b < n; ++b) {
        const auto& f = feats[idx[b]];
        double* dst = t.data.data() + static_cast<std::size_t>(b) *
                                          (color ? 3 : 1) * plane;
        if (color) {
            for (std::size_t i = 0; i < plane; ++i) dst[i] = f.color_input.r[i] / 255.0;
            for (std::size_t i = 0; i < plane; ++i)
                dst[plane + i] = f.color_input.g[i] / 255.0;
            for (std::size_t i = 0; i < plane; ++i)
                dst[2 * plane + i] = f.color_input.b[i] / 255.0;
        } else {
            for (std::size_t i = 0; i < plane; ++i) dst[i] = f.vein_input.v[i] / 255.0;
        }
    }
    return t;
}

Tensor vector_tensor(const std::vector<std::vector<double>>& rows, bool conv1d) {
    const int n = static_cast<int>(rows.size());
    const int d = static_cast<int>(rows[0].size());
    Tensor t(conv1d ? std::vector<int>{n, 1, d} : std::vector<int>{n, d});
    for (int b = 0; b < n; ++b)
        std::copy(rows[b].begin(), rows[b].end(),
                  t.data.begin() + static_cast<std::size_t>(b) * d);
    return t;
}

std::vector<int> gather_labels(const DatasetManifest& m, const std::vector<int>& idx) {
    std::vector<int> y;
    y.reserve(idx.size());
    for (int i : idx) y.push_back(m.entries[i].label);
    return y;
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
    mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    sd = std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

std::string cv_config_string(const CvConfig& cfg, FoldMode mode, int encoder_side) {
    std::ostringstream os;
    auto tc = [&](const char* name, const TrainConfig& c) {
        os << name << ":epochs=" << c.epochs << ",batch=" << c.batch
           << ",lr=" << format_double(c.lr) << ",mom=" << format_double(c.momentum)
           << ",l2=" << format_double(c.l2)
           << ",dropout=" << format_double(c.dropout) << ";";
    };
    os << "mode=" << fold_mode_name(mode) << ";side=" << encoder_side
       << ";seed=" << cfg.seed << ";";
    tc("conv2d", cfg.conv2d_cfg);
    tc("conv1d", cfg.conv1d_cfg);
    tc("dense", cfg.dense_cfg);
    os << "grid_c=";
    for (double c : cfg.grid.c_values) os << format_double(c) << " ";
    os << ";grid_gamma=";
    for (double g : cfg.grid.gamma_values) os << format_double(g) << " ";
    os << ";kkt=" << cfg.kkt_audit;
    return os.str();
}

std::vector<double> fuse(const std::vector<std::vector<double>>& embeddings) {
    if (embeddings.size() != 7)
        throw std::invalid_argument("fuse: expected 7 embeddings, got " +
                                    std::to_string(embeddings.size()));
    std::vector<double> out;
    out.reserve(700);
    for (const auto& e : embeddings) {
        if (e.size() != 100)
            throw std::invalid_argument("fuse: embeddings must be 100-d");
        out.insert(out.end(), e.begin(), e.end());
    }
    return out;
}

CvReport run_cv(const DatasetManifest& manifest, const FoldPlan& plan,
                const std::vector<LeafFeatureSet>& features, const CvConfig& cfg) {
    const std::size_t n = manifest.entries.size();
    if (features.size() != n)
        throw std::invalid_argument("run_cv: features/manifest size mismatch");
    audit_fold_plan(plan, n);  // integrity precheck before any training
    const int side = features[0].color_input.width;
    const int num_classes = manifest.num_classes();

    CvReport rep;
    rep.mode = plan.mode;
    rep.seed = cfg.seed;
    rep.config_hash = fnv1a(cv_config_string(cfg, plan.mode, side));
    rep.confusion.assign(num_classes, std::vector<long>(num_classes, 0));

    std::vector<int> folds = cfg.folds;
    if (folds.empty())
        for (int f = 1; f <= static_cast<int>(plan.splits.size()); ++f)
            folds.push_back(f);
    rep.partial = folds.size() != plan.splits.size();

    for (int fold : folds) {
        const FoldSplit& split = plan.splits.at(fold - 1);
        FoldResult fr;
        fr.fold = fold;
        try {
            auto train_y = gather_labels(manifest, split.train);
            auto valid_y = gather_labels(manifest, split.valid);
            auto test_y = gather_labels(manifest, split.test);

            // Fused embeddings per split, filled branch by branch.
            std::vector<std::vector<double>> fused_train(split.train.size()),
                fused_valid(split.valid.size()), fused_test(split.test.size());
            for (auto& v : fused_train) v.reserve(700);
            for (auto& v : fused_valid) v.reserve(700);
            for (auto& v : fused_test) v.reserve(700);

            for (int br = 0; br < 7; ++br) {
                EncoderArch arch;
                TrainConfig tc;
                Tensor tx, vx, sx;
                if (br == kColor || br == kVein) {
                    arch = {EncoderKind::Conv2d, br == kColor ? 3 : 1, side};
                    tc = cfg.conv2d_cfg;
                    tx = image_tensor(features, split.train, br == kColor, side);
                    vx = image_tensor(features, split.valid, br == kColor, side);
                    sx = image_tensor(features, split.test, br == kColor, side);
                } else if (br == kXyp) {
                    arch = {EncoderKind::Conv1d, 1, 60};
                    tc = cfg.conv1d_cfg;
                    auto rows = [&](const std::vector<int>& idx) {
                        std::vector<std::vector<double>> r;
                        for (int i : idx) r.push_back(branch_vector(features[i], br));
                        return r;
                    };
                    tx = vector_tensor(rows(split.train), true);
                    vx = vector_tensor(rows(split.valid), true);
                    sx = vector_tensor(rows(split.test), true);
                } else {
                    std::vector<std::vector<double>> tr, va, te;
                    for (int i : split.train) tr.push_back(branch_vector(features[i], br));
                    for (int i : split.valid) va.push_back(branch_vector(features[i], br));
                    for (int i : split.test) te.push_back(branch_vector(features[i], br));
                    // Dense-branch inputs are standardized on train stats.
                    Standardizer std_;
                    std_.fit(tr);
                    arch = {EncoderKind::Dense, 1, static_cast<int>(tr[0].size())};
                    tc = cfg.dense_cfg;
                    tx = vector_tensor(std_.apply_all(tr), false);
                    vx = vector_tensor(std_.apply_all(va), false);
                    sx = vector_tensor(std_.apply_all(te), false);
                }
                tc.seed = cfg.seed * 7919ull +
                          static_cast<std::uint64_t>(fold) * 101ull +
                          static_cast<std::uint64_t>(br) + 1ull;

                TrainResult tr_res =
                    train_encoder(tx, train_y, vx, valid_y, arch, num_classes, tc);
                fr.branch_test_acc[br] =
                    accuracy(head_predict(tr_res.model, sx), test_y);

                auto append = [&](const Tensor& x,
                                  std::vector<std::vector<double>>& fused) {
                    Tensor e = encode(tr_res.model, x);
                    for (std::size_t b = 0; b < fused.size(); ++b)
                        fused[b].insert(fused[b].end(), e.data.begin() + b * 100,
                                        e.data.begin() + (b + 1) * 100);
                };
                append(tx, fused_train);
                append(vx, fused_valid);
                append(sx, fused_test);
            }

            GridSearchResult gs = grid_search(fused_train, train_y, fused_valid,
                                              valid_y, cfg.grid);
            fr.svm_c = gs.c;
            fr.svm_gamma = gs.gamma;
            fr.valid_acc = gs.valid_accuracy;
            std::vector<int> pred = gs.model.predict_all(fused_test);
            fr.test_acc = accuracy(pred, test_y);
            for (std::size_t i = 0; i < pred.size(); ++i)
                rep.confusion[test_y[i]][pred[i]]++;

            if (cfg.kkt_audit)
                fr.kkt_ok = audit_multiclass_kkt(gs.model, fused_train, train_y);
        } catch (const std::exception& e) {
            fr.error = e.what();
        }
        rep.folds.push_back(std::move(fr));
    }

    std::vector<double> va, ta;
    for (const auto& f : rep.folds)
        if (f.error.empty()) {
            va.push_back(f.valid_acc);
            ta.push_back(f.test_acc);
        }
    if (!ta.empty()) {
        mean_std(va, rep.mean_valid, rep.std_valid);
        mean_std(ta, rep.mean_test, rep.std_test);
        for (int br = 0; br < 7; ++br) {
            double s = 0;
            for (const auto& f : rep.folds)
                if (f.error.empty()) s += f.branch_test_acc[br];
            rep.branch_mean[br] = s / static_cast<double>(ta.size());
        }
    }
    return rep;
}

std::string cv_report_csv(const CvReport& r) {
    std::ostringstream os;
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(r.config_hash));
    os << "# leafrec-cv v1\n";
    os << "# mode=" << fold_mode_name(r.mode) << " seed=" << r.seed
       << " config=" << hash << " partial=" << (r.partial ? 1 : 0) << "\n";
    os << "fold,valid_acc,test_acc,svm_c,svm_gamma,kkt_ok,error";
    for (const char* b : kBranchNames) os << ",acc_" << b;
    os << "\n";
    for (const auto& f : r.folds) {
        os << f.fold << ',' << format_double(f.valid_acc) << ','
           << format_double(f.test_acc) << ',' << format_double(f.svm_c) << ','
           << format_double(f.svm_gamma) << ',' << (f.kkt_ok ? 1 : 0) << ','
           << f.error;
        for (double a : f.branch_test_acc) os << ',' << format_double(a);
        os << "\n";
    }
    os << "mean,," << format_double(r.mean_test) << ",,,,";
    for (double a : r.branch_mean) os << ',' << format_double(a);
    os << "\n";
    os << "std,," << format_double(r.std_test) << ",,,,";
    for (int i = 0; i < 7; ++i) os << ',';
    os << "\n";
    os << "mean_valid," << format_double(r.mean_valid) << ",,,,,";
    for (int i = 0; i < 7; ++i) os << ',';
    os << "\n";
    os << "std_valid," << format_double(r.std_valid) << ",,,,,";
    for (int i = 0; i < 7; ++i) os << ',';
    os << "\n";
    for (std::size_t i = 0; i < r.confusion.size(); ++i)
        for (std::size_t j = 0; j < r.confusion[i].size(); ++j)
            if (r.confusion[i][j])
                os << "confusion," << i << ',' << j << ',' << r.confusion[i][j]
                   << "\n";
    return os.str();
}

std::string cv_report_svg(const CvReport& r) {
    // Bar chart: seven branch accuracies plus the fused model.
    std::vector<std::pair<std::string, double>> bars;
    for (int br = 0; br < 7; ++br) bars.emplace_back(kBranchNames[br], r.branch_mean[br]);
    bars.emplace_back("fused", r.mean_test);

    const int bw = 60, gap = 20, h = 260, base = 220, left = 50;
    const int w = left + static_cast<int>(bars.size()) * (bw + gap) + 20;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
       << "\" height=\"" << h << "\">\n";
    os << "<text x=\"10\" y=\"20\" font-size=\"13\">mean test accuracy per "
          "branch (seed "
       << r.seed << ")</text>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        double frac = tick / 4.0;
        int y = base - static_cast<int>(frac * 180);
        os << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << w - 10
           << "\" y2=\"" << y << "\" stroke=\"#ccc\"/>\n";
        os << "<text x=\"5\" y=\"" << y + 4 << "\" font-size=\"10\">"
           << format_double(frac) << "</text>\n";
    }
    for (std::size_t i = 0; i < bars.size(); ++i) {
        int x = left + static_cast<int>(i) * (bw + gap);
        int bh = static_cast<int>(bars[i].second * 180);
        os << "<rect x=\"" << x << "\" y=\"" << base - bh << "\" width=\"" << bw
           << "\" height=\"" << bh << "\" fill=\""
           << (bars[i].first == "fused" ? "#2a7" : "#47a") << "\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << base + 15
           << "\" font-size=\"11\">" << bars[i].first << "</text>\n";
        os << "<text x=\"" << x << "\" y=\"" << base - bh - 4
           << "\" font-size=\"10\">" << format_double(std::round(bars[i].second * 1000) / 1000)
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace leafrec
