// leafrec command-line front end: dataset preparation, feature extraction,
// encoder training, cross-validation and report rendering.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "leafrec/cv.hpp"
#include "leafrec/features.hpp"
#include "leafrec/folds.hpp"
#include "leafrec/manifest.hpp"
#include "leafrec/serialize.hpp"
#include "leafrec/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace leafrec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

struct Options {
    std::string config_path;
    std::string dataset, ranges, manifest_path = "manifest.csv";
    std::string features = [] {
        const char* env = std::getenv("LEAFREC_CACHE");
        return std::string(env ? env : "features");
    }();
    std::string out = "out";
    std::string report_path;
    int side = 64;
    bool debug = false;
    std::string mode = "random";
    std::uint64_t seed = 1;
    std::vector<int> folds;
    bool kkt = false;
    int per_class = 40;
    CvConfig cv;
};

void load_train_cfg(const json& j, TrainConfig& c) {
    if (j.contains("epochs")) c.epochs = j["epochs"];
    if (j.contains("batch")) c.batch = j["batch"];
    if (j.contains("lr")) c.lr = j["lr"];
    if (j.contains("momentum")) c.momentum = j["momentum"];
    if (j.contains("l2")) c.l2 = j["l2"];
    if (j.contains("dropout")) c.dropout = j["dropout"];
}

/// JSON config supplies defaults; explicitly passed flags override it.
void apply_config_file(Options& o) {
    if (o.config_path.empty()) return;
    json j = json::parse(read_text_file(o.config_path));
    if (j.contains("dataset")) o.dataset = j["dataset"];
    if (j.contains("manifest")) o.manifest_path = j["manifest"];
    if (j.contains("features")) o.features = j["features"];
    if (j.contains("out")) o.out = j["out"];
    if (j.contains("side")) o.side = j["side"];
    if (j.contains("mode")) o.mode = j["mode"];
    if (j.contains("seed")) o.seed = j["seed"];
    if (j.contains("kkt")) o.kkt = j["kkt"];
    if (j.contains("folds")) o.folds = j["folds"].get<std::vector<int>>();
    if (j.contains("conv2d")) load_train_cfg(j["conv2d"], o.cv.conv2d_cfg);
    if (j.contains("conv1d")) load_train_cfg(j["conv1d"], o.cv.conv1d_cfg);
    if (j.contains("dense")) load_train_cfg(j["dense"], o.cv.dense_cfg);
    if (j.contains("grid_c"))
        o.cv.grid.c_values = j["grid_c"].get<std::vector<double>>();
    if (j.contains("grid_gamma"))
        o.cv.grid.gamma_values = j["grid_gamma"].get<std::vector<double>>();
}

FoldMode parse_mode(const std::string& m) {
    if (m == "indexed") return FoldMode::Indexed;
    if (m == "random" || m == "random-stratified") return FoldMode::RandomStratified;
    throw CLI::ValidationError("--mode must be 'indexed' or 'random'");
}

std::vector<LeafFeatureSet> load_features(const DatasetManifest& m,
                                          FeatureStore& store) {
    std::vector<LeafFeatureSet> feats(m.entries.size());
    for (const auto& e : m.entries) {
        if (!store.has(e.index))
            throw std::runtime_error(
                "features missing for entry " + std::to_string(e.index) +
                " (" + e.path + "); run `leafrec extract` first");
        feats[e.index] = store.get(e.index);
    }
    return feats;
}

int cmd_manifest(const Options& o) {
    DatasetManifest m = o.ranges.empty()
                            ? scan_dataset(o.dataset)
                            : scan_filename_ranges(o.dataset, o.ranges);
    save_manifest(m, o.manifest_path);
    std::vector<int> hist(m.num_classes(), 0);
    for (const auto& e : m.entries) hist[e.label]++;
    std::cout << m.entries.size() << " images, " << m.num_classes()
              << " classes -> " << o.manifest_path << "\n";
    for (int c = 0; c < m.num_classes(); ++c)
        std::cout << "  " << m.class_names[c] << ": " << hist[c] << "\n";
    return kExitOk;
}

int cmd_extract(const Options& o) {
    DatasetManifest m = load_manifest(o.manifest_path);
    FeatureStore store(o.features, o.side);
    ExtractOptions opts;
    opts.encoder_side = o.side;
    opts.debug = o.debug;
    if (o.debug) opts.debug_dir = (fs::path(o.features) / "debug").string();
    ExtractSummary s = extract_all(m, store, opts);
    std::cout << "extracted " << s.extracted << ", cached " << s.cached
              << ", failed " << s.failures.size() << "\n";
    for (const auto& [idx, msg] : s.failures)
        std::cerr << "  entry " << idx << ": " << msg << "\n";
    return s.failures.empty() ? kExitOk : kExitPartial;
}

CvConfig make_cv_config(const Options& o) {
    CvConfig cfg = o.cv;
    cfg.seed = o.seed;
    cfg.folds = o.folds;
    cfg.kkt_audit = o.kkt;
    cfg.conv2d_cfg.seed = cfg.conv1d_cfg.seed = cfg.dense_cfg.seed = o.seed;
    return cfg;
}

int cmd_cv(const Options& o) {
    DatasetManifest m = load_manifest(o.manifest_path);
    FeatureStore store(o.features, o.side);
    auto feats = load_features(m, store);
    FoldPlan plan = make_fold_plan(m, parse_mode(o.mode), o.seed);
    CvConfig cfg = make_cv_config(o);

    CvReport rep = run_cv(m, plan, feats, cfg);
    fs::create_directories(o.out);
    write_text_file((fs::path(o.out) / "cv_report.csv").string(),
                    cv_report_csv(rep));
    write_text_file((fs::path(o.out) / "cv_report.svg").string(),
                    cv_report_svg(rep));

    std::cout << "mode " << fold_mode_name(rep.mode) << ", seed " << rep.seed
              << (rep.partial ? " (partial)" : "") << "\n";
    std::cout << "test accuracy " << rep.mean_test * 100 << "% +- "
              << rep.std_test * 100 << "%\n";
    bool any_error = false;
    for (const auto& f : rep.folds)
        if (!f.error.empty()) {
            std::cerr << "fold " << f.fold << " failed: " << f.error << "\n";
            any_error = true;
        }
    return any_error ? kExitPartial : kExitOk;
}

int cmd_train_encoders(const Options& o) {
    DatasetManifest m = load_manifest(o.manifest_path);
    FeatureStore store(o.features, o.side);
    auto feats = load_features(m, store);
    FoldPlan plan = make_fold_plan(m, parse_mode(o.mode), o.seed);
    CvConfig cfg = make_cv_config(o);
    cfg.folds = {1};  // fold 1's split provides the train/valid partition

    // Reuse run_cv for the heavy lifting would retrain the SVM too; for
    // standalone encoder training we train and serialize directly.
    const FoldSplit& split = plan.splits[0];
    auto labels = [&](const std::vector<int>& idx) {
        std::vector<int> y;
        for (int i : idx) y.push_back(m.entries[i].label);
        return y;
    };
    auto train_y = labels(split.train);
    auto valid_y = labels(split.valid);
    fs::create_directories(o.out);

    for (int br = 0; br < 7; ++br) {
        EncoderArch arch;
        TrainConfig tc;
        Tensor tx, vx;
        auto rows = [&](const std::vector<int>& idx, int branch) {
            std::vector<std::vector<double>> r;
            for (int i : idx) {
                const auto& f = feats[i];
                switch (branch) {
                    case 3: r.emplace_back(f.shape.begin(), f.shape.end()); break;
                    case 4: r.emplace_back(f.texture.begin(), f.texture.end()); break;
                    case 5:
                        r.emplace_back(f.color_stats.begin(), f.color_stats.end());
                        break;
                    case 6: r.emplace_back(f.fourier.begin(), f.fourier.end()); break;
                    default:
                        r.emplace_back(f.xy_proj.begin(), f.xy_proj.end());
                }
            }
            return r;
        };
        auto img_tensor = [&](const std::vector<int>& idx, bool color) {
            int s = o.side;
            std::size_t plane = static_cast<std::size_t>(s) * s;
            Tensor t({static_cast<int>(idx.size()), color ? 3 : 1, s, s});
            for (std::size_t b = 0; b < idx.size(); ++b) {
                const auto& f = feats[idx[b]];
                double* dst = t.data.data() + b * (color ? 3 : 1) * plane;
                if (color)
                    for (std::size_t i = 0; i < plane; ++i) {
                        dst[i] = f.color_input.r[i] / 255.0;
                        dst[plane + i] = f.color_input.g[i] / 255.0;
                        dst[2 * plane + i] = f.color_input.b[i] / 255.0;
                    }
                else
                    for (std::size_t i = 0; i < plane; ++i)
                        dst[i] = f.vein_input.v[i] / 255.0;
            }
            return t;
        };
        auto vec_tensor = [&](std::vector<std::vector<double>> r, bool conv1d) {
            int n = static_cast<int>(r.size()), d = static_cast<int>(r[0].size());
            Tensor t(conv1d ? std::vector<int>{n, 1, d} : std::vector<int>{n, d});
            for (int b = 0; b < n; ++b)
                std::copy(r[b].begin(), r[b].end(),
                          t.data.begin() + static_cast<std::size_t>(b) * d);
            return t;
        };

        if (br <= 1) {
            arch = {EncoderKind::Conv2d, br == 0 ? 3 : 1, o.side};
            tc = cfg.conv2d_cfg;
            tx = img_tensor(split.train, br == 0);
            vx = img_tensor(split.valid, br == 0);
        } else if (br == 2) {
            arch = {EncoderKind::Conv1d, 1, 60};
            tc = cfg.conv1d_cfg;
            tx = vec_tensor(rows(split.train, br), true);
            vx = vec_tensor(rows(split.valid, br), true);
        } else {
            auto tr = rows(split.train, br);
            Standardizer std_;
            std_.fit(tr);
            arch = {EncoderKind::Dense, 1, static_cast<int>(tr[0].size())};
            tc = cfg.dense_cfg;
            tx = vec_tensor(std_.apply_all(tr), false);
            vx = vec_tensor(std_.apply_all(rows(split.valid, br)), false);
        }
        tc.seed = o.seed * 7919ull + 101ull + static_cast<std::uint64_t>(br) + 1;
        TrainResult res =
            train_encoder(tx, train_y, vx, valid_y, arch, m.num_classes(), tc);
        std::string path =
            (fs::path(o.out) / (std::string(kBranchNames[br]) + ".enc")).string();
        save_encoder(res.model, path);
        std::cout << kBranchNames[br] << ": best valid acc "
                  << res.best_valid_acc * 100 << "% -> " << path << "\n";
    }
    return kExitOk;
}

int cmd_report(const Options& o) {
    std::string body = read_text_file(o.report_path);
    std::cout << body;
    return kExitOk;
}

int cmd_synth(const Options& o) {
    generate_synth_dataset(o.out, o.per_class, o.seed);
    std::cout << "wrote " << kSynthClasses * o.per_class << " images ("
              << kSynthClasses << " classes) under " << o.out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"leaf recognition toolkit"};
    app.require_subcommand(1);
    Options o;

    app.add_option("--config", o.config_path, "JSON config file (flags override)");

    auto add_common = [&](CLI::App* c) {
        c->add_option("--manifest", o.manifest_path, "manifest CSV path");
        c->add_option("--features", o.features,
                      "feature cache directory (env LEAFREC_CACHE)");
        c->add_option("--side", o.side, "encoder input resolution");
        c->add_option("--seed", o.seed, "global RNG seed");
    };

    auto* synth = app.add_subcommand("synth", "generate the synthetic dataset");
    synth->add_option("--out", o.out, "output directory")->required();
    synth->add_option("--per-class", o.per_class, "images per class");
    synth->add_option("--seed", o.seed, "generator seed");

    auto* man = app.add_subcommand("manifest", "scan a dataset into a manifest");
    man->add_option("--dataset", o.dataset, "dataset root")->required();
    man->add_option("--ranges", o.ranges,
                    "filename-range class map (Flavia layout)");
    man->add_option("--out", o.manifest_path, "manifest output path");

    auto* ext = app.add_subcommand("extract", "extract features for a manifest");
    add_common(ext);
    ext->add_flag("--debug", o.debug, "dump intermediate images");

    auto* cv = app.add_subcommand("cv", "run 10-fold cross-validation");
    add_common(cv);
    cv->add_option("--out", o.out, "report output directory");
    cv->add_option("--mode", o.mode, "fold mode: indexed | random");
    cv->add_option("--folds", o.folds, "1-based fold subset");
    cv->add_flag("--kkt", o.kkt, "run the SVM KKT audit per fold");
    cv->add_option("--conv-epochs", o.cv.conv2d_cfg.epochs, "conv2d epochs");
    cv->add_option("--conv1d-epochs", o.cv.conv1d_cfg.epochs, "conv1d epochs");
    cv->add_option("--dense-epochs", o.cv.dense_cfg.epochs, "dense epochs");

    auto* tre = app.add_subcommand("train-encoders",
                                   "train and serialize the seven encoders");
    add_common(tre);
    tre->add_option("--out", o.out, "encoder output directory");
    tre->add_option("--mode", o.mode, "fold mode for the train/valid split");

    auto* repc = app.add_subcommand("report", "print a CV report CSV");
    repc->add_option("--report", o.report_path, "cv_report.csv path")->required();

    for (auto* c : {synth, man, ext, cv, tre, repc})
        c->add_option("--config", o.config_path, "JSON config file (flags override)");

    try {
        app.parse(argc, argv);
        apply_config_file(o);
        // Re-parse so explicit flags beat config-file values.
        app.clear();
        app.parse(argc, argv);

        if (synth->parsed()) return cmd_synth(o);
        if (man->parsed()) return cmd_manifest(o);
        if (ext->parsed()) return cmd_extract(o);
        if (cv->parsed()) return cmd_cv(o);
        if (tre->parsed()) return cmd_train_encoders(o);
        if (repc->parsed()) return cmd_report(o);
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
