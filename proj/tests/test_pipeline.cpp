#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "leafrec/cv.hpp"
#include "leafrec/features.hpp"
#include "leafrec/folds.hpp"
#include "leafrec/manifest.hpp"
#include "leafrec/synth.hpp"

using namespace leafrec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("leafrec_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

DatasetManifest fake_manifest(int n, int classes = 4) {
    DatasetManifest m;
    for (int c = 0; c < classes; ++c) m.class_names.push_back("c" + std::to_string(c));
    for (int i = 0; i < n; ++i) {
        ManifestEntry e;
        char buf[32];
        std::snprintf(buf, sizeof buf, "img_%04d.png", i);
        e.path = std::string("/data/") + buf;
        e.label = i % classes;
        e.index = i;
        m.entries.push_back(e);
    }
    return m;
}

}  // namespace

TEST_CASE("scan_dataset builds a sorted manifest from class directories") {
    TempDir td("scan");
    for (const char* cls : {"birch", "aspen"}) {
        fs::create_directories(td.path / cls);
        for (int i = 0; i < 3; ++i) {
            RasterImage img(8, 8, 100, 120, 90);
            save_png(img, (td.path / cls /
                           ("leaf_" + std::string(cls) + std::to_string(i) + ".png"))
                              .string());
        }
    }
    DatasetManifest m = scan_dataset(td.path.string());
    CHECK(m.class_names == std::vector<std::string>{"aspen", "birch"});
    REQUIRE(m.entries.size() == 6);
    // Sorted by basename; indices are consecutive.
    for (int i = 0; i < 6; ++i) CHECK(m.entries[i].index == i);
    for (std::size_t i = 1; i < m.entries.size(); ++i)
        CHECK(fs::path(m.entries[i - 1].path).filename().string() <=
              fs::path(m.entries[i].path).filename().string());
}

TEST_CASE("manifest save/load round trip") {
    TempDir td("manifest");
    DatasetManifest m = fake_manifest(12, 3);
    std::string p = (td.path / "m.csv").string();
    save_manifest(m, p);
    DatasetManifest back = load_manifest(p);
    CHECK(back.class_names == m.class_names);
    REQUIRE(back.entries.size() == m.entries.size());
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        CHECK(back.entries[i].path == m.entries[i].path);
        CHECK(back.entries[i].label == m.entries[i].label);
        CHECK(back.entries[i].index == m.entries[i].index);
    }
}

TEST_CASE("load_manifest rejects garbage") {
    TempDir td("badmanifest");
    std::string p = (td.path / "m.csv").string();
    std::ofstream(p) << "not,a,manifest\n1,2,3\n";
    CHECK_THROWS(load_manifest(p));
}

TEST_CASE("scan_filename_ranges assigns classes by numeric interval") {
    TempDir td("ranges");
    for (int i : {1001, 1002, 1003, 2001, 2002}) {
        RasterImage img(8, 8, 90, 130, 80);
        save_png(img, (td.path / (std::to_string(i) + ".png")).string());
    }
    std::string map = (td.path / "ranges.csv").string();
    std::ofstream(map) << "1001,1003,oak\n2001,2002,elm\n";
    DatasetManifest m = scan_filename_ranges(td.path.string(), map);
    REQUIRE(m.entries.size() == 5);
    CHECK(m.class_names == std::vector<std::string>{"oak", "elm"});
    for (auto& e : m.entries) {
        int stem = std::stoi(fs::path(e.path).stem().string());
        CHECK(m.class_names[e.label] == (stem < 2000 ? "oak" : "elm"));
    }
}

TEST_CASE("indexed fold plan reproduces the rotation table") {
    DatasetManifest m = fake_manifest(40);
    FoldPlan plan = make_fold_plan(m, FoldMode::Indexed);
    REQUIRE(plan.splits.size() == 10);
    audit_fold_plan(plan, m.entries.size());

    // Sorted position p: test in fold (p%10)+1, validation in fold
    // ((p+1)%10)+1. Check the role of the first ten entries in every fold.
    for (int p = 0; p < 10; ++p) {
        int test_fold = p % 10;        // 0-based
        int valid_fold = (p + 1) % 10;
        for (int f = 0; f < 10; ++f) {
            const FoldSplit& s = plan.splits[f];
            bool in_test = std::count(s.test.begin(), s.test.end(), p) > 0;
            bool in_valid = std::count(s.valid.begin(), s.valid.end(), p) > 0;
            bool in_train = std::count(s.train.begin(), s.train.end(), p) > 0;
            CHECK(in_test == (f == test_fold));
            CHECK(in_valid == (f == valid_fold));
            CHECK(in_train == (f != test_fold && f != valid_fold));
        }
    }
}

TEST_CASE("fold sizes are balanced") {
    for (int n : {40, 47, 103}) {
        DatasetManifest m = fake_manifest(n);
        FoldPlan plan = make_fold_plan(m, FoldMode::Indexed);
        for (auto& s : plan.splits) {
            auto sz = static_cast<int>(s.test.size());
            CHECK(sz >= n / 10);
            CHECK(sz <= (n + 9) / 10);
            CHECK(s.train.size() + s.valid.size() + s.test.size() ==
                  static_cast<std::size_t>(n));
        }
    }
}

TEST_CASE("random stratified folds balance every class") {
    DatasetManifest m = fake_manifest(80, 4);  // 20 per class
    FoldPlan plan = make_fold_plan(m, FoldMode::RandomStratified, 5);
    audit_fold_plan(plan, m.entries.size());
    for (auto& s : plan.splits) {
        int per_class[4] = {0, 0, 0, 0};
        for (int i : s.test) per_class[m.entries[i].label]++;
        for (int c = 0; c < 4; ++c) CHECK(per_class[c] == 2);
    }
    // Validation of fold f is the test set of the previous fold: a sample
    // tested in fold f rotates into validation one fold later.
    for (int f = 0; f < 10; ++f) {
        std::set<int> v(plan.splits[f].valid.begin(), plan.splits[f].valid.end());
        std::set<int> t(plan.splits[(f + 9) % 10].test.begin(),
                        plan.splits[(f + 9) % 10].test.end());
        CHECK(v == t);
    }
    // Same seed reproduces the plan; a different seed changes it.
    FoldPlan again = make_fold_plan(m, FoldMode::RandomStratified, 5);
    FoldPlan other = make_fold_plan(m, FoldMode::RandomStratified, 6);
    CHECK(again.splits[0].test == plan.splits[0].test);
    CHECK(other.splits[0].test != plan.splits[0].test);
}

TEST_CASE("stratified folds reject classes with fewer than ten samples") {
    DatasetManifest m = fake_manifest(9, 1);
    CHECK_THROWS(make_fold_plan(m, FoldMode::RandomStratified, 1));
}

TEST_CASE("fold audit catches leakage and dropped entries") {
    DatasetManifest m = fake_manifest(40);
    FoldPlan plan = make_fold_plan(m, FoldMode::Indexed);
    audit_fold_plan(plan, 40);

    FoldPlan leak = plan;
    leak.splits[3].train.push_back(leak.splits[3].test[0]);  // in two roles
    CHECK_THROWS(audit_fold_plan(leak, 40));

    FoldPlan dropped = plan;
    dropped.splits[7].train.pop_back();
    CHECK_THROWS(audit_fold_plan(dropped, 40));

    FoldPlan oob = plan;
    oob.splits[0].test[0] = 40;  // out of range
    CHECK_THROWS(audit_fold_plan(oob, 40));
}

TEST_CASE("fuse concatenates seven embeddings in canonical order") {
    std::vector<std::vector<double>> embs(7, std::vector<double>(100));
    for (int b = 0; b < 7; ++b)
        for (int i = 0; i < 100; ++i) embs[b][i] = b * 1000 + i;
    std::vector<double> f = fuse(embs);
    REQUIRE(f.size() == 700);
    for (int b = 0; b < 7; ++b)
        for (int i = 0; i < 100; ++i) CHECK(f[b * 100 + i] == b * 1000 + i);

    embs.pop_back();
    CHECK_THROWS(fuse(embs));
    embs.push_back(std::vector<double>(99));
    CHECK_THROWS(fuse(embs));
}

TEST_CASE("extract_features honors the contract shapes") {
    SynthSample s = synth_leaf(2, 77);
    ExtractOptions opts;
    opts.encoder_side = 48;
    LeafFeatureSet f = extract_features(s.image, opts);
    CHECK(f.color_input.width == 48);
    CHECK(f.color_input.height == 48);
    CHECK(f.vein_input.width == 48);
    CHECK(f.vein_input.height == 48);
    for (double v : f.vein_input.v) {
        CHECK(v >= 0);
        CHECK(v <= 255);
    }
    // Sanity on a couple of handcrafted values.
    CHECK(f.shape[2] > 0);    // area
    CHECK(f.shape[3] > 0);    // perimeter
    for (double v : f.xy_proj) {
        CHECK(v >= 0);
        CHECK(v <= 1);
    }
}

TEST_CASE("extract_features is deterministic") {
    SynthSample s = synth_leaf(5, 123);
    LeafFeatureSet a = extract_features(s.image);
    LeafFeatureSet b = extract_features(s.image);
    CHECK(a.shape == b.shape);
    CHECK(a.texture == b.texture);
    CHECK(a.color_stats == b.color_stats);
    CHECK(a.fourier == b.fourier);
    CHECK(a.xy_proj == b.xy_proj);
    CHECK(a.color_input.r == b.color_input.r);
    CHECK(a.vein_input.v == b.vein_input.v);
}

TEST_CASE("extract_features rejects a blank image") {
    RasterImage white(64, 64, 255, 255, 255);
    CHECK_THROWS_AS(extract_features(white), BranchError);
}

TEST_CASE("feature store round trip and resume") {
    TempDir td("store");
    SynthSample s0 = synth_leaf(0, 1);
    SynthSample s1 = synth_leaf(1, 2);
    LeafFeatureSet f0 = extract_features(s0.image);
    LeafFeatureSet f1 = extract_features(s1.image);

    {
        FeatureStore store(td.path.string(), 64);
        CHECK_FALSE(store.has(0));
        store.put(0, f0);
        store.put(1, f1);
        CHECK(store.has(0));
        CHECK(store.has(1));
    }
    // Fresh instance reads everything back from disk.
    FeatureStore store(td.path.string(), 64);
    CHECK(store.indices() == std::vector<int>{0, 1});
    LeafFeatureSet back = store.get(0);
    CHECK(back.shape == f0.shape);
    CHECK(back.texture == f0.texture);
    CHECK(back.color_stats == f0.color_stats);
    CHECK(back.fourier == f0.fourier);
    CHECK(back.xy_proj == f0.xy_proj);
    CHECK(back.color_input.r == f0.color_input.r);
    CHECK(back.color_input.g == f0.color_input.g);
    CHECK(back.color_input.b == f0.color_input.b);
    CHECK(back.vein_input.v == f0.vein_input.v);
}

TEST_CASE("extract_all caches and isolates failures") {
    TempDir td("extract");
    fs::create_directories(td.path / "data" / "class_a");
    for (int i = 0; i < 3; ++i) {
        SynthSample s = synth_leaf(i % kSynthClasses, 10 + i);
        save_png(s.image, (td.path / "data" / "class_a" /
                           ("leaf_" + std::to_string(i) + ".png"))
                              .string());
    }
    // One unreadable file mixed in.
    std::ofstream((td.path / "data" / "class_a" / "broken.png")) << "nope";

    DatasetManifest m = scan_dataset((td.path / "data").string());
    REQUIRE(m.entries.size() == 4);

    FeatureStore store((td.path / "cache").string(), 64);
    ExtractSummary s1 = extract_all(m, store);
    CHECK(s1.extracted == 3);
    CHECK(s1.cached == 0);
    CHECK(s1.failures.size() == 1);

    ExtractSummary s2 = extract_all(m, store);
    CHECK(s2.extracted == 0);
    CHECK(s2.cached == 3);
    CHECK(s2.failures.size() == 1);  // the broken file fails again
}

TEST_CASE("synthetic leaves have the expected rasterized area") {
    for (int cls = 0; cls < kSynthClasses; ++cls) {
        SynthSample s = synth_leaf(cls, 31337 + cls);
        GrayImage g = to_grayscale(s.image);
        BinaryMask m = binarize(g);
        double want = synth_shape_area(cls, s.scale);
        double got = static_cast<double>(m.count());
        CHECK(std::abs(got - want) / want < 0.05);
    }
}

TEST_CASE("synthetic seeds are reproducible and distinct") {
    SynthSample a = synth_leaf(3, 42);
    SynthSample b = synth_leaf(3, 42);
    SynthSample c = synth_leaf(3, 43);
    CHECK(a.image.r == b.image.r);
    CHECK(a.image.g == b.image.g);
    CHECK(a.image.b == b.image.b);
    CHECK(a.image.r != c.image.r);  // jitter moved something
}

TEST_CASE("generate_synth_dataset writes a scannable tree") {
    TempDir td("synthds");
    generate_synth_dataset(td.path.string(), 2, 9);
    DatasetManifest m = scan_dataset(td.path.string());
    CHECK(m.num_classes() == kSynthClasses);
    CHECK(m.entries.size() == static_cast<std::size_t>(2 * kSynthClasses));
    int per_class[kSynthClasses] = {};
    for (auto& e : m.entries) per_class[e.label]++;
    for (int c = 0; c < kSynthClasses; ++c) CHECK(per_class[c] == 2);
}

TEST_CASE("cv report csv is stable for a fixed report") {
    CvReport r;
    r.mode = FoldMode::RandomStratified;
    r.seed = 7;
    r.config_hash = 0xabcdef;
    FoldResult f;
    f.fold = 1;
    f.valid_acc = 0.96875;
    f.test_acc = 1.0 / 3.0;
    f.svm_c = 10;
    f.svm_gamma = 0.001;
    for (int b = 0; b < 7; ++b) f.branch_test_acc[b] = b / 7.0;
    r.folds.push_back(f);
    r.mean_test = f.test_acc;
    r.confusion.assign(2, std::vector<long>(2, 3));

    std::string a = cv_report_csv(r);
    std::string b = cv_report_csv(r);
    CHECK(a == b);
    CHECK(a.find("0.96875") != std::string::npos);
    // Round-trip printing: 1/3 must re-parse to the same double.
    auto pos = a.find("0.333333333333333");
    CHECK(pos != std::string::npos);
}
