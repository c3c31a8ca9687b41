#ifndef LEAFREC_FEATURES_HPP
#define LEAFREC_FEATURES_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "leafrec/image.hpp"
#include "leafrec/manifest.hpp"

namespace leafrec {

struct BranchError : std::runtime_error {
    BranchError(const std::string& branch, const std::string& what)
        : std::runtime_error("[" + branch + "] " + what), branch(branch) {}
    std::string branch;
};

/// Everything the seven encoder branches consume for one leaf.
struct LeafFeatureSet {
    std::array<double, 35> shape{};
    std::array<double, 14> texture{};
    std::array<double, 36> color_stats{};
    std::array<double, 16> fourier{};
    std::array<double, 60> xy_proj{};
    RasterImage color_input;  // aligned leaf, side x side, white padding
    ImageF vein_input;        // fused vein plane on the same canvas, [0,255]
};

struct ExtractOptions {
    int encoder_side = 64;   // CNN input resolution
    int glcm_levels = 32;
    bool debug = false;      // dump intermediates next to the cache
    std::string debug_dir;
};

LeafFeatureSet extract_features(const RasterImage& img,
                                const ExtractOptions& opts = {});

// --- feature store (CSV per branch + binary tensor cache) ---

/// Canonical branch order of the fused embedding.
inline constexpr std::array<const char*, 7> kBranchNames = {
    "color", "vein", "xyp", "shape", "texture", "colorstats", "fourier"};

/// Directory-backed cache keyed by manifest index. Handcrafted vectors go
/// to one CSV per branch; the two encoder input images go to a binary file
/// per entry. Rows already present are treated as extracted.
class FeatureStore {
public:
    FeatureStore(std::string dir, int encoder_side);

    bool has(int index) const;
    void put(int index, const LeafFeatureSet& f);
    LeafFeatureSet get(int index) const;

    /// Indices currently present in the store.
    std::vector<int> indices() const;
    int encoder_side() const { return side_; }

private:
    std::string dir_;
    int side_;
    std::string tensor_path(int index) const;

    // CSV state, loaded lazily and appended on put.
    mutable std::map<int, std::vector<double>> rows_;  // flattened 161 values
    mutable bool loaded_ = false;
    void load() const;
    void append_row(int index, const std::vector<double>& row);
};

struct ExtractSummary {
    int extracted = 0;
    int cached = 0;
    std::vector<std::pair<int, std::string>> failures;  // (index, message)
};

/// Extracts every manifest entry into the store, skipping cached rows.
/// Per-image failures are recorded and do not stop the run.
ExtractSummary extract_all(const DatasetManifest& manifest, FeatureStore& store,
                           const ExtractOptions& opts = {});

}  // namespace leafrec

#endif
