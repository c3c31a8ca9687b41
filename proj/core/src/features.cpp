#include "leafrec/features.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "leafrec/color.hpp"
#include "leafrec/geometry.hpp"
#include "leafrec/serialize.hpp"
#include "leafrec/signature.hpp"
#include "leafrec/texture.hpp"
#include "leafrec/vein.hpp"

namespace fs = std::filesystem;

namespace leafrec {

namespace {

template <typename F, typename... A>
auto branch(const char* name, F&& fn, A&&... args) {
    try {
        return fn(std::forward<A>(args)...);
    } catch (const std::exception& e) {
        throw BranchError(name, e.what());
    }
}

/// Fused vein plane placed on the same padded square canvas as resize()
/// uses for the color image, so both encoder inputs stay registered.
ImageF pad_resize_plane(const ImageF& img, int side) {
    double scale = static_cast<double>(side) /
                   std::max(img.width, img.height);
    int nw = std::max(1, static_cast<int>(img.width * scale + 0.5));
    int nh = std::max(1, static_cast<int>(img.height * scale + 0.5));
    ImageF scaled = resize_bilinear(img, nw, nh);
    ImageF out(side, side, 0.0);
    int ox = (side - nw) / 2, oy = (side - nh) / 2;
    for (int y = 0; y < nh; ++y)
        for (int x = 0; x < nw; ++x)
            out.v[out.idx(x + ox, y + oy)] = scaled.at(x, y);
    return out;
}

GrayImage to_gray8(const ImageF& img) {
    GrayImage g(img.width, img.height);
    for (std::size_t i = 0; i < img.v.size(); ++i) {
        double v = std::clamp(img.v[i], 0.0, 255.0);
        g.v[i] = static_cast<std::uint8_t>(v + 0.5);
    }
    return g;
}

}  // namespace

LeafFeatureSet extract_features(const RasterImage& img, const ExtractOptions& opts) {
    GrayImage gray = branch("raster", [&] { return to_grayscale(img); });
    BinaryMask mask = branch("raster", [&] { return binarize(gray); });

    AlignResult aligned = branch("geometry", [&] { return align_upright(img, mask); });
    CropResult crop = branch(
        "geometry", [&] { return crop_to_content(aligned.image, aligned.mask); });
    GrayImage cgray = branch("raster", [&] { return to_grayscale(crop.image); });

    LeafFeatureSet out;
    Contour contour =
        branch("geometry", [&] { return trace_contour(crop.mask); });
    out.shape = branch("geometry",
                       [&] { return shape_vector(cgray, crop.mask, contour); });

    GlcmConfig gcfg;
    gcfg.levels = opts.glcm_levels;
    out.texture = branch("texture", [&] {
        return haralick_features(compute_glcm(cgray, crop.mask, gcfg)).f;
    });
    out.color_stats =
        branch("color", [&] { return color_features(crop.image, crop.mask); });
    auto fd = branch("signature", [&] { return fourier_descriptors(contour); });
    std::copy(fd.begin(), fd.end(), out.fourier.begin());
    out.xy_proj = branch("signature", [&] { return xy_projection(crop.mask); });

    VeinStack veins =
        branch("vein", [&] { return extract_vein(cgray, crop.mask); });

    out.color_input = resize(crop.image, opts.encoder_side);
    out.vein_input = pad_resize_plane(veins.fused, opts.encoder_side);

    if (opts.debug && !opts.debug_dir.empty()) {
        fs::create_directories(opts.debug_dir);
        save_png(cgray, opts.debug_dir + "/gray.png");
        GrayImage mv(crop.mask.width, crop.mask.height);
        for (std::size_t i = 0; i < mv.v.size(); ++i)
            mv.v[i] = crop.mask.v[i] ? 255 : 0;
        save_png(mv, opts.debug_dir + "/mask.png");
        RasterImage overlay = crop.image;
        for (auto [x, y] : contour.points) {
            overlay.r[overlay.idx(x, y)] = 255;
            overlay.g[overlay.idx(x, y)] = 0;
            overlay.b[overlay.idx(x, y)] = 0;
        }
        save_png(overlay, opts.debug_dir + "/contour.png");
        for (int r = 0; r < 4; ++r)
            save_png(to_gray8(veins.plane[r]),
                     opts.debug_dir + "/vein_r" + std::to_string(r + 1) + ".png");
        save_png(to_gray8(veins.fused), opts.debug_dir + "/vein_fused.png");
    }
    return out;
}

// --- FeatureStore ---

namespace {

constexpr const char* kVersionLine =
    "# leafrec-features v1 order=color,vein,xyp,shape,texture,colorstats,fourier";
constexpr char kTensorMagic[8] = {'L', 'E', 'A', 'F', 'T', 'E', 'N', '1'};

struct BranchFile {
    const char* file;
    const char* prefix;
    int count;
    int first;  // column suffix of the first entry
    int offset; // position in the flattened 161-value row
};

// Flattened row layout: shape(35) texture(14) colorstats(36) fourier(16) xyp(60).
constexpr BranchFile kBranchFiles[] = {
    {"shape.csv", "shape_", 35, 0, 0},
    {"texture.csv", "tex_f", 14, 1, 35},
    {"colorstats.csv", "col_", 36, 0, 49},
    {"fourier.csv", "fd_", 16, 1, 85},
    {"xyp.csv", "xyp_", 60, 0, 101},
};
constexpr int kRowLen = 161;

std::string column_name(const BranchFile& bf, int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%02d", bf.prefix, bf.first + i);
    return buf;
}

}  // namespace

FeatureStore::FeatureStore(std::string dir, int encoder_side)
    : dir_(std::move(dir)), side_(encoder_side) {
    fs::create_directories(dir_);
    fs::create_directories(fs::path(dir_) / "tensors");
}

std::string FeatureStore::tensor_path(int index) const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "img_%06d.ten", index);
    return (fs::path(dir_) / "tensors" / buf).string();
}

void FeatureStore::load() const {
    if (loaded_) return;
    loaded_ = true;
    std::set<int> complete;
    bool first_file = true;
    for (const auto& bf : kBranchFiles) {
        fs::path p = fs::path(dir_) / bf.file;
        std::set<int> present;
        if (fs::exists(p)) {
            std::ifstream is(p);
            std::string line;
            if (!std::getline(is, line) || line != kVersionLine)
                throw std::runtime_error("feature store: version mismatch in " +
                                         p.string());
            std::getline(is, line);  // header
            while (std::getline(is, line)) {
                if (line.empty()) continue;
                auto f = csv_split(line);
                if (f.size() != static_cast<std::size_t>(bf.count) + 1)
                    throw std::runtime_error("feature store: bad row width in " +
                                             p.string());
                int index = std::stoi(f[0]);
                auto& row = rows_[index];
                if (row.empty()) row.assign(kRowLen, 0.0);
                for (int i = 0; i < bf.count; ++i)
                    row[bf.offset + i] = std::stod(f[i + 1]);
                present.insert(index);
            }
        }
        if (first_file) {
            complete = present;
            first_file = false;
        } else {
            std::set<int> inter;
            std::set_intersection(complete.begin(), complete.end(),
                                  present.begin(), present.end(),
                                  std::inserter(inter, inter.begin()));
            complete = std::move(inter);
        }
    }
    // A row counts as cached only when all branch files and the tensor agree.
    for (auto it = rows_.begin(); it != rows_.end();) {
        if (!complete.count(it->first) || !fs::exists(tensor_path(it->first)))
            it = rows_.erase(it);
        else
            ++it;
    }
}

bool FeatureStore::has(int index) const {
    load();
    return rows_.count(index) != 0;
}

std::vector<int> FeatureStore::indices() const {
    load();
    std::vector<int> out;
    for (const auto& [i, row] : rows_) out.push_back(i);
    return out;
}

void FeatureStore::append_row(int index, const std::vector<double>& row) {
    for (const auto& bf : kBranchFiles) {
        fs::path p = fs::path(dir_) / bf.file;
        bool fresh = !fs::exists(p);
        std::ofstream os(p, std::ios::app);
        if (fresh) {
            os << kVersionLine << '\n' << "index";
            for (int i = 0; i < bf.count; ++i) os << ',' << column_name(bf, i);
            os << '\n';
        }
        os << index;
        for (int i = 0; i < bf.count; ++i)
            os << ',' << format_double(row[bf.offset + i]);
        os << '\n';
    }
}

void FeatureStore::put(int index, const LeafFeatureSet& f) {
    load();
    if (f.color_input.width != side_ || f.vein_input.width != side_)
        throw std::invalid_argument("feature store: encoder side mismatch");

    std::vector<double> row(kRowLen);
    std::copy(f.shape.begin(), f.shape.end(), row.begin());
    std::copy(f.texture.begin(), f.texture.end(), row.begin() + 35);
    std::copy(f.color_stats.begin(), f.color_stats.end(), row.begin() + 49);
    std::copy(f.fourier.begin(), f.fourier.end(), row.begin() + 85);
    std::copy(f.xy_proj.begin(), f.xy_proj.end(), row.begin() + 101);

    std::ofstream os(tensor_path(index), std::ios::binary);
    os.write(kTensorMagic, sizeof kTensorMagic);
    std::int32_t side = side_;
    os.write(reinterpret_cast<const char*>(&side), sizeof side);
    std::vector<double> planes;
    planes.reserve(4u * side_ * side_);
    for (const auto* ch : {&f.color_input.r, &f.color_input.g, &f.color_input.b})
        for (auto v : *ch) planes.push_back(v);
    for (auto v : f.vein_input.v) planes.push_back(v);
    os.write(reinterpret_cast<const char*>(planes.data()),
             static_cast<std::streamsize>(planes.size() * sizeof(double)));
    if (!os) throw std::runtime_error("feature store: tensor write failed");

    append_row(index, row);
    rows_[index] = std::move(row);
}

LeafFeatureSet FeatureStore::get(int index) const {
    load();
    auto it = rows_.find(index);
    if (it == rows_.end())
        throw std::out_of_range("feature store: no entry " + std::to_string(index));
    const auto& row = it->second;

    LeafFeatureSet f;
    std::copy(row.begin(), row.begin() + 35, f.shape.begin());
    std::copy(row.begin() + 35, row.begin() + 49, f.texture.begin());
    std::copy(row.begin() + 49, row.begin() + 85, f.color_stats.begin());
    std::copy(row.begin() + 85, row.begin() + 101, f.fourier.begin());
    std::copy(row.begin() + 101, row.end(), f.xy_proj.begin());

    std::ifstream is(tensor_path(index), std::ios::binary);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kTensorMagic, sizeof magic) != 0)
        throw std::runtime_error("feature store: bad tensor file for entry " +
                                 std::to_string(index));
    std::int32_t side;
    is.read(reinterpret_cast<char*>(&side), sizeof side);
    if (side != side_)
        throw std::runtime_error("feature store: tensor side mismatch");
    std::vector<double> planes(4u * side * side);
    is.read(reinterpret_cast<char*>(planes.data()),
            static_cast<std::streamsize>(planes.size() * sizeof(double)));
    if (!is) throw std::runtime_error("feature store: truncated tensor file");

    f.color_input = RasterImage(side, side);
    std::size_t n = static_cast<std::size_t>(side) * side;
    for (std::size_t i = 0; i < n; ++i) {
        f.color_input.r[i] = static_cast<std::uint8_t>(planes[i]);
        f.color_input.g[i] = static_cast<std::uint8_t>(planes[n + i]);
        f.color_input.b[i] = static_cast<std::uint8_t>(planes[2 * n + i]);
    }
    f.vein_input = ImageF(side, side);
    for (std::size_t i = 0; i < n; ++i) f.vein_input.v[i] = planes[3 * n + i];
    return f;
}

ExtractSummary extract_all(const DatasetManifest& manifest, FeatureStore& store,
                           const ExtractOptions& opts) {
    ExtractSummary sum;
    for (const auto& e : manifest.entries) {
        if (store.has(e.index)) {
            ++sum.cached;
            continue;
        }
        try {
            RasterImage img = load_image(e.path);
            ExtractOptions o = opts;
            if (o.debug && !o.debug_dir.empty()) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "img_%06d", e.index);
                o.debug_dir = (fs::path(opts.debug_dir) / buf).string();
            }
            o.encoder_side = store.encoder_side();
            store.put(e.index, extract_features(img, o));
            ++sum.extracted;
        } catch (const std::exception& ex) {
            sum.failures.emplace_back(e.index, ex.what());
        }
    }
    return sum;
}

}  // namespace leafrec
