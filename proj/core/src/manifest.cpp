#include "leafrec/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "leafrec/serialize.hpp"

namespace fs = std::filesystem;

namespace leafrec {

namespace {

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

void sort_and_index(DatasetManifest& m) {
    std::stable_sort(m.entries.begin(), m.entries.end(),
                     [](const ManifestEntry& a, const ManifestEntry& b) {
                         std::string fa = fs::path(a.path).filename().string();
                         std::string fb = fs::path(b.path).filename().string();
                         return fa != fb ? fa < fb : a.path < b.path;
                     });
    std::set<std::string> seen;
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        m.entries[i].index = static_cast<int>(i);
        std::string name = fs::path(m.entries[i].path).filename().string();
        if (!seen.insert(name).second)
            throw std::runtime_error("manifest: duplicate filename " + name);
    }
}

}  // namespace

DatasetManifest scan_dataset(const std::string& root) {
    if (!fs::is_directory(root))
        throw std::runtime_error("manifest: not a directory: " + root);

    std::vector<std::string> class_dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory()) class_dirs.push_back(e.path().filename().string());
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.empty())
        throw std::runtime_error("manifest: no class subdirectories in " + root);

    DatasetManifest m;
    for (const auto& cls : class_dirs) {
        int label = static_cast<int>(m.class_names.size());
        m.class_names.push_back(cls);
        for (const auto& e : fs::directory_iterator(fs::path(root) / cls))
            if (e.is_regular_file() && is_image_file(e.path()))
                m.entries.push_back({e.path().string(), label, 0});
    }
    if (m.entries.empty())
        throw std::runtime_error("manifest: no images found under " + root);
    sort_and_index(m);
    return m;
}

DatasetManifest scan_filename_ranges(const std::string& root,
                                     const std::string& range_map_path) {
    struct Range {
        long start, end;
        int label;
    };
    std::vector<Range> ranges;
    DatasetManifest m;

    std::ifstream rm(range_map_path);
    if (!rm) throw std::runtime_error("manifest: cannot open " + range_map_path);
    std::string line;
    while (std::getline(rm, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto f = csv_split(line);
        if (f.size() != 3)
            throw std::runtime_error("manifest: bad range line: " + line);
        ranges.push_back({std::stol(f[0]), std::stol(f[1]),
                          static_cast<int>(m.class_names.size())});
        m.class_names.push_back(f[2]);
    }
    if (ranges.empty())
        throw std::runtime_error("manifest: empty range map " + range_map_path);

    if (!fs::is_directory(root))
        throw std::runtime_error("manifest: not a directory: " + root);
    for (const auto& e : fs::directory_iterator(root)) {
        if (!e.is_regular_file() || !is_image_file(e.path())) continue;
        std::string stem = e.path().stem().string();
        long num;
        try {
            num = std::stol(stem);
        } catch (const std::exception&) {
            continue;  // non-numeric filenames are not part of the mapping
        }
        for (const auto& r : ranges)
            if (num >= r.start && num <= r.end) {
                m.entries.push_back({e.path().string(), r.label, 0});
                break;
            }
    }
    if (m.entries.empty())
        throw std::runtime_error("manifest: no mapped images under " + root);
    sort_and_index(m);
    return m;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
    std::ostringstream os;
    os << "# leafrec-manifest v1\n";
    os << "index,label,class,path\n";
    for (const auto& e : m.entries)
        os << e.index << ',' << e.label << ',' << m.class_names[e.label] << ','
           << e.path << '\n';
    write_text_file(path, os.str());
}

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("manifest: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("# leafrec-manifest v1", 0) != 0)
        throw std::runtime_error("manifest: bad version header in " + path);
    std::getline(is, line);  // column header

    DatasetManifest m;
    std::map<int, std::string> classes;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto f = csv_split(line);
        if (f.size() < 4)
            throw std::runtime_error("manifest: bad row in " + path + ": " + line);
        ManifestEntry e;
        e.index = std::stoi(f[0]);
        e.label = std::stoi(f[1]);
        classes[e.label] = f[2];
        // Paths may themselves contain commas; rejoin the tail.
        e.path = f[3];
        for (std::size_t i = 4; i < f.size(); ++i) e.path += "," + f[i];
        m.entries.push_back(std::move(e));
    }
    if (m.entries.empty()) throw std::runtime_error("manifest: empty " + path);
    int max_label = 0;
    for (const auto& [lbl, name] : classes) max_label = std::max(max_label, lbl);
    m.class_names.assign(max_label + 1, "");
    for (const auto& [lbl, name] : classes) m.class_names[lbl] = name;
    return m;
}

}  // namespace leafrec
