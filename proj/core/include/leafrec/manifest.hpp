#ifndef LEAFREC_MANIFEST_HPP
#define LEAFREC_MANIFEST_HPP

#include <string>
#include <vector>

namespace leafrec {

struct ManifestEntry {
    std::string path;   // image file
    int label = 0;      // index into class_names
    int index = 0;      // stable position after filename sort
};

/// Entries sorted by original filename (basename, ties by full path).
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::vector<std::string> class_names;

    int num_classes() const { return static_cast<int>(class_names.size()); }
};

/// One subdirectory per class; class name = directory name.
DatasetManifest scan_dataset(const std::string& root);

/// Flavia-style flat directory where the class is encoded by the numeric
/// filename interval. The range map is a CSV of `start,end,class_name`.
DatasetManifest scan_filename_ranges(const std::string& root,
                                     const std::string& range_map_path);

void save_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

}  // namespace leafrec

#endif
