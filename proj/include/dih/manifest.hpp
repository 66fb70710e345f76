#pragma once

#include <string>
#include <vector>

namespace dih {

// Dataset manifest: one record per line, tab-separated
// `composite_path  mask_path  ground_truth_path  labelmap_path`,
// with `-` for an absent label map. Relative paths are resolved against
// the manifest's directory.
struct ManifestRecord {
    std::string composite_path;
    std::string mask_path;
    std::string ground_truth_path;
    std::string labelmap_path; // empty when absent
};

std::vector<ManifestRecord> load_manifest(const std::string& path);
void save_manifest(const std::vector<ManifestRecord>& records, const std::string& path);

} // namespace dih
