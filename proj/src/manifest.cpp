#include "dih/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dih/error.hpp"

namespace dih {
namespace {

std::string resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty() || p == "-") return {};
    std::filesystem::path fp(p);
    if (fp.is_absolute()) return fp.string();
    return (base / fp).string();
}

} // namespace

std::vector<ManifestRecord> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Status::NotFound, "cannot open manifest: " + path);
    const auto base = std::filesystem::path(path).parent_path();

    std::vector<ManifestRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t start = 0;
        for (;;) {
            const size_t tab = line.find('\t', start);
            if (tab == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, tab - start));
            start = tab + 1;
        }
        if (fields.size() != 4) {
            fail(Status::BadManifest,
                 "manifest line " + std::to_string(line_no) + ": expected 4 tab-separated fields");
        }
        ManifestRecord rec;
        rec.composite_path = resolve(base, fields[0]);
        rec.mask_path = resolve(base, fields[1]);
        rec.ground_truth_path = resolve(base, fields[2]);
        rec.labelmap_path = resolve(base, fields[3]);
        if (rec.composite_path.empty() || rec.mask_path.empty() || rec.ground_truth_path.empty()) {
            fail(Status::BadManifest,
                 "manifest line " + std::to_string(line_no) + ": composite, mask and ground truth are required");
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void save_manifest(const std::vector<ManifestRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Status::Io, "cannot write manifest: " + path);
    const auto base = std::filesystem::path(path).parent_path();
    auto rel = [&](const std::string& p) -> std::string {
        if (p.empty()) return "-";
        std::filesystem::path fp(p);
        // store paths relative to the manifest when possible so the emitted
        // directory is relocatable and byte-stable across runs
        std::error_code ec;
        auto r = std::filesystem::relative(fp, base, ec);
        if (!ec && !r.empty()) return r.generic_string();
        return fp.generic_string();
    };
    for (const auto& rec : records) {
        out << rel(rec.composite_path) << '\t' << rel(rec.mask_path) << '\t'
            << rel(rec.ground_truth_path) << '\t' << rel(rec.labelmap_path) << '\n';
    }
    if (!out) fail(Status::Io, "manifest write failed: " + path);
}

} // namespace dih
