#include "dih/checkpoint.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <vector>

#include "json.hpp"

namespace dih {
namespace {

constexpr char kMagic[4] = {'D', 'I', 'H', '1'};
constexpr std::uint32_t kVersion = 1;

std::string arch_to_json(const ArchConfig& cfg) {
    nlohmann::json j;
    j["input_size"] = cfg.input_size;
    j["encoder_channels"] = cfg.encoder_channels;
    j["bottleneck_dim"] = cfg.bottleneck_dim;
    j["num_classes"] = cfg.num_classes;
    j["kernel_size"] = cfg.kernel_size;
    j["stride"] = cfg.stride;
    return j.dump();
}

ArchConfig arch_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception&) {
        fail(Status::CorruptData, "checkpoint: malformed architecture block");
    }
    ArchConfig cfg;
    try {
        cfg.input_size = j.at("input_size").get<int>();
        cfg.encoder_channels = j.at("encoder_channels").get<std::vector<int>>();
        cfg.bottleneck_dim = j.at("bottleneck_dim").get<int>();
        cfg.num_classes = j.at("num_classes").get<int>();
        cfg.kernel_size = j.at("kernel_size").get<int>();
        cfg.stride = j.at("stride").get<int>();
    } catch (const nlohmann::json::exception&) {
        fail(Status::CorruptData, "checkpoint: incomplete architecture block");
    }
    return cfg;
}

template <class V>
void append_bytes(std::vector<std::uint8_t>& out, const V& value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    out.insert(out.end(), p, p + sizeof(V));
}

} // namespace

void save_checkpoint(const TrainedModel& model, const std::string& path) {
    std::vector<std::uint8_t> bytes;
    bytes.insert(bytes.end(), kMagic, kMagic + 4);
    append_bytes(bytes, kVersion);

    const std::string arch = arch_to_json(model.net.cfg);
    append_bytes(bytes, static_cast<std::uint32_t>(arch.size()));
    bytes.insert(bytes.end(), arch.begin(), arch.end());

    append_bytes(bytes, model.iteration);
    for (auto word : model.rng_state) append_bytes(bytes, word);

    auto& net = const_cast<Network<float>&>(model.net);
    for (auto ref : net.params()) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(ref.value->data());
        bytes.insert(bytes.end(), p, p + ref.value->size() * sizeof(float));
    }
    for (auto* state : net.running_state()) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(state->data());
        bytes.insert(bytes.end(), p, p + state->size() * sizeof(float));
    }

    const std::uint32_t crc =
        static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
    append_bytes(bytes, crc);

    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Status::Io, "cannot write checkpoint: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Status::Io, "checkpoint write failed: " + path);
}

TrainedModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Status::NotFound, "cannot open checkpoint: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    if (bytes.size() < 4 + sizeof(std::uint32_t) * 2) fail(Status::CorruptData, "checkpoint too short");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) fail(Status::CorruptData, "checkpoint: bad magic");

    // checksum first so every later failure means a structural problem
    const size_t body = bytes.size() - sizeof(std::uint32_t);
    std::uint32_t stored_crc;
    std::memcpy(&stored_crc, bytes.data() + body, sizeof(stored_crc));
    const std::uint32_t actual_crc =
        static_cast<std::uint32_t>(crc32(0L, bytes.data(), static_cast<uInt>(body)));
    if (stored_crc != actual_crc) fail(Status::ChecksumMismatch, "checkpoint: checksum mismatch");

    size_t off = 4;
    auto read_bytes = [&](void* dst, size_t n) {
        if (off + n > body) fail(Status::CorruptData, "checkpoint: truncated body");
        std::memcpy(dst, bytes.data() + off, n);
        off += n;
    };

    std::uint32_t version;
    read_bytes(&version, sizeof(version));
    if (version != kVersion) fail(Status::VersionMismatch, "checkpoint: unsupported format version");

    std::uint32_t arch_len;
    read_bytes(&arch_len, sizeof(arch_len));
    std::string arch_text(arch_len, '\0');
    read_bytes(arch_text.data(), arch_len);

    TrainedModel model;
    read_bytes(&model.iteration, sizeof(model.iteration));
    for (auto& word : model.rng_state) read_bytes(&word, sizeof(word));

    const ArchConfig cfg = arch_from_json(arch_text);
    model.net.build(cfg, 0);
    for (auto ref : model.net.params()) {
        read_bytes(ref.value->data(), ref.value->size() * sizeof(float));
    }
    for (auto* state : model.net.running_state()) {
        read_bytes(state->data(), state->size() * sizeof(float));
    }
    if (off != body) fail(Status::CorruptData, "checkpoint: trailing bytes");
    return model;
}

} // namespace dih
