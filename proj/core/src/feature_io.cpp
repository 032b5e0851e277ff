#include "sgv/feature_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "sgv/netpbm.hpp"

namespace sgv {

namespace {

constexpr char kFeatureMagic[4] = {'S', 'G', 'V', 'F'};
constexpr std::uint32_t kFeatureVersion = 1;

}  // namespace

void save_features(const std::filesystem::path& path, const pixel_features& features) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path.string() + ": cannot open for writing");
    out.write(kFeatureMagic, 4);
    const std::uint32_t header[4] = {kFeatureVersion, static_cast<std::uint32_t>(features.width),
                                     static_cast<std::uint32_t>(features.height),
                                     static_cast<std::uint32_t>(features.dim)};
    char buf[8];
    for (std::uint32_t v : header) {
        for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        out.write(buf, 4);
    }
    for (double d : features.values) {
        std::uint64_t u;
        std::memcpy(&u, &d, 8);
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
        out.write(buf, 8);
    }
    if (!out) throw io_error(path.string() + ": write failed");
}

pixel_features load_features(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(path.string() + ": cannot open");
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kFeatureMagic, 4) != 0)
        throw io_error(path.string() + ": bad magic, not a feature file");

    auto read_u32 = [&in, &path]() {
        unsigned char b[4];
        if (!in.read(reinterpret_cast<char*>(b), 4))
            throw io_error(path.string() + ": truncated header");
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    };
    const auto version = read_u32();
    if (version != kFeatureVersion)
        throw io_error(path.string() + ": unsupported format version " + std::to_string(version));
    const auto w = read_u32(), h = read_u32(), d = read_u32();
    if (w < 1 || h < 1 || d < 1 || w > (1u << 20) || h > (1u << 20) || d > 4096)
        throw io_error(path.string() + ": invalid dimensions");

    pixel_features features(static_cast<int>(w), static_cast<int>(h), static_cast<int>(d));
    for (std::size_t i = 0; i < features.values.size(); ++i) {
        unsigned char b[8];
        if (!in.read(reinterpret_cast<char*>(b), 8))
            throw io_error(path.string() + ": truncated sample data");
        std::uint64_t u = 0;
        for (int k = 0; k < 8; ++k) u |= static_cast<std::uint64_t>(b[k]) << (8 * k);
        double v;
        std::memcpy(&v, &u, 8);
        if (!std::isfinite(v))
            throw io_error(path.string() + ": non-finite sample at index " + std::to_string(i));
        features.values[i] = v;
    }
    return features;
}

}  // namespace sgv
