#include "sgv/netpbm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace sgv {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t offset,
                       const std::string& what) {
    throw io_error(path.string() + ": " + what + " (byte offset " +
                   std::to_string(offset) + ")");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(path.string() + ": cannot open file");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

struct header_parser {
    const std::filesystem::path& path;
    const std::string& data;
    std::size_t pos = 0;

    // Whitespace and '#' comment lines between header tokens.
    void skip_separators() {
        while (pos < data.size()) {
            const char c = data[pos];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else if (c == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    long parse_number(const char* what, long max_value) {
        skip_separators();
        const std::size_t start = pos;
        long value = 0;
        while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') {
            value = value * 10 + (data[pos] - '0');
            if (value > max_value) fail(path, start, std::string(what) + " out of range");
            ++pos;
        }
        if (pos == start) fail(path, pos, std::string("expected ") + what);
        return value;
    }

    // Exactly one whitespace byte separates the header from the raster.
    void expect_raster_separator() {
        if (pos >= data.size()) fail(path, pos, "truncated before raster");
        const char c = data[pos];
        if (c != ' ' && c != '\t' && c != '\r' && c != '\n')
            fail(path, pos, "expected whitespace before raster");
        ++pos;
    }
};

}  // namespace

binary_mask load_mask(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    header_parser p{path, data};

    if (data.size() < 2 || data[0] != 'P' || data[1] != '4')
        fail(path, 0, "not a binary PBM (expected magic P4)");
    p.pos = 2;

    const long w = p.parse_number("width", 1L << 20);
    const long h = p.parse_number("height", 1L << 20);
    if (w < 1 || h < 1) fail(path, p.pos, "dimensions must be >= 1");
    p.expect_raster_separator();

    const std::size_t row_bytes = (static_cast<std::size_t>(w) + 7) / 8;
    if (data.size() - p.pos < row_bytes * static_cast<std::size_t>(h))
        fail(path, data.size(), "truncated raster");

    binary_mask m(static_cast<int>(w), static_cast<int>(h));
    for (long y = 0; y < h; ++y) {
        const std::size_t row = p.pos + static_cast<std::size_t>(y) * row_bytes;
        for (long x = 0; x < w; ++x) {
            const unsigned byte = static_cast<unsigned char>(data[row + (x >> 3)]);
            m.set(static_cast<int>(x), static_cast<int>(y), (byte >> (7 - (x & 7))) & 1u);
        }
    }
    return m;
}

void save_mask(const std::filesystem::path& path, const binary_mask& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path.string() + ": cannot open for writing");
    out << "P4\n" << m.width << " " << m.height << "\n";
    const std::size_t row_bytes = (static_cast<std::size_t>(m.width) + 7) / 8;
    std::vector<char> row(row_bytes);
    for (int y = 0; y < m.height; ++y) {
        std::fill(row.begin(), row.end(), 0);
        for (int x = 0; x < m.width; ++x)
            if (m.at(x, y)) row[x >> 3] |= static_cast<char>(0x80u >> (x & 7));
        out.write(row.data(), static_cast<std::streamsize>(row_bytes));
    }
    if (!out) throw io_error(path.string() + ": write failed");
}

prob_map load_probmap(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    header_parser p{path, data};

    if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
        fail(path, 0, "not a binary PGM (expected magic P5)");
    p.pos = 2;

    const long w = p.parse_number("width", 1L << 20);
    const long h = p.parse_number("height", 1L << 20);
    const long maxval = p.parse_number("maxval", 65535);
    if (w < 1 || h < 1) fail(path, p.pos, "dimensions must be >= 1");
    if (maxval < 1) fail(path, p.pos, "maxval must be >= 1");
    p.expect_raster_separator();

    const int bytes_per_sample = maxval > 255 ? 2 : 1;
    const std::size_t need =
        static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * bytes_per_sample;
    if (data.size() - p.pos < need) fail(path, data.size(), "truncated raster");

    prob_map out(static_cast<int>(w), static_cast<int>(h));
    std::size_t at = p.pos;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        unsigned v;
        if (bytes_per_sample == 2) {
            v = (static_cast<unsigned char>(data[at]) << 8) |
                static_cast<unsigned char>(data[at + 1]);
        } else {
            v = static_cast<unsigned char>(data[at]);
        }
        if (v > static_cast<unsigned>(maxval))
            fail(path, at, "sample exceeds maxval");
        out.values[i] = static_cast<double>(v) / static_cast<double>(maxval);
        at += bytes_per_sample;
    }
    return out;
}

void save_probmap(const std::filesystem::path& path, const prob_map& p) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path.string() + ": cannot open for writing");
    out << "P5\n" << p.width << " " << p.height << "\n65535\n";
    std::vector<char> raster(p.values.size() * 2);
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double v = p.values[i];
        if (!(v >= 0.0 && v <= 1.0))
            throw io_error(path.string() + ": probability value outside [0,1]");
        const unsigned q = static_cast<unsigned>(std::lround(v * 65535.0));
        raster[2 * i] = static_cast<char>((q >> 8) & 0xFF);
        raster[2 * i + 1] = static_cast<char>(q & 0xFF);
    }
    out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
    if (!out) throw io_error(path.string() + ": write failed");
}

}  // namespace sgv
