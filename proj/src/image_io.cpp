#include "distaudit/image_io.hpp"

#include <zlib.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace distaudit {

namespace {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

// --- PNM (P5/P6) ---

struct PnmCursor {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    // Skips whitespace and '#' comments between header tokens.
    int next_int(const std::string& what) {
        while (pos < bytes.size()) {
            const char c = static_cast<char>(bytes[pos]);
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
        if (pos >= bytes.size() || !std::isdigit(bytes[pos]))
            throw std::runtime_error("malformed PNM header: expected " + what);
        long v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1 << 24) throw std::runtime_error("image dimension overflow in PNM header");
            ++pos;
        }
        return static_cast<int>(v);
    }
};

Image load_pnm(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    const int channels = bytes[1] == '5' ? 1 : 3;
    PnmCursor cur{bytes, 2};
    const int w = cur.next_int("width");
    const int h = cur.next_int("height");
    const int maxval = cur.next_int("maxval");
    if (maxval != 255)
        throw std::runtime_error("unsupported bit depth (maxval " + std::to_string(maxval) +
                                 ", want 255): " + path);
    if (cur.pos >= bytes.size() || !std::isspace(bytes[cur.pos]))
        throw std::runtime_error("malformed PNM header: " + path);
    ++cur.pos;  // single whitespace separating header from raster

    Image img = make_image(w, h, channels);
    if (bytes.size() - cur.pos < img.pixels.size())
        throw std::runtime_error("truncated PNM raster: " + path);
    std::memcpy(img.pixels.data(), bytes.data() + cur.pos, img.pixels.size());
    return img;
}

// --- PNG (read-only, 8-bit gray / truecolor, non-interlaced) ---

std::uint32_t be32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
           (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

std::vector<std::uint8_t> zlib_inflate(const std::vector<std::uint8_t>& in,
                                       std::size_t expected_out, const std::string& path) {
    std::vector<std::uint8_t> out(expected_out);
    z_stream zs{};
    if (inflateInit(&zs) != Z_OK) throw std::runtime_error("zlib init failed");
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || zs.total_out != expected_out)
        throw std::runtime_error("corrupt PNG image data: " + path);
    return out;
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

Image load_png(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0)
        throw std::runtime_error("not a PNG file: " + path);

    std::size_t pos = 8;
    bool have_ihdr = false;
    int w = 0, h = 0, channels = 0;
    std::vector<std::uint8_t> idat;

    while (pos + 8 <= bytes.size()) {
        const std::uint32_t len = be32(bytes.data() + pos);
        if (pos + 12 + len > bytes.size())
            throw std::runtime_error("truncated PNG chunk: " + path);
        const char* type = reinterpret_cast<const char*>(bytes.data() + pos + 4);
        const std::uint8_t* data = bytes.data() + pos + 8;
        const std::uint32_t want_crc = be32(data + len);
        const std::uint32_t got_crc = static_cast<std::uint32_t>(
            crc32(crc32(0, bytes.data() + pos + 4, 4), data, len));
        if (want_crc != got_crc) throw std::runtime_error("PNG chunk CRC mismatch: " + path);

        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw std::runtime_error("malformed IHDR: " + path);
            const std::uint32_t pw = be32(data);
            const std::uint32_t ph = be32(data + 4);
            if (pw == 0 || ph == 0 || pw > (1u << 24) || ph > (1u << 24))
                throw std::runtime_error("image dimension overflow in PNG header: " + path);
            w = static_cast<int>(pw);
            h = static_cast<int>(ph);
            const int bit_depth = data[8];
            const int color_type = data[9];
            const int interlace = data[12];
            if (bit_depth != 8)
                throw std::runtime_error("unsupported bit depth " + std::to_string(bit_depth) +
                                         " (want 8): " + path);
            if (color_type == 0)
                channels = 1;
            else if (color_type == 2)
                channels = 3;
            else
                throw std::runtime_error("unsupported color type " + std::to_string(color_type) +
                                         " (want gray or RGB): " + path);
            if (interlace != 0) throw std::runtime_error("unsupported interlaced PNG: " + path);
            have_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + len;
    }
    if (!have_ihdr || idat.empty()) throw std::runtime_error("incomplete PNG: " + path);

    Image img = make_image(w, h, channels);
    const std::size_t stride = static_cast<std::size_t>(w) * channels;
    const auto raw = zlib_inflate(idat, (stride + 1) * static_cast<std::size_t>(h), path);

    // Undo per-scanline filters.
    const int bpp = channels;
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* src = raw.data() + static_cast<std::size_t>(y) * (stride + 1);
        std::uint8_t* dst = img.pixels.data() + static_cast<std::size_t>(y) * stride;
        const std::uint8_t* up = y > 0 ? dst - stride : nullptr;
        const int filter = src[0];
        ++src;
        for (std::size_t i = 0; i < stride; ++i) {
            const int left = i >= static_cast<std::size_t>(bpp) ? dst[i - bpp] : 0;
            const int above = up ? up[i] : 0;
            const int upleft = (up && i >= static_cast<std::size_t>(bpp)) ? up[i - bpp] : 0;
            int v = src[i];
            switch (filter) {
                case 0: break;
                case 1: v += left; break;
                case 2: v += above; break;
                case 3: v += (left + above) / 2; break;
                case 4: v += paeth(left, above, upleft); break;
                default: throw std::runtime_error("unknown PNG filter type: " + path);
            }
            dst[i] = static_cast<std::uint8_t>(v & 0xff);
        }
    }
    return img;
}

}  // namespace

Image load_image(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
        return load_pnm(bytes, path);
    if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P') return load_png(bytes, path);
    throw std::runtime_error("unsupported image format (want PGM/PPM/PNG): " + path);
}

void save_image(const Image& img, const std::string& path) {
    check_image(img);
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    const bool pgm = ext == ".pgm";
    const bool ppm = ext == ".ppm";
    if (!pgm && !ppm)
        throw std::runtime_error("unsupported output extension (want .pgm or .ppm): " + path);
    if (pgm && img.channels != 1)
        throw std::runtime_error(".pgm requires a 1-channel image: " + path);
    if (ppm && img.channels != 3)
        throw std::runtime_error(".ppm requires a 3-channel image: " + path);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << (pgm ? "P5" : "P6") << "\n"
        << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace distaudit
