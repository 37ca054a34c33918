#include "shapekit/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

namespace shapekit {

std::size_t BinaryImage::foreground_count() const {
    return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(),
                                                  [](std::uint8_t v) { return v != 0; }));
}

GrayImage to_gray(const BinaryImage& mask) {
    GrayImage out(mask.width, mask.height);
    for (std::size_t i = 0; i < mask.mask.size(); ++i)
        out.data[i] = mask.mask[i] ? 1.0 : 0.0;
    return out;
}

// ===========================================================================
// PGM
// ===========================================================================

namespace {

int pgm_next_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (!std::isspace(c)) break;
    }
    if (c == EOF) return -1;
    do {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    } while (c != EOF && !std::isspace(c));
    return 0;
}

}  // namespace

GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoError, "cannot open " + path);
    std::string tok;
    if (pgm_next_token(in, tok) < 0 || (tok != "P5" && tok != "P2"))
        fail(Errc::ParseError, path + ": not a PGM file");
    const bool binary = tok == "P5";
    long vals[3];
    for (long& v : vals) {
        if (pgm_next_token(in, tok) < 0) fail(Errc::ParseError, path + ": truncated PGM header");
        v = std::strtol(tok.c_str(), nullptr, 10);
    }
    const long w = vals[0], h = vals[1], maxval = vals[2];
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535)
        fail(Errc::ParseError, path + ": bad PGM dimensions");
    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    const double scale = 1.0 / static_cast<double>(maxval);
    if (binary) {
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> row(static_cast<std::size_t>(w) * bytes);
        for (long y = 0; y < h; ++y) {
            in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
            if (!in) fail(Errc::ParseError, path + ": truncated PGM data");
            for (long x = 0; x < w; ++x) {
                unsigned v = bytes == 1 ? row[x] : (row[2 * x] << 8 | row[2 * x + 1]);
                img.at(static_cast<int>(x), static_cast<int>(y)) = v * scale;
            }
        }
    } else {
        for (long i = 0; i < w * h; ++i) {
            if (pgm_next_token(in, tok) < 0) fail(Errc::ParseError, path + ": truncated PGM data");
            img.data[i] = std::strtol(tok.c_str(), nullptr, 10) * scale;
        }
    }
    return img;
}

void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::IoError, "cannot write " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> row(img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double v = std::clamp(img.at(x, y), 0.0, 1.0);
            row[x] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        out.write(reinterpret_cast<const char*>(row.data()), img.width);
    }
    if (!out) fail(Errc::IoError, "short write to " + path);
}

// ===========================================================================
// PNG (libpng)
// ===========================================================================

GrayImage load_png(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) fail(Errc::IoError, "cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        fail(Errc::IoError, "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        fail(Errc::ParseError, path + ": PNG decode error");
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    png_set_expand(png);              // palette/low-bit-depth -> 8-bit
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) & PNG_COLOR_MASK_COLOR)
        png_set_rgb_to_gray(png, 1, -1, -1);  // default luminance weights
    png_read_update_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf.data() + static_cast<std::size_t>(y) * w;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);

    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < buf.size(); ++i) img.data[i] = buf[i] / 255.0;
    return img;
}

// ===========================================================================
// GIF (87a/89a). No system giflib in the build environment, so the decoder
// lives here: logical screen + palette parsing, LZW decompression, first
// image frame only, palette mapped to gray by Rec.601 luminance.
// ===========================================================================

namespace {

struct ByteReader {
    const std::vector<unsigned char>& b;
    std::size_t pos = 0;
    const std::string& path;

    unsigned u8() {
        if (pos >= b.size()) fail(Errc::ParseError, path + ": truncated GIF");
        return b[pos++];
    }
    unsigned u16() {
        unsigned lo = u8(), hi = u8();
        return lo | (hi << 8);
    }
    void skip(std::size_t n) {
        if (pos + n > b.size()) fail(Errc::ParseError, path + ": truncated GIF");
        pos += n;
    }
};

void skip_subblocks(ByteReader& r) {
    for (;;) {
        unsigned n = r.u8();
        if (n == 0) return;
        r.skip(n);
    }
}

std::vector<unsigned char> read_subblocks(ByteReader& r) {
    std::vector<unsigned char> out;
    for (;;) {
        unsigned n = r.u8();
        if (n == 0) return out;
        for (unsigned i = 0; i < n; ++i) out.push_back(static_cast<unsigned char>(r.u8()));
    }
}

// GIF-variant LZW: variable code width starting at min_code_size+1, grows to
// 12 bits, clear/EOI control codes, codes emitted LSB-first.
std::vector<unsigned char> lzw_decode(const std::vector<unsigned char>& src, int min_code_size,
                                      std::size_t expected, const std::string& path) {
    const int clear_code = 1 << min_code_size;
    const int eoi_code = clear_code + 1;
    constexpr int kMaxCodes = 4096;

    std::vector<int> prefix(kMaxCodes, -1);
    std::vector<unsigned char> suffix(kMaxCodes, 0);
    std::vector<unsigned char> out;
    out.reserve(expected);

    int code_size = min_code_size + 1;
    int next_code = eoi_code + 1;
    int prev = -1;

    std::size_t bitpos = 0;
    const std::size_t nbits = src.size() * 8;
    std::vector<unsigned char> entry;

    auto reset_table = [&] {
        next_code = eoi_code + 1;
        code_size = min_code_size + 1;
        prev = -1;
    };

    auto expand = [&](int code) {
        entry.clear();
        while (code >= 0) {
            entry.push_back(suffix[code]);
            code = prefix[code];
        }
        std::reverse(entry.begin(), entry.end());
    };

    while (bitpos + code_size <= nbits && out.size() < expected) {
        int code = 0;
        for (int i = 0; i < code_size; ++i) {
            std::size_t p = bitpos + i;
            if (src[p >> 3] & (1u << (p & 7))) code |= 1 << i;
        }
        bitpos += code_size;

        if (code == clear_code) {
            reset_table();
            continue;
        }
        if (code == eoi_code) break;

        if (prev < 0) {
            if (code >= clear_code) fail(Errc::ParseError, path + ": corrupt GIF stream");
            out.push_back(static_cast<unsigned char>(code));
            prev = code;
            continue;
        }

        unsigned char first;
        if (code < next_code) {
            expand(code);
            first = entry.front();
        } else if (code == next_code) {
            expand(prev);
            first = entry.front();
            entry.push_back(first);  // the KwK special case
        } else {
            fail(Errc::ParseError, path + ": corrupt GIF code");
        }
        out.insert(out.end(), entry.begin(), entry.end());

        if (next_code < kMaxCodes) {
            prefix[next_code] = prev;
            suffix[next_code] = first;
            ++next_code;
            if (next_code == (1 << code_size) && code_size < 12) ++code_size;
        }
        prev = code;
    }
    return out;
}

}  // namespace

GrayImage load_gif(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoError, "cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    ByteReader r{bytes, 0, path};

    if (bytes.size() < 13 || std::memcmp(bytes.data(), "GIF87a", 6) != 0)
        if (std::memcmp(bytes.data(), "GIF89a", 6) != 0)
            fail(Errc::ParseError, path + ": not a GIF file");
    r.pos = 6;

    const int screen_w = static_cast<int>(r.u16());
    const int screen_h = static_cast<int>(r.u16());
    const unsigned packed = r.u8();
    r.skip(2);  // background color index, aspect ratio

    std::vector<double> global_pal;
    if (packed & 0x80) {
        const int n = 2 << (packed & 0x07);
        global_pal.resize(n);
        for (int i = 0; i < n; ++i) {
            unsigned rr = r.u8(), gg = r.u8(), bb = r.u8();
            global_pal[i] = (0.299 * rr + 0.587 * gg + 0.114 * bb) / 255.0;
        }
    }
    if (screen_w < 1 || screen_h < 1) fail(Errc::ParseError, path + ": bad GIF dimensions");

    for (;;) {
        unsigned block = r.u8();
        if (block == 0x3B) break;  // trailer
        if (block == 0x21) {       // extension: label + data sub-blocks
            r.u8();
            skip_subblocks(r);
            continue;
        }
        if (block != 0x2C) fail(Errc::ParseError, path + ": unexpected GIF block");

        const int left = static_cast<int>(r.u16());
        const int top = static_cast<int>(r.u16());
        const int iw = static_cast<int>(r.u16());
        const int ih = static_cast<int>(r.u16());
        const unsigned ipacked = r.u8();

        std::vector<double> pal = global_pal;
        if (ipacked & 0x80) {
            const int n = 2 << (ipacked & 0x07);
            pal.resize(n);
            for (int i = 0; i < n; ++i) {
                unsigned rr = r.u8(), gg = r.u8(), bb = r.u8();
                pal[i] = (0.299 * rr + 0.587 * gg + 0.114 * bb) / 255.0;
            }
        }
        if (pal.empty()) fail(Errc::ParseError, path + ": GIF image has no color table");

        const int min_code_size = static_cast<int>(r.u8());
        if (min_code_size < 1 || min_code_size > 11)
            fail(Errc::ParseError, path + ": bad GIF LZW code size");
        std::vector<unsigned char> compressed = read_subblocks(r);
        const std::size_t expected = static_cast<std::size_t>(iw) * ih;
        std::vector<unsigned char> idx = lzw_decode(compressed, min_code_size, expected, path);
        if (idx.size() < expected) fail(Errc::ParseError, path + ": GIF pixel data incomplete");

        GrayImage img(screen_w, screen_h, 0.0);
        const bool interlaced = (ipacked & 0x40) != 0;
        static const int pass_start[4] = {0, 4, 2, 1};
        static const int pass_step[4] = {8, 8, 4, 2};
        std::size_t src_row = 0;
        auto blit_row = [&](int y) {
            if (y + top >= screen_h) return;
            for (int x = 0; x < iw; ++x) {
                int dx = x + left;
                if (dx >= screen_w) continue;
                unsigned ci = idx[src_row * iw + x];
                img.at(dx, y + top) = ci < pal.size() ? pal[ci] : 0.0;
            }
            ++src_row;
        };
        if (interlaced) {
            for (int pass = 0; pass < 4; ++pass)
                for (int y = pass_start[pass]; y < ih; y += pass_step[pass]) blit_row(y);
        } else {
            for (int y = 0; y < ih; ++y) blit_row(y);
        }
        return img;  // first frame only
    }
    fail(Errc::ParseError, path + ": GIF contains no image data");
}

GrayImage load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoError, "cannot open " + path);
    unsigned char magic[6] = {0};
    in.read(reinterpret_cast<char*>(magic), 6);
    in.close();
    if (magic[0] == 0x89 && magic[1] == 'P') return load_png(path);
    if (std::memcmp(magic, "GIF", 3) == 0) return load_gif(path);
    if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) return load_pgm(path);
    fail(Errc::ParseError, path + ": unsupported image format (need PNG, PGM, or GIF)");
}

// ===========================================================================
// Transforms
// ===========================================================================

GrayImage rotate90(const GrayImage& img) {
    GrayImage out(img.height, img.width);
    // (x, y) -> (y, W-1-x): counterclockwise quarter turn in raster coords.
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(y, img.width - 1 - x) = img.at(x, y);
    return out;
}

GrayImage rotate_nn(const GrayImage& img, double degrees) {
    const double rad = degrees * kPi / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);
    const double w = img.width, h = img.height;
    const int out_w = static_cast<int>(std::ceil(std::abs(w * c) + std::abs(h * s))) + 2;
    const int out_h = static_cast<int>(std::ceil(std::abs(w * s) + std::abs(h * c))) + 2;
    GrayImage out(out_w, out_h, 0.0);
    const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
    const double ox = (out_w - 1) / 2.0, oy = (out_h - 1) / 2.0;
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            // inverse map: rotate output coords by -angle back into source
            const double dx = x - ox, dy = y - oy;
            const double sx = c * dx + s * dy + cx;
            const double sy = -s * dx + c * dy + cy;
            const int ix = static_cast<int>(std::lround(sx));
            const int iy = static_cast<int>(std::lround(sy));
            if (img.in_bounds(ix, iy)) out.at(x, y) = img.at(ix, iy);
        }
    }
    return out;
}

GrayImage scale_nn(const GrayImage& img, double factor) {
    if (!(factor > 0.0)) fail(Errc::InvalidParams, "scale factor must be positive");
    const int out_w = std::max(1, static_cast<int>(std::lround(img.width * factor)));
    const int out_h = std::max(1, static_cast<int>(std::lround(img.height * factor)));
    GrayImage out(out_w, out_h, 0.0);
    // center-aligned sampling; floor-based mapping would bias the shape by
    // half a pixel on two sides and inject a spurious elongation component
    for (int y = 0; y < out_h; ++y) {
        const int sy = std::clamp(
            static_cast<int>(std::lround((y + 0.5) / factor - 0.5)), 0, img.height - 1);
        for (int x = 0; x < out_w; ++x) {
            const int sx = std::clamp(
                static_cast<int>(std::lround((x + 0.5) / factor - 0.5)), 0, img.width - 1);
            out.at(x, y) = img.at(sx, sy);
        }
    }
    return out;
}

GrayImage translate(const GrayImage& img, int dx, int dy, int pad) {
    GrayImage out(img.width + 2 * pad, img.height + 2 * pad, 0.0);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const int ox = x + dx + pad, oy = y + dy + pad;
            if (out.in_bounds(ox, oy)) out.at(ox, oy) = img.at(x, y);
        }
    }
    return out;
}

GrayImage flip_boundary_noise(const GrayImage& img, double fraction, std::uint64_t seed) {
    GrayImage out = img;
    std::vector<std::size_t> boundary;
    auto fg = [&](int x, int y) { return img.at(x, y) > 0.5; };
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const bool f = fg(x, y);
            const bool edge = (x > 0 && fg(x - 1, y) != f) || (x + 1 < img.width && fg(x + 1, y) != f) ||
                              (y > 0 && fg(x, y - 1) != f) || (y + 1 < img.height && fg(x, y + 1) != f);
            if (edge) boundary.push_back(static_cast<std::size_t>(y) * img.width + x);
        }
    }
    SplitMix64 rng(seed);
    // partial Fisher-Yates: the first n_flip slots end up uniformly chosen
    const std::size_t n_flip = static_cast<std::size_t>(std::lround(fraction * boundary.size()));
    for (std::size_t i = 0; i < n_flip && i < boundary.size(); ++i) {
        std::size_t j = i + rng.below(boundary.size() - i);
        std::swap(boundary[i], boundary[j]);
        out.data[boundary[i]] = out.data[boundary[i]] > 0.5 ? 0.0 : 1.0;
    }
    return out;
}

}  // namespace shapekit
