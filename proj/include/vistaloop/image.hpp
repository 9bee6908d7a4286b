#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vistaloop/common.hpp"
#include "vistaloop/vocab.hpp"

namespace vistaloop {

// Dense 8-bit RGB raster, row-major.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill = {0, 0, 0})
        : width_(width), height_(height), data_(static_cast<size_t>(width) * height * 3) {
        if (width < 0 || height < 0) throw ContractError("negative image dimensions");
        for (size_t i = 0; i < data_.size(); i += 3) {
            data_[i] = fill.r;
            data_[i + 1] = fill.g;
            data_[i + 2] = fill.b;
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return width_ == 0 || height_ == 0; }
    size_t pixel_count() const { return static_cast<size_t>(width_) * height_; }

    Rgb at(int x, int y) const {
        const size_t i = idx(x, y);
        return {data_[i], data_[i + 1], data_[i + 2]};
    }
    void set(int x, int y, Rgb c) {
        const size_t i = idx(x, y);
        data_[i] = c.r;
        data_[i + 1] = c.g;
        data_[i + 2] = c.b;
    }

    const std::vector<uint8_t>& bytes() const { return data_; }
    std::vector<uint8_t>& bytes() { return data_; }

    bool operator==(const Image& o) const {
        return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
    }

    Image crop(int x0, int y0, int w, int h) const {
        if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > width_ || y0 + h > height_)
            throw ContractError("crop rectangle outside image");
        Image out(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out.set(x, y, at(x0 + x, y0 + y));
        return out;
    }

private:
    size_t idx(int x, int y) const {
        return (static_cast<size_t>(y) * static_cast<size_t>(width_) + static_cast<size_t>(x)) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> data_;
};

// Per-pixel instance identifiers: 0 = background, k+1 = object index k.
class IdBuffer {
public:
    IdBuffer() = default;
    IdBuffer(int width, int height) : width_(width), height_(height), data_(static_cast<size_t>(width) * height, 0) {}

    int width() const { return width_; }
    int height() const { return height_; }
    uint16_t at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }
    void set(int x, int y, uint16_t v) { data_[static_cast<size_t>(y) * width_ + x] = v; }
    const std::vector<uint16_t>& values() const { return data_; }

    bool operator==(const IdBuffer& o) const {
        return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint16_t> data_;
};

// Rec.601 luma in [0,1].
inline double luminance(Rgb c) {
    return (0.299 * c.r + 0.587 * c.g + 0.114 * c.b) / 255.0;
}

// Box blur with square radius; edges clamp. Radius 0 is identity.
inline Image box_blur(const Image& img, int radius) {
    if (radius <= 0) return img;
    Image out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            long sr = 0, sg = 0, sb = 0;
            int n = 0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    int sx = x + dx, sy = y + dy;
                    if (sx < 0) sx = 0;
                    if (sy < 0) sy = 0;
                    if (sx >= img.width()) sx = img.width() - 1;
                    if (sy >= img.height()) sy = img.height() - 1;
                    const Rgb c = img.at(sx, sy);
                    sr += c.r;
                    sg += c.g;
                    sb += c.b;
                    ++n;
                }
            }
            out.set(x, y, {static_cast<uint8_t>(sr / n), static_cast<uint8_t>(sg / n),
                           static_cast<uint8_t>(sb / n)});
        }
    }
    return out;
}

// ── PPM / PGM serialization ─────────────────────────────────────────────────
// Frames export as binary PPM (P6); instance ids as 16-bit binary PGM (P5,
// big-endian sample order per the netpbm spec).

inline std::string encode_ppm(const Image& img) {
    std::string out = "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) +
                      "\n255\n";
    out.append(reinterpret_cast<const char*>(img.bytes().data()), img.bytes().size());
    return out;
}

inline std::string encode_pgm16(const IdBuffer& ids) {
    std::string out = "P5\n" + std::to_string(ids.width()) + " " + std::to_string(ids.height()) +
                      "\n65535\n";
    out.reserve(out.size() + ids.values().size() * 2);
    for (uint16_t v : ids.values()) {
        out.push_back(static_cast<char>(v >> 8));
        out.push_back(static_cast<char>(v & 0xff));
    }
    return out;
}

inline std::string encode_pgm8(const std::vector<uint8_t>& mask, int width, int height) {
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(mask.data()), mask.size());
    return out;
}

namespace detail {

inline void skip_pnm_whitespace(std::istream& in) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            in.get();
        } else {
            return;
        }
    }
}

inline long read_pnm_int(std::istream& in) {
    skip_pnm_whitespace(in);
    long v = 0;
    if (!(in >> v)) throw ParseError("malformed PNM header");
    return v;
}

}  // namespace detail

inline Image decode_ppm(const std::string& text) {
    std::istringstream in(text, std::ios::binary);
    std::string magic;
    in >> magic;
    if (magic != "P6") throw ParseError("not a binary PPM (P6) file");
    const long w = detail::read_pnm_int(in);
    const long h = detail::read_pnm_int(in);
    const long maxval = detail::read_pnm_int(in);
    if (maxval != 255) throw ParseError("unsupported PPM maxval");
    in.get();  // single whitespace before raster
    Image img(static_cast<int>(w), static_cast<int>(h));
    in.read(reinterpret_cast<char*>(img.bytes().data()),
            static_cast<std::streamsize>(img.bytes().size()));
    if (in.gcount() != static_cast<std::streamsize>(img.bytes().size()))
        throw ParseError("truncated PPM raster");
    return img;
}

inline IdBuffer decode_pgm16(const std::string& text) {
    std::istringstream in(text, std::ios::binary);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw ParseError("not a binary PGM (P5) file");
    const long w = detail::read_pnm_int(in);
    const long h = detail::read_pnm_int(in);
    const long maxval = detail::read_pnm_int(in);
    if (maxval != 65535) throw ParseError("expected 16-bit PGM");
    in.get();
    IdBuffer ids(static_cast<int>(w), static_cast<int>(h));
    std::vector<char> raw(static_cast<size_t>(w) * h * 2);
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw ParseError("truncated PGM raster");
    for (long i = 0; i < w * h; ++i) {
        const auto hi = static_cast<uint8_t>(raw[2 * i]);
        const auto lo = static_cast<uint8_t>(raw[2 * i + 1]);
        ids.set(static_cast<int>(i % w), static_cast<int>(i / w),
                static_cast<uint16_t>((hi << 8) | lo));
    }
    return ids;
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for read: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace vistaloop
