#include "lexcraft/image.hpp"

#include "lexcraft/canonical.hpp"
#include "lexcraft/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

namespace lexcraft {

std::string to_hex(Rgb c)
{
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02X%02X%02X", c.r, c.g, c.b);
    return buf;
}

Rgb rgb_from_hex(const std::string& text)
{
    std::string_view s = text;
    if (!s.empty() && s.front() == '#')
        s.remove_prefix(1);
    if (s.size() != 6)
        throw Error(ErrorCode::InvalidColor, "expected #RRGGBB, got '" + text + "'");
    auto nibble = [&](char ch) -> int {
        if (ch >= '0' && ch <= '9') return ch - '0';
        if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
        if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
        throw Error(ErrorCode::InvalidColor, "expected #RRGGBB, got '" + text + "'");
    };
    auto byte = [&](std::size_t i) {
        return static_cast<std::uint8_t>(nibble(s[i]) * 16 + nibble(s[i + 1]));
    };
    return {byte(0), byte(2), byte(4)};
}

Image::Image(int w, int h, Rgb fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill)
{
}

Mask::Mask(int w, int h, bool value)
    : width(w), height(h), bits(static_cast<std::size_t>(w) * h, value ? 1 : 0)
{
}

std::size_t Mask::count() const
{
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

namespace {

double source_coord(int dst, int dst_size, int src_size)
{
    return (dst + 0.5) * static_cast<double>(src_size) / dst_size - 0.5;
}

std::uint8_t lerp_channel(double a, double b, double c, double d, double fx, double fy)
{
    const double top = a + (b - a) * fx;
    const double bottom = c + (d - c) * fx;
    const double v = top + (bottom - top) * fy;
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

} // namespace

Image resize_bilinear(const Image& src, int width, int height)
{
    Image out(width, height);
    if (src.empty() || width <= 0 || height <= 0)
        return out;
    for (int y = 0; y < height; ++y) {
        const double sy = std::clamp(source_coord(y, height, src.height), 0.0, src.height - 1.0);
        const int y0 = static_cast<int>(std::floor(sy));
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double fy = sy - y0;
        for (int x = 0; x < width; ++x) {
            const double sx = std::clamp(source_coord(x, width, src.width), 0.0, src.width - 1.0);
            const int x0 = static_cast<int>(std::floor(sx));
            const int x1 = std::min(x0 + 1, src.width - 1);
            const double fx = sx - x0;
            const Rgb a = src.at(x0, y0), b = src.at(x1, y0), c = src.at(x0, y1), d = src.at(x1, y1);
            out.at(x, y) = {lerp_channel(a.r, b.r, c.r, d.r, fx, fy),
                            lerp_channel(a.g, b.g, c.g, d.g, fx, fy),
                            lerp_channel(a.b, b.b, c.b, d.b, fx, fy)};
        }
    }
    return out;
}

Mask resize_nearest(const Mask& src, int width, int height)
{
    Mask out(width, height);
    if (src.bits.empty() || width <= 0 || height <= 0)
        return out;
    for (int y = 0; y < height; ++y) {
        const int sy = std::clamp(static_cast<int>(std::lround(source_coord(y, height, src.height))), 0, src.height - 1);
        for (int x = 0; x < width; ++x) {
            const int sx = std::clamp(static_cast<int>(std::lround(source_coord(x, width, src.width))), 0, src.width - 1);
            out.set(x, y, src.at(sx, sy));
        }
    }
    return out;
}

Image crop(const Image& src, const PixelRect& rect)
{
    Image out(rect.width(), rect.height());
    for (int y = 0; y < rect.height(); ++y)
        for (int x = 0; x < rect.width(); ++x)
            out.at(x, y) = src.at(rect.x0 + x, rect.y0 + y);
    return out;
}

std::string content_hash(const Image& img)
{
    std::vector<std::uint8_t> bytes;
    bytes.reserve(8 + img.pixels.size() * 3);
    for (int v : {img.width, img.height})
        for (int shift = 24; shift >= 0; shift -= 8)
            bytes.push_back(static_cast<std::uint8_t>((static_cast<unsigned>(v) >> shift) & 0xFF));
    for (Rgb p : img.pixels) {
        bytes.push_back(p.r);
        bytes.push_back(p.g);
        bytes.push_back(p.b);
    }
    return sha256_hex(bytes);
}

std::string mask_hash(const Mask& mask)
{
    std::vector<std::uint8_t> bytes;
    bytes.reserve(8 + mask.bits.size());
    for (int v : {mask.width, mask.height})
        for (int shift = 24; shift >= 0; shift -= 8)
            bytes.push_back(static_cast<std::uint8_t>((static_cast<unsigned>(v) >> shift) & 0xFF));
    for (std::uint8_t b : mask.bits)
        bytes.push_back(b ? 1 : 0);
    return sha256_hex(bytes);
}

Image decode_png(std::span<const std::uint8_t> bytes)
{
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
        throw Error(ErrorCode::DecodeError, std::string("not a readable PNG: ") + img.message);
    img.format = PNG_FORMAT_RGBA;
    if (img.width == 0 || img.height == 0 || img.width > 1u << 15 || img.height > 1u << 15) {
        png_image_free(&img);
        throw Error(ErrorCode::DecodeError, "unsupported PNG dimensions");
    }
    std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, rgba.data(), 0, nullptr)) {
        std::string msg = img.message;
        png_image_free(&img);
        throw Error(ErrorCode::DecodeError, "corrupt PNG: " + msg);
    }
    Image out(static_cast<int>(img.width), static_cast<int>(img.height));
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        out.pixels[i] = {rgba[i * 4], rgba[i * 4 + 1], rgba[i * 4 + 2]};
    return out;
}

std::vector<std::uint8_t> encode_png(const Image& src)
{
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(src.width);
    img.height = static_cast<png_uint_32>(src.height);
    img.format = PNG_FORMAT_RGB;
    static_assert(sizeof(Rgb) == 3);
    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&img, nullptr, &size, 0, src.pixels.data(), 0, nullptr))
        throw Error(ErrorCode::IoError, std::string("png encode failed: ") + img.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&img, out.data(), &size, 0, src.pixels.data(), 0, nullptr))
        throw Error(ErrorCode::IoError, std::string("png encode failed: ") + img.message);
    out.resize(size);
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorCode::IoError, "short write to " + path);
}

Image read_png_file(const std::string& path)
{
    return decode_png(read_file_bytes(path));
}

void write_png_file(const std::string& path, const Image& img)
{
    write_file_bytes(path, encode_png(img));
}

} // namespace lexcraft
