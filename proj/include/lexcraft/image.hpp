#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lexcraft {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend constexpr bool operator==(Rgb, Rgb) = default;
    friend constexpr auto operator<=>(Rgb, Rgb) = default;
};

/// "#RRGGBB", upper-case hex.
std::string to_hex(Rgb c);
/// Accepts "#RRGGBB" or "RRGGBB" in either case; throws Error{InvalidColor}.
Rgb rgb_from_hex(const std::string& text);

/// Row-major sRGB pixel grid.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;

    Image() = default;
    Image(int w, int h, Rgb fill = {255, 255, 255});

    Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    Rgb at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    bool empty() const { return pixels.empty(); }

    friend bool operator==(const Image&, const Image&) = default;
};

/// Row-major binary grid; nonzero bytes are "set".
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    Mask() = default;
    Mask(int w, int h, bool value = false);

    bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    std::size_t count() const;

    friend bool operator==(const Mask&, const Mask&) = default;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Bilinear resample with pixel-centre alignment; edges clamp.
Image resize_bilinear(const Image& src, int width, int height);
/// Nearest-neighbour resample using the same centre alignment as resize_bilinear.
Mask resize_nearest(const Mask& src, int width, int height);
Image crop(const Image& src, const PixelRect& rect);

/// Stable digest over dimensions and pixel bytes (hex sha256).
std::string content_hash(const Image& img);
std::string mask_hash(const Mask& mask);

/// Decodes an 8-bit (or lower) PNG, dropping alpha; throws Error{DecodeError}.
Image decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_png(const Image& img);

Image read_png_file(const std::string& path);
void write_png_file(const std::string& path, const Image& img);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

} // namespace lexcraft
