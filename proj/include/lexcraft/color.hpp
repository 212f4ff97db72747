#pragma once

#include "lexcraft/image.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace lexcraft {

inline constexpr std::uint64_t kDefaultSeed = 0xB21C;

/// CIELAB, D65 white point.
struct Lab {
    double l = 0.0;
    double a = 0.0;
    double b = 0.0;
};

Lab srgb_to_lab(Rgb c);
/// Inverse conversion; out-of-gamut values are clamped per channel.
Rgb lab_to_srgb(const Lab& c);
/// Euclidean distance in Lab (CIE76 delta E).
double delta_e(const Lab& x, const Lab& y);

struct PaletteEntry {
    Rgb color;
    double weight = 0.0;

    friend bool operator==(const PaletteEntry&, const PaletteEntry&) = default;
};

/// Scales nonnegative raw weights to millionths that sum to exactly one
/// million (largest-remainder rounding, ties to the lower index) and returns
/// them as fractions. Every output is representable with six decimals.
std::vector<double> normalize_weights(std::span<const double> raw);

/// Ordered palette with fractional weights.
///
/// Entries are unique by colour, sorted by weight descending with ties broken
/// by (r, g, b) ascending, and weights sum to one.
class WeightedPalette {
public:
    WeightedPalette() = default;

    /// Merges duplicate colours (weights summed), normalises and sorts.
    /// Raw weights must be nonnegative with a positive sum.
    static WeightedPalette from_weights(std::span<const PaletteEntry> raw);

    const std::vector<PaletteEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const PaletteEntry& operator[](std::size_t i) const { return entries_[i]; }

    /// Index of the entry with exactly this colour, or -1.
    int find(Rgb c) const;

    nlohmann::json to_json() const;
    static WeightedPalette from_json(const nlohmann::json& j);

    friend bool operator==(const WeightedPalette&, const WeightedPalette&) = default;

private:
    std::vector<PaletteEntry> entries_;
};

/// Dominant colours by weighted k-means in Lab with k-means++ seeding.
///
/// Inputs above 4096 pixels are subsampled by uniform stride. Clusters whose
/// centroids are closer than 2.0 delta E are merged. When the input has fewer
/// than k distinct colours each distinct colour becomes one entry.
/// Throws Error{EmptyInput} or Error{InvalidK}.
WeightedPalette kmeans_palette(std::span<const Rgb> pixels, int k, std::uint64_t seed = kDefaultSeed);

/// Sum over pixels of the squared Lab distance to the nearest palette colour.
double clustering_cost(std::span<const Rgb> pixels, const WeightedPalette& palette);

enum class QuantizeMode { Nearest, Proportional };

struct QuantizeReport {
    Image image;
    std::vector<double> achieved;   // per palette entry, over in-mask pixels
    int passes = 0;                 // rebalancing passes used
    double max_deviation = 0.0;     // max |achieved - weight|
};

/// Maps every in-mask pixel to a palette colour; pixels outside the mask are
/// copied through unchanged. Proportional mode starts from the nearest
/// assignment and greedily moves the cheapest pixels of over-quota entries
/// (share above weight by more than 0.02) to under-quota entries, for at most
/// ten passes.
QuantizeReport quantize_report(const Image& image, const WeightedPalette& palette, QuantizeMode mode,
                               const Mask* mask = nullptr);

Image quantize_to_palette(const Image& image, const WeightedPalette& palette, QuantizeMode mode,
                          const Mask* mask = nullptr);

/// Per-entry pixel share over in-mask pixels. Throws Error{NonPaletteColor}
/// if an in-mask pixel is not exactly a palette colour.
std::vector<double> achieved_proportions(const Image& image, const WeightedPalette& palette,
                                         const Mask* mask = nullptr);

} // namespace lexcraft
