#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace lexcraft::oracle {

namespace {

double linearize(double v)
{
    v /= 255.0;
    if (v <= 0.04045)
        return v / 12.92;
    return std::pow((v + 0.055) / 1.055, 2.4);
}

double f(double t)
{
    const double d = 6.0 / 29.0;
    if (t > d * d * d)
        return std::cbrt(t);
    return t / (3 * d * d) + 4.0 / 29.0;
}

struct Weighted {
    std::array<double, 3> lab;
    double count;
};

double block_cost(const std::vector<Weighted>& colors, const std::vector<int>& block_of, int block)
{
    double n = 0, m[3] = {0, 0, 0};
    for (std::size_t i = 0; i < colors.size(); ++i)
        if (block_of[i] == block) {
            n += colors[i].count;
            for (int c = 0; c < 3; ++c)
                m[c] += colors[i].count * colors[i].lab[c];
        }
    if (n == 0)
        return 0;
    for (double& v : m)
        v /= n;
    double cost = 0;
    for (std::size_t i = 0; i < colors.size(); ++i)
        if (block_of[i] == block) {
            double d = 0;
            for (int c = 0; c < 3; ++c)
                d += (colors[i].lab[c] - m[c]) * (colors[i].lab[c] - m[c]);
            cost += colors[i].count * d;
        }
    return cost;
}

// Enumerates set partitions as restricted growth strings.
void search(const std::vector<Weighted>& colors, std::vector<int>& block_of, std::size_t i, int used, int k,
            double& best)
{
    if (i == colors.size()) {
        double cost = 0;
        for (int b = 0; b < used; ++b)
            cost += block_cost(colors, block_of, b);
        best = std::min(best, cost);
        return;
    }
    for (int b = 0; b <= std::min(used, k - 1); ++b) {
        block_of[i] = b;
        search(colors, block_of, i + 1, std::max(used, b + 1), k, best);
    }
}

} // namespace

std::array<double, 3> lab(Rgb c)
{
    const double r = linearize(c.r), g = linearize(c.g), b = linearize(c.b);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double fx = f(x / 0.95047), fy = f(y / 1.0), fz = f(z / 1.08883);
    return {116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)};
}

double optimal_cost(std::span<const Rgb> pixels, int k)
{
    std::map<Rgb, double> hist;
    for (Rgb p : pixels)
        hist[p] += 1;
    if (hist.size() > 10)
        throw std::invalid_argument("oracle limited to 10 distinct colours");
    std::vector<Weighted> colors;
    for (const auto& [c, n] : hist)
        colors.push_back({lab(c), n});
    std::vector<int> block_of(colors.size(), 0);
    double best = std::numeric_limits<double>::infinity();
    search(colors, block_of, 0, 0, k, best);
    return best;
}

std::vector<Rgb> small_image(std::mt19937_64& rng, int max_colors, int max_pixels)
{
    const int n_colors = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_colors - 1));
    std::vector<Rgb> palette;
    while (static_cast<int>(palette.size()) < n_colors) {
        const Rgb c{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
        if (std::find(palette.begin(), palette.end(), c) == palette.end())
            palette.push_back(c);
    }
    const int n_pixels = n_colors + static_cast<int>(rng() % static_cast<std::uint64_t>(max_pixels - n_colors + 1));
    std::vector<Rgb> pixels(palette.begin(), palette.end());
    while (static_cast<int>(pixels.size()) < n_pixels)
        pixels.push_back(palette[rng() % palette.size()]);
    std::shuffle(pixels.begin(), pixels.end(), rng);
    return pixels;
}

std::vector<std::size_t> counts(const Image& image, const WeightedPalette& palette, const Mask* mask)
{
    std::vector<std::size_t> out(palette.size(), 0);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x) {
            if (mask && !mask->at(x, y))
                continue;
            const int i = palette.find(image.at(x, y));
            if (i < 0)
                throw std::runtime_error("pixel outside palette");
            ++out[static_cast<std::size_t>(i)];
        }
    return out;
}

} // namespace lexcraft::oracle
