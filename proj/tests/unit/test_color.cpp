#include "support/check.hpp"
#include "support/oracles.hpp"

#include "lexcraft/canonical.hpp"
#include "lexcraft/color.hpp"
#include "lexcraft/error.hpp"

#include <doctest.h>

#include <numeric>

using namespace lexcraft;

namespace {

std::vector<Rgb> repeat(Rgb c, int n)
{
    return std::vector<Rgb>(static_cast<std::size_t>(n), c);
}

WeightedPalette palette_of(std::initializer_list<PaletteEntry> entries)
{
    std::vector<PaletteEntry> v(entries);
    return WeightedPalette::from_weights(v);
}

double weight_sum(const WeightedPalette& p)
{
    double s = 0;
    for (const auto& e : p.entries())
        s += e.weight;
    return s;
}

constexpr Rgb kRed{255, 0, 0}, kBlue{0, 0, 255}, kGreen{0, 255, 0}, kYellow{255, 255, 0};

} // namespace

TEST_CASE("srgb_to_lab: black and white")
{
    const Lab black = srgb_to_lab({0, 0, 0});
    CHECK(black.l == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(black.a == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(black.b == doctest::Approx(0.0).epsilon(1e-9));

    const Lab white = srgb_to_lab({255, 255, 255});
    CHECK(white.l == doctest::Approx(100.0).epsilon(1e-4));
    CHECK(std::abs(white.a) < 1e-2);
    CHECK(std::abs(white.b) < 1e-2);
}

TEST_CASE("srgb_to_lab: red against published reference and the scalar oracle")
{
    const Lab red = srgb_to_lab(kRed);
    CHECK(red.l == doctest::Approx(53.2408).epsilon(1e-5));
    CHECK(red.a == doctest::Approx(80.0925).epsilon(1e-5));
    CHECK(red.b == doctest::Approx(67.2032).epsilon(1e-5));

    const auto o = oracle::lab(kRed);
    CHECK(red.l == doctest::Approx(o[0]).epsilon(1e-6));
    CHECK(red.a == doctest::Approx(o[1]).epsilon(1e-6));
    CHECK(red.b == doctest::Approx(o[2]).epsilon(1e-6));
}

TEST_CASE("srgb_to_lab agrees with the oracle over a colour grid")
{
    for (int r = 0; r < 256; r += 15)
        for (int g = 0; g < 256; g += 15)
            for (int b = 0; b < 256; b += 15) {
                const Rgb c{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
                const Lab lab = srgb_to_lab(c);
                const auto o = oracle::lab(c);
                REQUIRE(std::abs(lab.l - o[0]) < 1e-4);
                REQUIRE(std::abs(lab.a - o[1]) < 1e-4);
                REQUIRE(std::abs(lab.b - o[2]) < 1e-4);
            }
}

TEST_CASE("lab_to_srgb round-trips within one unit per channel")
{
    for (int r = 0; r < 256; r += 5)
        for (int g = 0; g < 256; g += 17)
            for (int b = 0; b < 256; b += 13) {
                const Rgb c{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
                const Rgb back = lab_to_srgb(srgb_to_lab(c));
                REQUIRE(std::abs(back.r - c.r) <= 1);
                REQUIRE(std::abs(back.g - c.g) <= 1);
                REQUIRE(std::abs(back.b - c.b) <= 1);
            }
}

TEST_CASE("lab_to_srgb clamps out-of-gamut input")
{
    const Rgb c = lab_to_srgb({150.0, 200.0, -200.0});
    CHECK(c.r <= 255);
    const Rgb d = lab_to_srgb({-20.0, 0.0, 0.0});
    CHECK(d == Rgb{0, 0, 0});
}

TEST_CASE("delta_e is the Euclidean Lab distance")
{
    CHECK(delta_e({0, 0, 0}, {3, 4, 0}) == doctest::Approx(5.0));
    CHECK(delta_e({10, -2, 7}, {10, -2, 7}) == 0.0);
}

TEST_CASE("normalize_weights sums exactly and rounds to six decimals")
{
    const std::vector<double> raw{0.02, 0.01};
    const auto w = normalize_weights(raw);
    REQUIRE(w.size() == 2);
    CHECK(canonical_dump(w[0]) == "0.666667");
    CHECK(canonical_dump(w[1]) == "0.333333");

    const std::vector<double> thirds{1, 1, 1};
    const auto t = normalize_weights(thirds);
    CHECK(std::accumulate(t.begin(), t.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : t)
        CHECK(round6(v) == v);
}

TEST_CASE("WeightedPalette merges duplicates, sorts and sums to one")
{
    const auto p = palette_of({{kBlue, 1}, {kRed, 1}, {kBlue, 2}, {kGreen, 4}});
    REQUIRE(p.size() == 3);
    CHECK(p[0].color == kGreen);
    CHECK(p[1].color == kBlue);
    CHECK(p[2].color == kRed);
    CHECK(weight_sum(p) == doctest::Approx(1.0).epsilon(1e-9));

    const auto tie = palette_of({{kBlue, 1}, {kRed, 1}});
    CHECK(tie[0].color == kBlue);  // (0,0,255) < (255,0,0)
    CHECK(tie.find(kRed) == 1);
    CHECK(tie.find(kGreen) == -1);
}

TEST_CASE("WeightedPalette JSON round trip")
{
    const auto p = palette_of({{{12, 200, 99}, 3}, {kRed, 1}});
    const auto j = p.to_json();
    CHECK(canonical_dump(j) == R"([{"rgb":"#0CC863","weight":0.750000},{"rgb":"#FF0000","weight":0.250000}])");
    CHECK(WeightedPalette::from_json(j) == p);
}

TEST_CASE("WeightedPalette rejects bad weights")
{
    CHECK(error_code([] { palette_of({{kRed, 0}}); }) == ErrorCode::EmptyPalette);
    CHECK(error_code([] { palette_of({{kRed, -1}, {kBlue, 2}}); }).has_value());
    std::vector<PaletteEntry> none;
    CHECK(error_code([&] { WeightedPalette::from_weights(none); }) == ErrorCode::EmptyPalette);
}

TEST_CASE("kmeans_palette: single colour collapses")
{
    const auto px = repeat({200, 40, 40}, 100);
    const auto p = kmeans_palette(px, 5);
    REQUIRE(p.size() == 1);
    CHECK(p[0].color == Rgb{200, 40, 40});
    CHECK(p[0].weight == 1.0);
}

TEST_CASE("kmeans_palette: half red, half blue")
{
    auto px = repeat(kRed, 50);
    const auto blue = repeat(kBlue, 50);
    px.insert(px.end(), blue.begin(), blue.end());
    const auto p = kmeans_palette(px, 2);
    REQUIRE(p.size() == 2);
    // Equal weights fall back to (r, g, b) ascending.
    CHECK(p[0].color == kBlue);
    CHECK(p[1].color == kRed);
    CHECK(p[0].weight == 0.5);
    CHECK(p[1].weight == 0.5);
}

TEST_CASE("kmeans_palette: never more than k entries, weights sum to one")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Rgb> px(300);
        for (auto& c : px)
            c = {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
        const auto p = kmeans_palette(px, 5);
        CHECK(p.size() <= 5);
        CHECK(weight_sum(p) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("kmeans_palette is a pure function of pixels, k and seed")
{
    std::mt19937_64 rng(11);
    std::vector<Rgb> px(5000);
    for (auto& c : px)
        c = {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng() & 0x7F), 30};
    const auto a = canonical_dump(kmeans_palette(px, 5, 99).to_json());
    const auto b = canonical_dump(kmeans_palette(px, 5, 99).to_json());
    CHECK(a == b);
}

TEST_CASE("kmeans_palette merges centroids closer than 2 delta E")
{
    // Two nearly identical greys plus a distinct red: k=3 must not keep both greys.
    std::vector<Rgb> px = repeat({128, 128, 128}, 30);
    const auto near = repeat({129, 128, 128}, 30);
    const auto red = repeat(kRed, 30);
    px.insert(px.end(), near.begin(), near.end());
    px.insert(px.end(), red.begin(), red.end());
    const auto p = kmeans_palette(px, 3);
    REQUIRE(p.size() == 2);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size(); ++j)
            CHECK(delta_e(srgb_to_lab(p[i].color), srgb_to_lab(p[j].color)) >= 2.0);
}

TEST_CASE("kmeans_palette errors")
{
    std::vector<Rgb> none;
    const auto px = repeat(kRed, 4);
    CHECK(error_code([&] { kmeans_palette(none, 3); }) == ErrorCode::EmptyInput);
    CHECK(error_code([&] { kmeans_palette(px, 0); }) == ErrorCode::InvalidK);
}

TEST_CASE("kmeans_palette stays within 5% of the brute-force optimum on small images")
{
    std::mt19937_64 rng(0x5EED);
    for (int trial = 0; trial < 40; ++trial) {
        const auto px = oracle::small_image(rng, 8, 64);
        const int k = 2 + static_cast<int>(rng() % 4);
        const double best = oracle::optimal_cost(px, k);
        const double got = clustering_cost(px, kmeans_palette(px, k, kDefaultSeed));
        INFO("trial " << trial << " k=" << k << " optimum=" << best << " got=" << got);
        CHECK(got <= best * 1.05 + 1e-9);
    }
}

TEST_CASE("quantize: single-entry palette paints every in-mask pixel")
{
    Image img(8, 8, {10, 20, 30});
    img.at(3, 3) = {200, 1, 1};
    const auto p = palette_of({{kGreen, 1}});
    for (auto mode : {QuantizeMode::Nearest, QuantizeMode::Proportional}) {
        const Image out = quantize_to_palette(img, p, mode);
        for (Rgb c : out.pixels)
            CHECK(c == kGreen);
    }
}

TEST_CASE("quantize: palette-only image is a fixed point of Nearest mode")
{
    Image img(10, 10, kRed);
    for (int x = 0; x < 10; ++x)
        img.at(x, 4) = kBlue;
    const auto p = palette_of({{kRed, 1}, {kBlue, 1}});
    CHECK(quantize_to_palette(img, p, QuantizeMode::Nearest) == img);
}

TEST_CASE("quantize: uniform grey reaches 0.7 / 0.3 in Proportional mode")
{
    const Image img(100, 100, {128, 128, 128});
    const auto p = palette_of({{kRed, 0.7}, {kBlue, 0.3}});
    const auto rep = quantize_report(img, p, QuantizeMode::Proportional);
    const auto c = oracle::counts(rep.image, p);
    CHECK(std::abs(static_cast<double>(c[0]) / 10000.0 - 0.7) <= 0.02);
    CHECK(std::abs(static_cast<double>(c[1]) / 10000.0 - 0.3) <= 0.02);
    CHECK(rep.max_deviation <= 0.02);
    CHECK(rep.passes <= 10);
}

TEST_CASE("quantize: pixels outside the mask are untouched")
{
    std::mt19937_64 rng(3);
    Image img(32, 32);
    for (auto& c : img.pixels)
        c = {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
    Mask m(32, 32);
    for (int y = 8; y < 20; ++y)
        for (int x = 4; x < 30; ++x)
            m.set(x, y, (x + y) % 3 != 0);
    const auto p = palette_of({{kRed, 0.5}, {kYellow, 0.5}});
    for (auto mode : {QuantizeMode::Nearest, QuantizeMode::Proportional}) {
        const Image out = quantize_to_palette(img, p, mode, &m);
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                if (m.at(x, y))
                    CHECK(p.find(out.at(x, y)) >= 0);
                else
                    CHECK(out.at(x, y) == img.at(x, y));
            }
    }
}

TEST_CASE("quantize: mask size must match the image")
{
    const Image img(4, 4);
    const Mask m(3, 4, true);
    const auto p = palette_of({{kRed, 1}});
    CHECK(error_code([&] { quantize_to_palette(img, p, QuantizeMode::Nearest, &m); }) == ErrorCode::DimensionMismatch);
    CHECK(error_code([&] { quantize_to_palette(img, WeightedPalette{}, QuantizeMode::Nearest); }) ==
          ErrorCode::EmptyPalette);
}

TEST_CASE("Proportional mode hits every target on uniform images with 50-divisible pixel counts")
{
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const int n_entries = 1 + static_cast<int>(rng() % 5);
        std::vector<PaletteEntry> raw;
        for (int i = 0; i < n_entries; ++i)
            raw.push_back({{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                            static_cast<std::uint8_t>(rng())},
                           0.05 + static_cast<double>(rng() % 100) / 100.0});
        const auto p = WeightedPalette::from_weights(raw);
        const int w = 50, h = 1 + static_cast<int>(rng() % 40);
        const Image img(w, h, {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                               static_cast<std::uint8_t>(rng())});
        const auto rep = quantize_report(img, p, QuantizeMode::Proportional);
        const auto c = oracle::counts(rep.image, p);
        for (std::size_t i = 0; i < p.size(); ++i) {
            INFO("trial " << trial << " entry " << i);
            CHECK(std::abs(static_cast<double>(c[i]) / (w * h) - p[i].weight) <= 0.02);
        }
    }
}

TEST_CASE("achieved_proportions")
{
    const auto red_only = palette_of({{kRed, 1}});
    const auto shares = achieved_proportions(Image(6, 6, kRed), red_only);
    REQUIRE(shares.size() == 1);
    CHECK(shares[0] == 1.0);

    Image half(10, 10, kRed);
    for (int y = 5; y < 10; ++y)
        for (int x = 0; x < 10; ++x)
            half.at(x, y) = kBlue;
    const auto rb = palette_of({{kRed, 1}, {kBlue, 1}});
    const auto s = achieved_proportions(half, rb);
    CHECK(s[static_cast<std::size_t>(rb.find(kRed))] == 0.5);
    CHECK(s[static_cast<std::size_t>(rb.find(kBlue))] == 0.5);

    half.at(0, 0) = kGreen;
    CHECK(error_code([&] { achieved_proportions(half, rb); }) == ErrorCode::NonPaletteColor);
}
