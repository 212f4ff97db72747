#include "lexcraft/color.hpp"

#include "lexcraft/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

namespace lexcraft {

namespace {

constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;
constexpr double kDelta = 6.0 / 29.0;

double to_linear(std::uint8_t c)
{
    const double v = c / 255.0;
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double from_linear(double v)
{
    const double s = v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
    return std::clamp(s, 0.0, 1.0);
}

double lab_f(double t)
{
    return t > kDelta * kDelta * kDelta ? std::cbrt(t) : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double t)
{
    return t > kDelta ? t * t * t : 3.0 * kDelta * kDelta * (t - 4.0 / 29.0);
}

std::uint32_t pack(Rgb c)
{
    return (std::uint32_t(c.r) << 16) | (std::uint32_t(c.g) << 8) | c.b;
}

// Uniform double in [0, 1) from the raw 64-bit stream; avoids the
// implementation-defined std distributions so palettes match across toolchains.
double unit_draw(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct Cluster {
    Lab centroid;
    double weight = 0.0;
};

struct Clustering {
    std::vector<Cluster> clusters;
    double cost = 0.0;
};

double dist2(const Lab& x, const Lab& y)
{
    const double dl = x.l - y.l, da = x.a - y.a, db = x.b - y.b;
    return dl * dl + da * da + db * db;
}

std::size_t nearest(const Lab& p, const std::vector<Lab>& centers)
{
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const double d = dist2(p, centers[j]);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

std::size_t pick_weighted(std::span<const double> weights, double total, std::mt19937_64& rng)
{
    const double r = unit_draw(rng) * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0)
            continue;
        acc += weights[i];
        last_positive = i;
        if (r < acc)
            return i;
    }
    return last_positive;
}

std::vector<Lab> seed_plus_plus(const std::vector<Lab>& points, const std::vector<double>& weights, int k,
                                std::mt19937_64& rng)
{
    std::vector<Lab> centers;
    centers.reserve(static_cast<std::size_t>(k));
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    centers.push_back(points[pick_weighted(weights, total, rng)]);

    std::vector<double> d2(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        d2[i] = dist2(points[i], centers[0]);
    while (static_cast<int>(centers.size()) < k) {
        std::vector<double> score(points.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            score[i] = weights[i] * d2[i];
            sum += score[i];
        }
        if (sum <= 0.0)
            break;
        const Lab next = points[pick_weighted(score, sum, rng)];
        centers.push_back(next);
        for (std::size_t i = 0; i < points.size(); ++i)
            d2[i] = std::min(d2[i], dist2(points[i], next));
    }
    return centers;
}

Clustering lloyd(const std::vector<Lab>& points, const std::vector<double>& weights, std::vector<Lab> centers)
{
    constexpr int kMaxIterations = 50;
    constexpr double kTolerance = 1e-3;

    std::vector<std::size_t> assignment(points.size());
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        for (std::size_t i = 0; i < points.size(); ++i)
            assignment[i] = nearest(points[i], centers);
        std::vector<Lab> sums(centers.size());
        std::vector<double> mass(centers.size(), 0.0);
        for (std::size_t i = 0; i < points.size(); ++i) {
            auto& s = sums[assignment[i]];
            s.l += weights[i] * points[i].l;
            s.a += weights[i] * points[i].a;
            s.b += weights[i] * points[i].b;
            mass[assignment[i]] += weights[i];
        }
        double movement = 0.0;
        for (std::size_t j = 0; j < centers.size(); ++j) {
            if (mass[j] <= 0.0)
                continue;
            const Lab next{sums[j].l / mass[j], sums[j].a / mass[j], sums[j].b / mass[j]};
            movement = std::max(movement, delta_e(next, centers[j]));
            centers[j] = next;
        }
        if (movement < kTolerance)
            break;
    }

    Clustering out;
    out.clusters.resize(centers.size());
    for (std::size_t j = 0; j < centers.size(); ++j)
        out.clusters[j].centroid = centers[j];
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::size_t j = nearest(points[i], centers);
        out.clusters[j].weight += weights[i];
        out.cost += weights[i] * dist2(points[i], centers[j]);
    }
    return out;
}

// Pairwise merge of centroids closer than the just-noticeable difference,
// closest pair first.
void merge_close(std::vector<Cluster>& clusters)
{
    constexpr double kMergeDeltaE = 2.0;
    for (;;) {
        double best = kMergeDeltaE;
        std::size_t bi = 0, bj = 0;
        bool found = false;
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const double d = delta_e(clusters[i].centroid, clusters[j].centroid);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                    found = true;
                }
            }
        if (!found)
            return;
        Cluster& a = clusters[bi];
        const Cluster& b = clusters[bj];
        const double w = a.weight + b.weight;
        a.centroid = {(a.centroid.l * a.weight + b.centroid.l * b.weight) / w,
                      (a.centroid.a * a.weight + b.centroid.a * b.weight) / w,
                      (a.centroid.b * a.weight + b.centroid.b * b.weight) / w};
        a.weight = w;
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    }
}

} // namespace

Lab srgb_to_lab(Rgb c)
{
    const double r = to_linear(c.r), g = to_linear(c.g), b = to_linear(c.b);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double fx = lab_f(x / kWhiteX), fy = lab_f(y / kWhiteY), fz = lab_f(z / kWhiteZ);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Rgb lab_to_srgb(const Lab& c)
{
    const double fy = (c.l + 16.0) / 116.0;
    const double fx = fy + c.a / 500.0;
    const double fz = fy - c.b / 200.0;
    const double x = kWhiteX * lab_f_inv(fx), y = kWhiteY * lab_f_inv(fy), z = kWhiteZ * lab_f_inv(fz);
    const double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
    const double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
    const double b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;
    auto to_byte = [](double v) { return static_cast<std::uint8_t>(std::lround(from_linear(v) * 255.0)); };
    return {to_byte(r), to_byte(g), to_byte(b)};
}

double delta_e(const Lab& x, const Lab& y)
{
    return std::sqrt(dist2(x, y));
}

std::vector<double> normalize_weights(std::span<const double> raw)
{
    constexpr std::int64_t kUnits = 1'000'000;
    const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    if (raw.empty() || !(total > 0.0) || !std::isfinite(total))
        throw Error(ErrorCode::EmptyPalette, "weights must have a positive finite sum");
    std::vector<std::int64_t> units(raw.size());
    std::vector<double> remainder(raw.size());
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] < 0.0)
            throw Error(ErrorCode::EmptyPalette, "weights must be nonnegative");
        const double exact = raw[i] / total * kUnits;
        units[i] = static_cast<std::int64_t>(std::floor(exact));
        remainder[i] = exact - static_cast<double>(units[i]);
        assigned += units[i];
    }
    std::vector<std::size_t> order(raw.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < kUnits; ++i, ++assigned)
        ++units[order[i % order.size()]];
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        out[i] = static_cast<double>(units[i]) / kUnits;
    return out;
}

WeightedPalette WeightedPalette::from_weights(std::span<const PaletteEntry> raw)
{
    std::map<Rgb, double> merged;
    for (const auto& e : raw)
        merged[e.color] += e.weight;
    std::vector<PaletteEntry> entries;
    std::vector<double> weights;
    for (const auto& [color, w] : merged) {
        entries.push_back({color, w});
        weights.push_back(w);
    }
    const auto normalized = normalize_weights(weights);
    for (std::size_t i = 0; i < entries.size(); ++i)
        entries[i].weight = normalized[i];
    std::erase_if(entries, [](const PaletteEntry& e) { return e.weight <= 0.0; });
    std::stable_sort(entries.begin(), entries.end(), [](const PaletteEntry& a, const PaletteEntry& b) {
        if (a.weight != b.weight)
            return a.weight > b.weight;
        return a.color < b.color;
    });
    WeightedPalette p;
    p.entries_ = std::move(entries);
    return p;
}

int WeightedPalette::find(Rgb c) const
{
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].color == c)
            return static_cast<int>(i);
    return -1;
}

nlohmann::json WeightedPalette::to_json() const
{
    auto arr = nlohmann::json::array();
    for (const auto& e : entries_)
        arr.push_back({{"rgb", to_hex(e.color)}, {"weight", e.weight}});
    return arr;
}

WeightedPalette WeightedPalette::from_json(const nlohmann::json& j)
{
    if (!j.is_array() || j.empty())
        throw Error(ErrorCode::EmptyPalette, "palette must be a nonempty array");
    std::vector<PaletteEntry> raw;
    for (const auto& e : j)
        raw.push_back({rgb_from_hex(e.at("rgb").get<std::string>()), e.at("weight").get<double>()});
    return from_weights(raw);
}

WeightedPalette kmeans_palette(std::span<const Rgb> pixels, int k, std::uint64_t seed)
{
    constexpr std::size_t kMaxSamples = 4096;
    constexpr int kRestarts = 8;

    if (pixels.empty())
        throw Error(ErrorCode::EmptyInput, "no pixels to cluster");
    if (k < 1)
        throw Error(ErrorCode::InvalidK, "k must be at least 1");

    std::map<Rgb, double> histogram;
    std::size_t sampled = 0;
    const std::size_t stride = pixels.size() > kMaxSamples ? (pixels.size() + kMaxSamples - 1) / kMaxSamples : 1;
    for (std::size_t i = 0; i < pixels.size(); i += stride, ++sampled)
        histogram[pixels[i]] += 1.0;

    std::vector<PaletteEntry> raw;
    if (histogram.size() < static_cast<std::size_t>(k)) {
        for (const auto& [color, count] : histogram)
            raw.push_back({color, count / static_cast<double>(sampled)});
        return WeightedPalette::from_weights(raw);
    }

    std::vector<Lab> points;
    std::vector<double> weights;
    for (const auto& [color, count] : histogram) {
        points.push_back(srgb_to_lab(color));
        weights.push_back(count);
    }

    std::mt19937_64 rng(seed);
    Clustering best;
    bool have_best = false;
    for (int run = 0; run < kRestarts; ++run) {
        Clustering c = lloyd(points, weights, seed_plus_plus(points, weights, k, rng));
        if (!have_best || c.cost < best.cost) {
            best = std::move(c);
            have_best = true;
        }
    }

    std::erase_if(best.clusters, [](const Cluster& c) { return c.weight <= 0.0; });
    merge_close(best.clusters);
    for (const auto& c : best.clusters)
        raw.push_back({lab_to_srgb(c.centroid), c.weight / static_cast<double>(sampled)});
    return WeightedPalette::from_weights(raw);
}

double clustering_cost(std::span<const Rgb> pixels, const WeightedPalette& palette)
{
    std::vector<Lab> centers;
    for (const auto& e : palette.entries())
        centers.push_back(srgb_to_lab(e.color));
    double cost = 0.0;
    for (Rgb p : pixels) {
        const Lab lab = srgb_to_lab(p);
        cost += dist2(lab, centers[nearest(lab, centers)]);
    }
    return cost;
}

QuantizeReport quantize_report(const Image& image, const WeightedPalette& palette, QuantizeMode mode, const Mask* mask)
{
    constexpr double kTolerance = 0.02;
    constexpr int kMaxPasses = 10;

    if (palette.empty())
        throw Error(ErrorCode::EmptyPalette, "palette is empty");
    if (mask && (mask->width != image.width || mask->height != image.height))
        throw Error(ErrorCode::DimensionMismatch, "mask dimensions differ from image");

    const std::size_t entries = palette.size();
    std::vector<Lab> centers;
    for (const auto& e : palette.entries())
        centers.push_back(srgb_to_lab(e.color));

    // Distinct in-mask colours and their distance rows.
    std::vector<std::size_t> selected;
    std::vector<std::uint32_t> color_of;
    std::unordered_map<std::uint32_t, std::uint32_t> color_ids;
    std::vector<double> distance;
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        if (mask && !mask->bits[i])
            continue;
        const std::uint32_t key = pack(image.pixels[i]);
        auto [it, inserted] = color_ids.try_emplace(key, static_cast<std::uint32_t>(color_ids.size()));
        if (inserted) {
            const Lab lab = srgb_to_lab(image.pixels[i]);
            for (const auto& c : centers)
                distance.push_back(delta_e(lab, c));
        }
        selected.push_back(i);
        color_of.push_back(it->second);
    }
    auto dist = [&](std::size_t p, std::size_t j) { return distance[color_of[p] * entries + j]; };

    const std::size_t n = selected.size();
    std::vector<std::size_t> assign(n);
    std::vector<std::size_t> counts(entries, 0);
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < entries; ++j)
            if (dist(p, j) < dist(p, best))
                best = j;
        assign[p] = best;
        ++counts[best];
    }

    QuantizeReport report;
    if (mode == QuantizeMode::Proportional && n > 0) {
        std::vector<double> target(entries);
        for (std::size_t j = 0; j < entries; ++j)
            target[j] = palette[j].weight * static_cast<double>(n);

        for (int pass = 0; pass < kMaxPasses; ++pass) {
            std::vector<std::size_t> over;
            for (std::size_t j = 0; j < entries; ++j)
                if (static_cast<double>(counts[j]) / n - palette[j].weight > kTolerance)
                    over.push_back(j);
            if (over.empty())
                break;
            ++report.passes;
            std::stable_sort(over.begin(), over.end(), [&](std::size_t a, std::size_t b) {
                return counts[a] - target[a] > counts[b] - target[b];
            });
            for (std::size_t j : over) {
                auto under = [&](std::size_t e) { return static_cast<double>(counts[e]) < target[e]; };
                std::vector<std::size_t> receivers;
                for (std::size_t e = 0; e < entries; ++e)
                    if (e != j && under(e))
                        receivers.push_back(e);
                if (receivers.empty())
                    continue;
                std::vector<std::pair<double, std::size_t>> candidates;
                for (std::size_t p = 0; p < n; ++p) {
                    if (assign[p] != j)
                        continue;
                    double best = std::numeric_limits<double>::infinity();
                    for (std::size_t e : receivers)
                        best = std::min(best, dist(p, e));
                    candidates.emplace_back(best - dist(p, j), p);
                }
                std::sort(candidates.begin(), candidates.end());
                for (const auto& [margin, p] : candidates) {
                    if (static_cast<double>(counts[j]) <= target[j])
                        break;
                    std::size_t to = entries;
                    for (std::size_t e : receivers)
                        if (under(e) && (to == entries || dist(p, e) < dist(p, to)))
                            to = e;
                    if (to == entries)
                        break;
                    assign[p] = to;
                    --counts[j];
                    ++counts[to];
                }
            }
        }
    }

    report.image = image;
    for (std::size_t p = 0; p < n; ++p)
        report.image.pixels[selected[p]] = palette[assign[p]].color;
    report.achieved.assign(entries, 0.0);
    for (std::size_t j = 0; j < entries; ++j) {
        if (n > 0)
            report.achieved[j] = static_cast<double>(counts[j]) / n;
        if (n > 0)
            report.max_deviation = std::max(report.max_deviation, std::abs(report.achieved[j] - palette[j].weight));
    }
    return report;
}

Image quantize_to_palette(const Image& image, const WeightedPalette& palette, QuantizeMode mode, const Mask* mask)
{
    return quantize_report(image, palette, mode, mask).image;
}

std::vector<double> achieved_proportions(const Image& image, const WeightedPalette& palette, const Mask* mask)
{
    if (mask && (mask->width != image.width || mask->height != image.height))
        throw Error(ErrorCode::DimensionMismatch, "mask dimensions differ from image");
    std::vector<double> counts(palette.size(), 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        if (mask && !mask->bits[i])
            continue;
        const int j = palette.find(image.pixels[i]);
        if (j < 0)
            throw Error(ErrorCode::NonPaletteColor, "pixel " + std::to_string(i) + " has colour " +
                                                        to_hex(image.pixels[i]) + " outside the palette");
        counts[static_cast<std::size_t>(j)] += 1.0;
        ++n;
    }
    if (n > 0)
        for (auto& c : counts)
            c /= static_cast<double>(n);
    return counts;
}

} // namespace lexcraft
