#include "lexcraft/moodboard.hpp"

#include "lexcraft/canonical.hpp"
#include "lexcraft/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace lexcraft {

namespace {

constexpr int kThumbnailMax = 64;
constexpr int kStylePreviewSize = 64;
constexpr std::size_t kMaxKeywords = 5;
constexpr int kAutoColorCount = 5;

std::int64_t system_millis()
{
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

nlohmann::json mask_to_json(const Mask& m)
{
    // Run lengths alternating unset/set, starting with unset.
    auto runs = nlohmann::json::array();
    std::uint8_t current = 0;
    std::int64_t run = 0;
    for (std::uint8_t b : m.bits) {
        const std::uint8_t v = b ? 1 : 0;
        if (v != current) {
            runs.push_back(run);
            run = 0;
            current = v;
        }
        ++run;
    }
    runs.push_back(run);
    return {{"width", m.width}, {"height", m.height}, {"rle", runs}};
}

Mask mask_from_json(const nlohmann::json& j)
{
    Mask m(j.at("width").get<int>(), j.at("height").get<int>());
    std::size_t pos = 0;
    bool value = false;
    for (const auto& r : j.at("rle")) {
        const auto len = r.get<std::int64_t>();
        if (len < 0 || pos + static_cast<std::size_t>(len) > m.bits.size())
            throw Error(ErrorCode::FormatError, "mask run lengths exceed mask size");
        std::fill_n(m.bits.begin() + static_cast<std::ptrdiff_t>(pos), len, value ? 1 : 0);
        pos += static_cast<std::size_t>(len);
        value = !value;
    }
    if (pos != m.bits.size())
        throw Error(ErrorCode::FormatError, "mask run lengths do not cover the mask");
    return m;
}

template <typename F>
auto call_provider(const char* what, F&& f)
{
    try {
        return f();
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ProviderError, std::string(what) + " failed: " + e.what());
    }
}

} // namespace

std::string_view to_string(TokenKind k)
{
    switch (k) {
    case TokenKind::Subject: return "subject";
    case TokenKind::Color: return "color";
    case TokenKind::Style: return "style";
    case TokenKind::Concept: return "concept";
    }
    return "?";
}

std::string_view to_string(ColorOrigin o)
{
    switch (o) {
    case ColorOrigin::AutoKMeans: return "auto_kmeans";
    case ColorOrigin::Eyedropper: return "eyedropper";
    case ColorOrigin::Manual: return "manual";
    }
    return "?";
}

ColorOrigin color_origin_from_string(std::string_view s)
{
    if (s == "auto_kmeans") return ColorOrigin::AutoKMeans;
    if (s == "eyedropper") return ColorOrigin::Eyedropper;
    if (s == "manual") return ColorOrigin::Manual;
    throw Error(ErrorCode::FormatError, "unknown colour origin '" + std::string(s) + "'");
}

nlohmann::json ImageRef::to_json() const
{
    return {{"image_id", image_id}, {"width", width}, {"height", height}, {"content_hash", content_hash}};
}

nlohmann::json SourceToken::to_json() const
{
    nlohmann::json j{{"token_id", token_id}, {"kind", to_string(kind())}, {"created_at", created_at}};
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, SubjectPayload>) {
                j["image_id"] = p.image_id;
                j["bbox"] = p.bbox.to_json();
                j["mask"] = mask_to_json(p.mask);
                j["thumbnail_hash"] = content_hash(p.thumbnail);
            } else if constexpr (std::is_same_v<T, ColorPayload>) {
                j["rgb"] = to_hex(p.color);
                j["origin"] = to_string(p.origin);
            } else if constexpr (std::is_same_v<T, StylePayload>) {
                j["image_id"] = p.image_id;
                j["thumbnail_hash"] = content_hash(p.style_thumbnail);
            } else {
                if (!p.image_id.empty())
                    j["image_id"] = p.image_id;
                j["keywords"] = p.keywords;
            }
        },
        payload);
    return j;
}

Mask BoxSegmenter::segment(const Image&, const PixelRect& box) const
{
    return Mask(box.width(), box.height(), true);
}

Image DownscaleStyler::preview(const Image& image) const
{
    return resize_bilinear(image, kStylePreviewSize, kStylePreviewSize);
}

std::vector<std::string> ToneKeywordProvider::keywords(const Image& image) const
{
    double sr = 0, sg = 0, sb = 0, sl = 0;
    for (Rgb p : image.pixels) {
        sr += p.r;
        sg += p.g;
        sb += p.b;
        sl += srgb_to_lab(p).l;
    }
    const double n = static_cast<double>(std::max<std::size_t>(image.pixels.size(), 1));
    const double r = sr / n, g = sg / n, b = sb / n;
    const double hi = std::max({r, g, b}), lo = std::min({r, g, b});

    // Achromatic means count as cool; warm spans red through yellow plus the
    // red side of magenta.
    bool warm = false;
    if (hi - lo > 1e-9) {
        double hue;
        if (hi == r)
            hue = 60.0 * std::fmod((g - b) / (hi - lo), 6.0);
        else if (hi == g)
            hue = 60.0 * ((b - r) / (hi - lo) + 2.0);
        else
            hue = 60.0 * ((r - g) / (hi - lo) + 4.0);
        if (hue < 0.0)
            hue += 360.0;
        warm = hue < 90.0 || hue >= 330.0;
    }
    return {warm ? "warm" : "cool", sl / n >= 50.0 ? "bright" : "dark"};
}

Image make_thumbnail(const Image& image, const PixelRect& box, const Mask& mask)
{
    Image cut = crop(image, box);
    for (int y = 0; y < cut.height; ++y)
        for (int x = 0; x < cut.width; ++x)
            if (!mask.at(x, y))
                cut.at(x, y) = {255, 255, 255};
    const int longest = std::max(cut.width, cut.height);
    if (longest <= kThumbnailMax)
        return cut;
    const double scale = static_cast<double>(kThumbnailMax) / longest;
    const int w = std::max(1, static_cast<int>(std::lround(cut.width * scale)));
    const int h = std::max(1, static_cast<int>(std::lround(cut.height * scale)));
    return resize_bilinear(cut, w, h);
}

MoodBoard::MoodBoard() : clock_(system_millis) {}

MoodBoard::MoodBoard(Clock clock) : clock_(std::move(clock)) {}

ImageRef MoodBoard::add_image(std::span<const std::uint8_t> png_bytes)
{
    return add_image(decode_png(png_bytes));
}

ImageRef MoodBoard::add_image(Image image)
{
    if (image.width < 1 || image.height < 1)
        throw Error(ErrorCode::DecodeError, "image has no pixels");
    ImageRef ref;
    ref.content_hash = content_hash(image);
    ref.image_id = "img_" + ref.content_hash.substr(0, 16);
    ref.width = image.width;
    ref.height = image.height;
    if (!refs_.contains(ref.image_id)) {
        refs_.emplace(ref.image_id, ref);
        pixels_.emplace(ref.image_id, std::make_shared<const Image>(std::move(image)));
    }
    return ref;
}

const Image& MoodBoard::checked_image(const std::string& image_id) const
{
    auto it = pixels_.find(image_id);
    if (it == pixels_.end())
        throw Error(ErrorCode::UnknownImage, "no image '" + image_id + "' on the mood board");
    return *it->second;
}

const Image& MoodBoard::image(const std::string& image_id) const
{
    return checked_image(image_id);
}

const ImageRef& MoodBoard::image_ref(const std::string& image_id) const
{
    auto it = refs_.find(image_id);
    if (it == refs_.end())
        throw Error(ErrorCode::UnknownImage, "no image '" + image_id + "' on the mood board");
    return it->second;
}

std::vector<ImageRef> MoodBoard::images() const
{
    std::vector<ImageRef> out;
    for (const auto& [id, ref] : refs_)
        out.push_back(ref);
    return out;
}

std::string MoodBoard::next_token_id()
{
    return "tok_" + std::to_string(next_token_++);
}

const SourceToken& MoodBoard::insert(SourceToken token)
{
    token_index_[token.token_id] = tokens_.size();
    tokens_.push_back(std::move(token));
    return tokens_.back();
}

SourceToken MoodBoard::create_subject_token(const std::string& image_id, const NormRect& bbox,
                                            const SegmentationProvider& segmenter)
{
    const Image& img = checked_image(image_id);
    const PixelRect box = bbox.to_pixels(img.width, img.height);
    Mask mask = call_provider("segmentation", [&] { return segmenter.segment(img, box); });
    if (mask.width != box.width() || mask.height != box.height())
        throw Error(ErrorCode::ProviderError, "segmentation mask does not match the bounding box size");
    if (mask.count() == 0)
        throw Error(ErrorCode::EmptyMask, "segmentation produced an empty mask");
    SubjectPayload p{image_id, bbox, std::move(mask), {}};
    p.thumbnail = make_thumbnail(img, box, p.mask);
    return insert({next_token_id(), clock_(), std::move(p)});
}

std::vector<SourceToken> MoodBoard::extract_color_tokens(const std::string& image_id)
{
    const Image& img = checked_image(image_id);
    const WeightedPalette palette = kmeans_palette(img.pixels, kAutoColorCount, kDefaultSeed);
    std::vector<SourceToken> out;
    for (const auto& e : palette.entries())
        out.push_back(insert({next_token_id(), clock_(), ColorPayload{e.color, ColorOrigin::AutoKMeans}}));
    return out;
}

SourceToken MoodBoard::create_color_token(Rgb color, ColorOrigin origin)
{
    return insert({next_token_id(), clock_(), ColorPayload{color, origin}});
}

void MoodBoard::recolor_token(const std::string& token_id, Rgb color)
{
    auto it = token_index_.find(token_id);
    if (it == token_index_.end())
        throw Error(ErrorCode::UnknownToken, "no token '" + token_id + "'");
    SourceToken& t = tokens_[it->second];
    auto* p = std::get_if<ColorPayload>(&t.payload);
    if (!p)
        throw Error(ErrorCode::KindMismatch, "token '" + token_id + "' is a " + std::string(to_string(t.kind())) +
                                                 " token; only colour tokens can be recoloured");
    p->color = color;
}

SourceToken MoodBoard::create_style_token(const std::string& image_id, const StylePreviewProvider& styler)
{
    const Image& img = checked_image(image_id);
    Image preview = call_provider("style preview", [&] { return styler.preview(img); });
    return insert({next_token_id(), clock_(), StylePayload{image_id, std::move(preview)}});
}

SourceToken MoodBoard::create_concept_token(const std::string& image_id, const KeywordProvider& provider)
{
    const Image& img = checked_image(image_id);
    auto words = call_provider("keyword extraction", [&] { return provider.keywords(img); });
    std::erase_if(words, [](const std::string& w) { return w.empty(); });
    if (words.empty())
        throw Error(ErrorCode::EmptyKeywords, "keyword provider returned no keywords");
    if (words.size() > kMaxKeywords)
        words.resize(kMaxKeywords);
    return insert({next_token_id(), clock_(), ConceptPayload{image_id, std::move(words)}});
}

const SourceToken* MoodBoard::find_token(const std::string& token_id) const
{
    auto it = token_index_.find(token_id);
    return it == token_index_.end() ? nullptr : &tokens_[it->second];
}

const SourceToken& MoodBoard::token(const std::string& token_id) const
{
    if (const auto* t = find_token(token_id))
        return *t;
    throw Error(ErrorCode::UnknownToken, "no token '" + token_id + "'");
}

nlohmann::json MoodBoard::to_json() const
{
    auto images = nlohmann::json::array();
    for (const auto& [id, ref] : refs_)
        images.push_back(ref.to_json());
    auto tokens = nlohmann::json::array();
    for (const auto& t : tokens_)
        tokens.push_back(t.to_json());
    return {{"images", images}, {"tokens", tokens}, {"next_token", next_token_}};
}

MoodBoard MoodBoard::from_json(const nlohmann::json& j, const std::function<Image(const nlohmann::json&)>& resolve)
{
    MoodBoard board;
    try {
        for (const auto& entry : j.at("images")) {
            const ImageRef ref = board.add_image(resolve(entry));
            if (entry.contains("image_id") && entry["image_id"].get<std::string>() != ref.image_id)
                throw Error(ErrorCode::FormatError, "image '" + entry["image_id"].get<std::string>() +
                                                        "' does not match its pixels (expected " + ref.image_id + ")");
            if (entry.contains("content_hash") && entry["content_hash"].get<std::string>() != ref.content_hash)
                throw Error(ErrorCode::FormatError, "content hash mismatch for image " + ref.image_id);
        }
        std::uint64_t max_seq = 0;
        for (const auto& tj : j.at("tokens")) {
            SourceToken t;
            t.token_id = tj.at("token_id").get<std::string>();
            t.created_at = tj.value("created_at", std::int64_t{0});
            if (board.token_index_.contains(t.token_id))
                throw Error(ErrorCode::FormatError, "duplicate token id '" + t.token_id + "'");
            const auto kind = tj.at("kind").get<std::string>();
            if (kind == "subject") {
                const auto image_id = tj.at("image_id").get<std::string>();
                const Image& img = board.checked_image(image_id);
                const NormRect bbox = NormRect::from_json(tj.at("bbox"));
                const PixelRect box = bbox.to_pixels(img.width, img.height);
                Mask mask = tj.contains("mask") ? mask_from_json(tj["mask"]) : BoxSegmenter{}.segment(img, box);
                if (mask.width != box.width() || mask.height != box.height())
                    throw Error(ErrorCode::FormatError, "mask of '" + t.token_id + "' does not match its bbox");
                if (mask.count() == 0)
                    throw Error(ErrorCode::EmptyMask, "mask of '" + t.token_id + "' is empty");
                SubjectPayload p{image_id, bbox, std::move(mask), {}};
                p.thumbnail = make_thumbnail(img, box, p.mask);
                t.payload = std::move(p);
            } else if (kind == "color") {
                t.payload = ColorPayload{rgb_from_hex(tj.at("rgb").get<std::string>()),
                                         color_origin_from_string(tj.value("origin", std::string("manual")))};
            } else if (kind == "style") {
                const auto image_id = tj.at("image_id").get<std::string>();
                t.payload = StylePayload{image_id, DownscaleStyler{}.preview(board.checked_image(image_id))};
            } else if (kind == "concept") {
                ConceptPayload p;
                p.image_id = tj.value("image_id", std::string());
                p.keywords = tj.at("keywords").get<std::vector<std::string>>();
                if (p.keywords.empty() || p.keywords.size() > kMaxKeywords)
                    throw Error(ErrorCode::FormatError, "concept '" + t.token_id + "' must have 1-5 keywords");
                t.payload = std::move(p);
            } else {
                throw Error(ErrorCode::FormatError, "unknown token kind '" + kind + "'");
            }
            if (t.token_id.rfind("tok_", 0) == 0) {
                try {
                    max_seq = std::max<std::uint64_t>(max_seq, std::stoull(t.token_id.substr(4)));
                } catch (const std::exception&) {
                }
            }
            board.insert(std::move(t));
        }
        board.next_token_ = std::max<std::uint64_t>(j.value("next_token", std::uint64_t{1}), max_seq + 1);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("malformed board: ") + e.what());
    }
    return board;
}

std::string MoodBoard::digest() const
{
    return sha256_hex(canonical_dump(to_json()));
}

} // namespace lexcraft
