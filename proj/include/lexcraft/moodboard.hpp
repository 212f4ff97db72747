#pragma once

#include "lexcraft/color.hpp"
#include "lexcraft/geometry.hpp"
#include "lexcraft/image.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lexcraft {

enum class TokenKind { Subject, Color, Style, Concept };
enum class ColorOrigin { AutoKMeans, Eyedropper, Manual };

std::string_view to_string(TokenKind k);
std::string_view to_string(ColorOrigin o);
ColorOrigin color_origin_from_string(std::string_view s);

struct ImageRef {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::string content_hash;

    nlohmann::json to_json() const;
    friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

struct SubjectPayload {
    std::string image_id;
    NormRect bbox;
    Mask mask;        // covers bbox.to_pixels() of the image
    Image thumbnail;  // masked crop, max dimension 64
};

struct ColorPayload {
    Rgb color;
    ColorOrigin origin = ColorOrigin::Manual;
};

struct StylePayload {
    std::string image_id;
    Image style_thumbnail;
};

struct ConceptPayload {
    std::string image_id;  // may be empty for tokens loaded without a source image
    std::vector<std::string> keywords;
};

struct SourceToken {
    std::string token_id;
    std::int64_t created_at = 0;
    std::variant<SubjectPayload, ColorPayload, StylePayload, ConceptPayload> payload;

    TokenKind kind() const { return static_cast<TokenKind>(payload.index()); }

    template <typename T>
    const T& as() const { return std::get<T>(payload); }

    nlohmann::json to_json() const;
};

// Model seams. Each has a deterministic offline default.

class SegmentationProvider {
public:
    virtual ~SegmentationProvider() = default;
    /// Mask of size box.width() x box.height() for the region of image inside box.
    virtual Mask segment(const Image& image, const PixelRect& box) const = 0;
};

/// Returns the whole box.
class BoxSegmenter final : public SegmentationProvider {
public:
    Mask segment(const Image& image, const PixelRect& box) const override;
};

class StylePreviewProvider {
public:
    virtual ~StylePreviewProvider() = default;
    virtual Image preview(const Image& image) const = 0;
};

/// 64x64 bilinear downscale of the whole image.
class DownscaleStyler final : public StylePreviewProvider {
public:
    Image preview(const Image& image) const override;
};

class KeywordProvider {
public:
    virtual ~KeywordProvider() = default;
    virtual std::vector<std::string> keywords(const Image& image) const = 0;
};

/// Offline stand-in for a captioning model: "warm"/"cool" from the hue of the
/// mean colour, then "bright"/"dark" from mean Lab lightness.
class ToneKeywordProvider final : public KeywordProvider {
public:
    std::vector<std::string> keywords(const Image& image) const override;
};

Image make_thumbnail(const Image& image, const PixelRect& box, const Mask& mask);

/// Reference images plus the persistent source tokens created from them.
///
/// Not internally synchronized; the owning session serializes writes.
class MoodBoard {
public:
    using Clock = std::function<std::int64_t()>;

    MoodBoard();
    explicit MoodBoard(Clock clock);

    ImageRef add_image(std::span<const std::uint8_t> png_bytes);
    ImageRef add_image(Image image);

    const Image& image(const std::string& image_id) const;
    const ImageRef& image_ref(const std::string& image_id) const;
    std::vector<ImageRef> images() const;

    SourceToken create_subject_token(const std::string& image_id, const NormRect& bbox,
                                     const SegmentationProvider& segmenter = BoxSegmenter{});
    std::vector<SourceToken> extract_color_tokens(const std::string& image_id);
    SourceToken create_color_token(Rgb color, ColorOrigin origin = ColorOrigin::Manual);
    void recolor_token(const std::string& token_id, Rgb color);
    SourceToken create_style_token(const std::string& image_id,
                                   const StylePreviewProvider& styler = DownscaleStyler{});
    SourceToken create_concept_token(const std::string& image_id,
                                     const KeywordProvider& provider = ToneKeywordProvider{});

    const SourceToken& token(const std::string& token_id) const;
    const SourceToken* find_token(const std::string& token_id) const;
    const std::vector<SourceToken>& tokens() const { return tokens_; }

    /// Canonical form: images (metadata only) and tokens in creation order.
    nlohmann::json to_json() const;
    /// Rebuilds a board from to_json() output. Pixels for each image come from
    /// resolve(entry), which receives the image entry object.
    static MoodBoard from_json(const nlohmann::json& j, const std::function<Image(const nlohmann::json&)>& resolve);

    /// sha256 over the canonical serialization.
    std::string digest() const;

private:
    const SourceToken& insert(SourceToken token);
    std::string next_token_id();
    const Image& checked_image(const std::string& image_id) const;

    Clock clock_;
    std::map<std::string, ImageRef> refs_;
    std::map<std::string, std::shared_ptr<const Image>> pixels_;
    std::vector<SourceToken> tokens_;
    std::map<std::string, std::size_t> token_index_;
    std::uint64_t next_token_ = 1;
};

} // namespace lexcraft
