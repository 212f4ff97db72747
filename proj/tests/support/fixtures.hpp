#pragma once

#include "lexcraft/bundle.hpp"
#include "lexcraft/lexicon.hpp"
#include "lexcraft/moodboard.hpp"

#include <random>
#include <string>
#include <vector>

namespace lexcraft::fixtures {

// Synthetic reference images drawn on flat backgrounds.
Image draw_owl(int size = 256);
Image draw_car(int size = 256);
Image draw_tree(int size = 256);
Image draw_stripes(int size = 128);
Image draw_palette_blocks(int size = 128);
Image solid(int width, int height, Rgb color);

/// Foreground is every pixel that differs from the top-left corner colour.
class ForegroundSegmenter final : public SegmentationProvider {
public:
    Mask segment(const Image& image, const PixelRect& box) const override;
};

class FixedKeywords final : public KeywordProvider {
public:
    explicit FixedKeywords(std::vector<std::string> words) : words_(std::move(words)) {}
    std::vector<std::string> keywords(const Image&) const override { return words_; }

private:
    std::vector<std::string> words_;
};

/// Monotone counter so board documents do not depend on wall time.
MoodBoard::Clock counter_clock();

struct OwlCar {
    MoodBoard board;
    VisualLexicon lexicon;
    std::string owl, car, tree;          // subject instance ids
    std::string color_group, style;      // modifier ids
    std::string behind_car, park, large; // textual / imaginative ids
};

/// Owl, car and tree subjects; a four-colour global group; one style; the
/// textual "standing behind #car, facing left" on the owl; a large
/// imaginative on the tree; a "playfulness" concept and "beautiful park".
OwlCar build_owl_car();

LexiconBundle seven_subjects();
LexiconBundle ghost_reference();
LexiconBundle overlapping_subjects();

/// Small board holding subject, colour, style and concept tokens.
MoodBoard random_board(std::mt19937_64& rng);

/// Envelope for a random, usually valid command against lex.
nlohmann::json random_command(const VisualLexicon& lex, const MoodBoard& board, std::mt19937_64& rng);

/// Applies random commands until `accepted` of them have succeeded (or
/// 4x as many attempts), ignoring rejections.
VisualLexicon random_lexicon(const MoodBoard& board, std::mt19937_64& rng, int accepted,
                             const std::string& id = "lx");

/// A valid random lexicon: at least one subject, every reference resolvable.
VisualLexicon random_valid_lexicon(const MoodBoard& board, std::mt19937_64& rng, const std::string& id = "lx");

double uniform(std::mt19937_64& rng, double lo, double hi);
int uniform_int(std::mt19937_64& rng, int lo, int hi);

} // namespace lexcraft::fixtures
