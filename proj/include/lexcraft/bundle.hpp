#pragma once

#include "lexcraft/lexicon.hpp"
#include "lexcraft/moodboard.hpp"

#include <filesystem>

namespace lexcraft {

/// Offline document: `{schema: "lexicon/1", board: {images, tokens}, panel: {...}}`.
///
/// Board image entries name their pixels either by `path` (relative to the
/// bundle's directory) or by `content_hash`, resolved as
/// `images/<content_hash>.png` next to the bundle.
struct LexiconBundle {
    MoodBoard board;
    VisualLexicon lexicon;
};

LexiconBundle load_bundle(const std::filesystem::path& file);

/// Accepts a bundle file, a standalone board document, or a directory
/// holding board.json or lexicon.json.
MoodBoard load_board(const std::filesystem::path& path);

/// Writes the bundle plus images/<content_hash>.png for every board image.
void save_bundle(const std::filesystem::path& file, const MoodBoard& board, const VisualLexicon& lexicon);

} // namespace lexcraft
