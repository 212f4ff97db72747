#include "lexcraft/bundle.hpp"

#include "lexcraft/canonical.hpp"
#include "lexcraft/error.hpp"

#include <fstream>
#include <sstream>

namespace lexcraft {

namespace {

constexpr std::string_view kBundleSchema = "lexicon/1";

nlohmann::json read_json(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, file.string() + " is not valid JSON: " + e.what());
    }
}

MoodBoard board_from(const nlohmann::json& board_json, const std::filesystem::path& base)
{
    return MoodBoard::from_json(board_json, [&](const nlohmann::json& entry) {
        std::filesystem::path file;
        if (entry.contains("path"))
            file = base / entry["path"].get<std::string>();
        else if (entry.contains("content_hash"))
            file = base / "images" / (entry["content_hash"].get<std::string>() + ".png");
        else
            throw Error(ErrorCode::FormatError, "board image entry needs a path or a content_hash");
        return read_png_file(file.string());
    });
}

} // namespace

LexiconBundle load_bundle(const std::filesystem::path& file)
{
    const nlohmann::json j = read_json(file);
    if (!j.is_object() || j.value("schema", std::string()) != kBundleSchema)
        throw Error(ErrorCode::FormatError, file.string() + " is not a lexicon/1 document");
    if (!j.contains("board") || !j.contains("panel"))
        throw Error(ErrorCode::FormatError, file.string() + " needs both 'board' and 'panel'");
    const auto base = file.parent_path();
    return {board_from(j["board"], base), VisualLexicon::from_json(j["panel"])};
}

MoodBoard load_board(const std::filesystem::path& path)
{
    std::filesystem::path file = path;
    if (std::filesystem::is_directory(path)) {
        file = path / "board.json";
        if (!std::filesystem::exists(file))
            file = path / "lexicon.json";
    }
    if (!std::filesystem::exists(file))
        throw Error(ErrorCode::IoError, "no board document at " + path.string());
    const nlohmann::json j = read_json(file);
    return board_from(j.contains("board") ? j["board"] : j, file.parent_path());
}

void save_bundle(const std::filesystem::path& file, const MoodBoard& board, const VisualLexicon& lexicon)
{
    const auto base = file.parent_path().empty() ? std::filesystem::path(".") : file.parent_path();
    std::filesystem::create_directories(base / "images");
    for (const auto& ref : board.images())
        write_png_file((base / "images" / (ref.content_hash + ".png")).string(), board.image(ref.image_id));
    const nlohmann::json j{{"schema", kBundleSchema}, {"board", board.to_json()}, {"panel", lexicon.to_json()}};
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + file.string());
    out << canonical_dump(j) << "\n";
}

} // namespace lexcraft
