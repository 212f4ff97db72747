#include "lexcraft/history.hpp"

#include "lexcraft/canonical.hpp"
#include "lexcraft/error.hpp"

#include <chrono>
#include <fstream>

namespace lexcraft {

nlohmann::json HistoryEntry::to_json() const
{
    nlohmann::json j{{"entry_id", entry_id}, {"lexicon", lexicon}, {"plan_hash", plan_hash},
                     {"artifact_id", artifact_id}, {"created_at", created_at}};
    if (parent_id)
        j["parent_id"] = *parent_id;
    return j;
}

HistoryEntry HistoryEntry::from_json(const nlohmann::json& j)
{
    HistoryEntry e;
    e.entry_id = j.at("entry_id").get<std::string>();
    if (j.contains("parent_id"))
        e.parent_id = j["parent_id"].get<std::string>();
    e.lexicon = j.at("lexicon");
    e.plan_hash = j.at("plan_hash").get<std::string>();
    e.artifact_id = j.value("artifact_id", std::string());
    e.created_at = j.value("created_at", std::int64_t{0});
    return e;
}

History::History(std::string session_id, std::optional<std::filesystem::path> store_dir, Clock clock)
    : session_id_(std::move(session_id)), store_dir_(std::move(store_dir)), clock_(std::move(clock))
{
    if (!clock_)
        clock_ = [] {
            using namespace std::chrono;
            return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
        };
    const auto file = store_file();
    if (!file || !std::filesystem::exists(*file))
        return;
    std::ifstream in(*file);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        try {
            auto entry = HistoryEntry::from_json(nlohmann::json::parse(line));
            if (entry.parent_id && !find(*entry.parent_id))
                entry.parent_id.reset();
            entries_.push_back(std::make_shared<const HistoryEntry>(std::move(entry)));
        } catch (const std::exception&) {
            // Torn final line from an interrupted append; everything before it is intact.
            break;
        }
    }
}

std::optional<std::filesystem::path> History::store_file() const
{
    if (!store_dir_)
        return std::nullopt;
    return *store_dir_ / (session_id_ + ".ndjson");
}

std::string History::record(const VisualLexicon& lex, const ExecutionPlan& plan, const MoodBoard& board,
                            const std::string& artifact_id)
{
    const std::string expected = compile(lex, board).hash();
    if (plan.hash() != expected)
        throw Error(ErrorCode::HashMismatch, "plan was not compiled from this lexicon revision",
                    {{"plan_hash", plan.hash()}, {"expected", expected}});

    std::lock_guard lock(mutex_);
    HistoryEntry entry;
    entry.entry_id = "e" + std::to_string(entries_.size() + 1);
    if (const auto& parent = lex.parent_entry()) {
        bool known = false;
        for (const auto& e : entries_)
            known = known || e->entry_id == *parent;
        if (!known)
            throw Error(ErrorCode::UnknownEntry, "fork origin '" + *parent + "' is not in this history");
        entry.parent_id = parent;
    }
    entry.lexicon = lex.to_json();
    entry.plan_hash = expected;
    entry.artifact_id = artifact_id;
    entry.created_at = clock_();

    if (const auto file = store_file()) {
        std::filesystem::create_directories(file->parent_path());
        std::ofstream out(*file, std::ios::app | std::ios::binary);
        if (!out)
            throw Error(ErrorCode::IoError, "cannot append to " + file->string());
        out << canonical_dump(entry.to_json()) << "\n";
        out.flush();
        if (!out)
            throw Error(ErrorCode::IoError, "short write to " + file->string());
    }
    entries_.push_back(std::make_shared<const HistoryEntry>(std::move(entry)));
    return entries_.back()->entry_id;
}

VisualLexicon History::fork(const std::string& entry_id, const std::string& new_lexicon_id) const
{
    return VisualLexicon::from_json(get(entry_id)->lexicon).fork(new_lexicon_id, entry_id);
}

std::vector<std::shared_ptr<const HistoryEntry>> History::list() const
{
    std::lock_guard lock(mutex_);
    return entries_;
}

std::shared_ptr<const HistoryEntry> History::get(const std::string& entry_id) const
{
    auto e = find(entry_id);
    if (!e)
        throw Error(ErrorCode::UnknownEntry, "no history entry '" + entry_id + "'");
    return e;
}

std::shared_ptr<const HistoryEntry> History::find(const std::string& entry_id) const
{
    std::lock_guard lock(mutex_);
    for (const auto& e : entries_)
        if (e->entry_id == entry_id)
            return e;
    return nullptr;
}

} // namespace lexcraft
