#pragma once

#include "lexcraft/compiler.hpp"
#include "lexcraft/lexicon.hpp"
#include "lexcraft/moodboard.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace lexcraft {

struct HistoryEntry {
    std::string entry_id;
    std::optional<std::string> parent_id;
    nlohmann::json lexicon;  // full document at the recorded revision
    std::string plan_hash;
    std::string artifact_id;
    std::int64_t created_at = 0;

    nlohmann::json to_json() const;
    static HistoryEntry from_json(const nlohmann::json& j);
};

/// Append-only record of generated lexicons for one session.
///
/// With a store directory, every entry is also appended as one canonical line
/// to <dir>/<session>.ndjson and reloaded on construction.
class History {
public:
    using Clock = std::function<std::int64_t()>;

    explicit History(std::string session_id, std::optional<std::filesystem::path> store_dir = std::nullopt,
                     Clock clock = {});

    /// Recompiles the snapshot and throws Error{HashMismatch} if the result
    /// differs from plan. The lexicon's fork origin becomes the parent.
    std::string record(const VisualLexicon& lex, const ExecutionPlan& plan, const MoodBoard& board,
                       const std::string& artifact_id);

    /// Fresh live document copied from an entry; throws Error{UnknownEntry}.
    VisualLexicon fork(const std::string& entry_id, const std::string& new_lexicon_id) const;

    std::vector<std::shared_ptr<const HistoryEntry>> list() const;
    /// Throws Error{UnknownEntry}.
    std::shared_ptr<const HistoryEntry> get(const std::string& entry_id) const;
    /// Null when absent.
    std::shared_ptr<const HistoryEntry> find(const std::string& entry_id) const;

    const std::string& session_id() const { return session_id_; }
    std::optional<std::filesystem::path> store_file() const;

private:
    std::string session_id_;
    std::optional<std::filesystem::path> store_dir_;
    Clock clock_;
    mutable std::mutex mutex_;
    std::vector<std::shared_ptr<const HistoryEntry>> entries_;
};

} // namespace lexcraft
