#pragma once

#include "lexcraft/geometry.hpp"
#include "lexcraft/moodboard.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lexcraft {

enum class ImaginationLevel { None, Small, Medium, Large };
enum class InstanceKind { Subject, Color, Style, Textual, Imaginative };

std::string_view to_string(ImaginationLevel level);
ImaginationLevel imagination_level_from_string(std::string_view s);
std::string_view to_string(InstanceKind kind);
InstanceKind instance_kind_from_string(std::string_view s);

/// Panel area fraction that each imaginative size snaps to.
double preset_area(ImaginationLevel level);
/// Nearest preset by absolute area difference; ties go to the smaller level.
ImaginationLevel level_for_area(double area);

struct TokenInstance {
    std::string instance_id;
    std::optional<std::string> origin;  // source token id; absent for temporaries
    InstanceKind kind = InstanceKind::Textual;
    Point position;
    std::optional<NormRect> rect;  // Subject, Color and Style only
    std::string text;              // Textual only
    ImaginationLevel level = ImaginationLevel::None;  // Imaginative only

    bool is_modifier() const { return kind != InstanceKind::Subject; }
    nlohmann::json to_json() const;
};

struct TokenGroup {
    std::string group_id;
    std::vector<std::string> members;
};

struct LexiconLink {
    std::string link_id;
    std::string modifier;  // instance id or group id
    std::string target;    // subject instance id
};

/// Move (position only) or resize (full rect) request for set_geometry.
struct Geometry {
    std::optional<Point> position;
    std::optional<NormRect> rect;
};

/// Every maximal [A-Za-z0-9_]+ run that directly follows '#', in order,
/// duplicates kept.
std::vector<std::string> parse_cross_refs(std::string_view text);
bool is_valid_name(std::string_view name);

/// Orders opaque ids by their trailing sequence number, then lexically.
bool id_less(std::string_view a, std::string_view b);

/// The manipulation-panel document.
///
/// Every command either succeeds and bumps revision by exactly one, or throws
/// and leaves the document untouched. Source tokens are only read.
class VisualLexicon {
public:
    VisualLexicon() = default;
    explicit VisualLexicon(std::string lexicon_id);

    const std::string& lexicon_id() const { return lexicon_id_; }
    std::uint64_t revision() const { return revision_; }
    const std::optional<std::string>& parent_entry() const { return parent_entry_; }

    const std::vector<TokenInstance>& instances() const { return instances_; }
    const std::vector<TokenGroup>& groups() const { return groups_; }
    const std::vector<LexiconLink>& links() const { return links_; }
    const std::map<std::string, std::string>& names() const { return names_; }

    const TokenInstance* find_instance(std::string_view id) const;
    const TokenGroup* find_group(std::string_view id) const;
    const TokenGroup* group_of(std::string_view instance_id) const;
    std::optional<std::string> name_of(std::string_view instance_id) const;

    std::string place_copy(const MoodBoard& board, const std::string& source, const NormRect& rect);
    std::string create_textual(const std::string& text, Point position);
    std::string create_imaginative(ImaginationLevel level, Point position);
    void set_geometry(const std::string& instance, const Geometry& geometry);
    std::string group(const std::vector<std::string>& instances);
    void ungroup(const std::string& group_id);
    std::string link(const std::string& modifier, const std::string& target);
    void unlink(const std::string& link_id);
    void set_name(const std::string& instance, const std::string& name);
    void clear_panel();

    /// Referential-integrity violations (dangling link, group or name
    /// references), as human-readable strings paired with the offending id.
    std::vector<std::pair<std::string, std::string>> integrity_problems() const;

    /// Deep copy under a new lexicon id: fresh instance/group/link ids in the
    /// same order, origins and names kept, revision reset to zero.
    VisualLexicon fork(const std::string& new_lexicon_id, const std::optional<std::string>& parent_entry) const;

    nlohmann::json to_json() const;
    static VisualLexicon from_json(const nlohmann::json& j);

    /// Equal documents serialize to equal bytes.
    std::string canonical() const;

private:
    std::string next_id(char tag);
    TokenInstance& instance_ref(std::string_view id);
    const TokenInstance& checked_instance(std::string_view id) const;
    void bump() { ++revision_; }

    std::string lexicon_id_;
    std::uint64_t revision_ = 0;
    std::uint64_t next_seq_ = 1;
    std::optional<std::string> parent_entry_;
    std::vector<TokenInstance> instances_;
    std::vector<TokenGroup> groups_;
    std::vector<LexiconLink> links_;
    std::map<std::string, std::string> names_;
};

struct CommandResult {
    std::uint64_t revision = 0;
    nlohmann::json result = nlohmann::json::object();
};

/// Applies a `{op, args, expected_revision}` envelope. A stale
/// expected_revision throws Error{RevisionConflict}; malformed envelopes throw
/// Error{BadCommand}.
CommandResult apply_command(VisualLexicon& lex, const MoodBoard& board, const nlohmann::json& envelope);

} // namespace lexcraft
