#pragma once

#include "lexcraft/color.hpp"
#include "lexcraft/geometry.hpp"
#include "lexcraft/lexicon.hpp"
#include "lexcraft/moodboard.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lexcraft {

/// Validation finding. Codes starting with 'E' block compilation; 'W' codes
/// only block it in strict mode.
///
///   E001  unresolved cross-reference (#name with no named subject)
///   E002  dangling link, group, name or source-token reference
///   E101  empty lexicon: no subject and no background text
///   W001  more than six subjects
///   W002  more than one style instance
///   W003  two subject boxes overlap with IoU above 0.7
///   W004  several imaginative tokens on one target; the largest level wins
///   W005  style linked to a subject; styles always apply globally
struct Diagnostic {
    std::string code;
    std::string message;
    std::vector<std::string> ids;

    bool is_error() const { return !code.empty() && code.front() == 'E'; }
    nlohmann::json to_json() const;
};

nlohmann::json diagnostics_json(const std::vector<Diagnostic>& diags);

std::vector<Diagnostic> validate(const VisualLexicon& lex, const MoodBoard& board);

class PromptExtender {
public:
    virtual ~PromptExtender() = default;
    virtual std::string extend(const std::string& text, ImaginationLevel level) const = 0;
};

/// Appends " [imagine:<level>]" so downstream backends see the requested level.
class DirectivePromptExtender final : public PromptExtender {
public:
    std::string extend(const std::string& text, ImaginationLevel level) const override;
};

/// Level None returns the text verbatim without consulting the provider.
std::string extend_prompt(const std::string& text, ImaginationLevel level,
                          const PromptExtender& provider = DirectivePromptExtender{});

enum class StageKind { Layout, Style, GlobalColor, LocalColor };
std::string_view to_string(StageKind kind);

struct SubjectPlacement {
    std::string instance_id;
    std::string source_token;
    NormRect bbox;
    std::string prompt;
    std::optional<std::string> name;
};

struct LayoutStage {
    std::string background_prompt;
    std::vector<SubjectPlacement> placements;
};

struct StyleEntry {
    std::string style_token;
    double weight = 0.0;
};

struct StyleStage {
    std::vector<StyleEntry> entries;
};

struct GlobalColorStage {
    WeightedPalette palette;
};

struct LocalColorEntry {
    std::string instance_id;
    WeightedPalette palette;
    std::size_t placement_index = 0;
};

struct LocalColorStage {
    std::vector<LocalColorEntry> entries;
};

/// Ordered stage specification. Serialization always emits stages in
/// Layout, Style, GlobalColor, LocalColor order with absent stages omitted.
struct ExecutionPlan {
    LayoutStage layout;
    std::optional<StyleStage> style;
    std::optional<GlobalColorStage> global_color;
    std::optional<LocalColorStage> local_color;

    std::vector<StageKind> stage_sequence() const;

    /// `{schema, stages}` without the hash.
    nlohmann::json body_json() const;
    std::string hash() const;
    /// `{plan_hash, schema, stages}`.
    nlohmann::json to_json() const;
    /// Canonical file bytes (trailing newline).
    std::string serialize() const;

    /// Throws Error{FormatError} on schema or ordering problems and
    /// Error{HashMismatch} when plan_hash disagrees with the content.
    static ExecutionPlan from_json(const nlohmann::json& j);
    static ExecutionPlan parse(const std::string& text);
};

struct CompileOptions {
    bool strict = false;
    const PromptExtender* extender = nullptr;  // null: DirectivePromptExtender
};

/// Throws Error{ValidationFailed} (details.diagnostics) when validation finds
/// errors, or Error{StrictWarnings} for warnings under strict mode.
ExecutionPlan compile(const VisualLexicon& lex, const MoodBoard& board, const CompileOptions& opts = {});

} // namespace lexcraft
