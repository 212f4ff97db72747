#include "lexcraft/compiler.hpp"

#include "lexcraft/canonical.hpp"
#include "lexcraft/error.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace lexcraft {

namespace {

constexpr std::size_t kSubjectLimit = 6;
constexpr double kOverlapIou = 0.7;
constexpr std::string_view kSchema = "plan/1";

bool is_named_subject(const VisualLexicon& lex, const std::string& name)
{
    auto it = lex.names().find(name);
    if (it == lex.names().end())
        return false;
    const auto* inst = lex.find_instance(it->second);
    return inst && inst->kind == InstanceKind::Subject;
}

/// Link targets of an instance, directly or through its group, in subject
/// creation order. Only subject targets that exist are returned.
std::vector<std::string> targets_of(const VisualLexicon& lex, const TokenInstance& inst)
{
    std::set<std::string> hit;
    const TokenGroup* g = lex.group_of(inst.instance_id);
    for (const auto& l : lex.links())
        if (l.modifier == inst.instance_id || (g && l.modifier == g->group_id))
            hit.insert(l.target);
    std::vector<std::string> out;
    for (const auto& s : lex.instances())
        if (s.kind == InstanceKind::Subject && hit.contains(s.instance_id))
            out.push_back(s.instance_id);
    return out;
}

std::string substitute_refs(const std::string& text)
{
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '#') {
            std::size_t j = i + 1;
            while (j < text.size() && is_valid_name(std::string_view(&text[j], 1)))
                ++j;
            if (j > i + 1) {
                out += "[subj:" + text.substr(i + 1, j - i - 1) + "]";
                i = j - 1;
                continue;
            }
        }
        out += text[i];
    }
    return out;
}

std::optional<TokenKind> expected_source_kind(InstanceKind k)
{
    switch (k) {
    case InstanceKind::Subject: return TokenKind::Subject;
    case InstanceKind::Color: return TokenKind::Color;
    case InstanceKind::Style: return TokenKind::Style;
    case InstanceKind::Textual: return TokenKind::Concept;
    case InstanceKind::Imaginative: return std::nullopt;
    }
    return std::nullopt;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i)
            out += sep;
        out += parts[i];
    }
    return out;
}

nlohmann::json stage_json(const ExecutionPlan& plan, StageKind kind)
{
    switch (kind) {
    case StageKind::Layout: {
        auto placements = nlohmann::json::array();
        for (const auto& p : plan.layout.placements) {
            nlohmann::json pj{{"instance_id", p.instance_id}, {"source_token", p.source_token},
                              {"bbox", p.bbox.to_json()}, {"prompt", p.prompt}};
            if (p.name)
                pj["name"] = *p.name;
            placements.push_back(std::move(pj));
        }
        return {{"kind", "layout"}, {"background_prompt", plan.layout.background_prompt}, {"placements", placements}};
    }
    case StageKind::Style: {
        auto entries = nlohmann::json::array();
        for (const auto& e : plan.style->entries)
            entries.push_back({{"style_token", e.style_token}, {"weight", e.weight}});
        return {{"kind", "style"}, {"entries", entries}};
    }
    case StageKind::GlobalColor:
        return {{"kind", "global_color"}, {"palette", plan.global_color->palette.to_json()}};
    case StageKind::LocalColor: {
        auto entries = nlohmann::json::array();
        for (const auto& e : plan.local_color->entries)
            entries.push_back({{"instance_id", e.instance_id},
                               {"palette", e.palette.to_json()},
                               {"placement_index", e.placement_index}});
        return {{"kind", "local_color"}, {"entries", entries}};
    }
    }
    return {};
}

StageKind stage_kind_from_string(const std::string& s)
{
    if (s == "layout") return StageKind::Layout;
    if (s == "style") return StageKind::Style;
    if (s == "global_color") return StageKind::GlobalColor;
    if (s == "local_color") return StageKind::LocalColor;
    throw Error(ErrorCode::FormatError, "unknown stage kind '" + s + "'");
}

} // namespace

nlohmann::json Diagnostic::to_json() const
{
    return {{"code", code}, {"severity", is_error() ? "error" : "warning"}, {"message", message}, {"ids", ids}};
}

nlohmann::json diagnostics_json(const std::vector<Diagnostic>& diags)
{
    auto arr = nlohmann::json::array();
    for (const auto& d : diags)
        arr.push_back(d.to_json());
    return arr;
}

std::vector<Diagnostic> validate(const VisualLexicon& lex, const MoodBoard& board)
{
    std::vector<Diagnostic> out;

    for (const auto& [id, problem] : lex.integrity_problems())
        out.push_back({"E002", problem, {id}});
    for (const auto& inst : lex.instances()) {
        if (!inst.origin)
            continue;
        const SourceToken* src = board.find_token(*inst.origin);
        if (!src)
            out.push_back({"E002", "instance " + inst.instance_id + " copies missing source token " + *inst.origin,
                           {inst.instance_id}});
        else if (src->kind() != expected_source_kind(inst.kind))
            out.push_back({"E002",
                           "instance " + inst.instance_id + " is a " + std::string(to_string(inst.kind)) +
                               " but its source " + *inst.origin + " is a " + std::string(to_string(src->kind())),
                           {inst.instance_id}});
    }

    std::vector<const TokenInstance*> subjects;
    std::size_t styles = 0;
    bool background_text = false;
    std::map<std::string, std::vector<std::string>> imaginative_by_target;  // "" = background
    for (const auto& inst : lex.instances()) {
        switch (inst.kind) {
        case InstanceKind::Subject:
            subjects.push_back(&inst);
            break;
        case InstanceKind::Style:
            ++styles;
            if (!targets_of(lex, inst).empty())
                out.push_back({"W005", "style " + inst.instance_id + " is linked to a subject; styles apply to the whole image",
                               {inst.instance_id}});
            break;
        case InstanceKind::Textual:
            for (const auto& name : parse_cross_refs(inst.text))
                if (!is_named_subject(lex, name))
                    out.push_back({"E001", "'#" + name + "' in " + inst.instance_id + " does not name a subject",
                                   {inst.instance_id}});
            if (targets_of(lex, inst).empty())
                background_text = true;
            break;
        case InstanceKind::Imaginative: {
            auto targets = targets_of(lex, inst);
            if (targets.empty())
                imaginative_by_target[""].push_back(inst.instance_id);
            for (const auto& t : targets)
                imaginative_by_target[t].push_back(inst.instance_id);
            break;
        }
        case InstanceKind::Color:
            break;
        }
    }

    if (subjects.empty() && !background_text)
        out.push_back({"E101", "lexicon has no subject and no background text", {}});
    if (subjects.size() > kSubjectLimit) {
        std::vector<std::string> ids;
        for (const auto* s : subjects)
            ids.push_back(s->instance_id);
        out.push_back({"W001",
                       std::to_string(subjects.size()) + " subjects; generation is reliable for at most " +
                           std::to_string(kSubjectLimit),
                       ids});
    }
    if (styles > 1)
        out.push_back({"W002", std::to_string(styles) + " style instances; they will be blended", {}});
    for (std::size_t i = 0; i < subjects.size(); ++i)
        for (std::size_t j = i + 1; j < subjects.size(); ++j) {
            const double v = iou(*subjects[i]->rect, *subjects[j]->rect);
            if (v > kOverlapIou)
                out.push_back({"W003",
                               subjects[i]->instance_id + " and " + subjects[j]->instance_id + " overlap (IoU " +
                                   std::to_string(v).substr(0, 5) + "); the subjects may merge",
                               {subjects[i]->instance_id, subjects[j]->instance_id}});
        }
    for (const auto& [target, ids] : imaginative_by_target)
        if (ids.size() > 1)
            out.push_back({"W004",
                           std::to_string(ids.size()) + " imaginative tokens on " +
                               (target.empty() ? std::string("the background") : target) + "; the largest level is used",
                           ids});

    std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) {
        if (a.code != b.code)
            return a.code < b.code;
        if (a.ids.empty() || b.ids.empty())
            return a.ids.empty() && !b.ids.empty();
        return id_less(a.ids.front(), b.ids.front());
    });
    return out;
}

std::string DirectivePromptExtender::extend(const std::string& text, ImaginationLevel level) const
{
    if (level == ImaginationLevel::None)
        return text;
    return text + " [imagine:" + std::string(to_string(level)) + "]";
}

std::string extend_prompt(const std::string& text, ImaginationLevel level, const PromptExtender& provider)
{
    if (level == ImaginationLevel::None)
        return text;
    try {
        return provider.extend(text, level);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ProviderError, std::string("prompt extension failed: ") + e.what());
    }
}

std::string_view to_string(StageKind kind)
{
    switch (kind) {
    case StageKind::Layout: return "layout";
    case StageKind::Style: return "style";
    case StageKind::GlobalColor: return "global_color";
    case StageKind::LocalColor: return "local_color";
    }
    return "?";
}

std::vector<StageKind> ExecutionPlan::stage_sequence() const
{
    std::vector<StageKind> out{StageKind::Layout};
    if (style)
        out.push_back(StageKind::Style);
    if (global_color)
        out.push_back(StageKind::GlobalColor);
    if (local_color)
        out.push_back(StageKind::LocalColor);
    return out;
}

nlohmann::json ExecutionPlan::body_json() const
{
    auto stages = nlohmann::json::array();
    for (StageKind k : stage_sequence())
        stages.push_back(stage_json(*this, k));
    return {{"schema", kSchema}, {"stages", stages}};
}

std::string ExecutionPlan::hash() const
{
    return sha256_hex(canonical_dump(body_json()));
}

nlohmann::json ExecutionPlan::to_json() const
{
    auto j = body_json();
    j["plan_hash"] = sha256_hex(canonical_dump(j));
    return j;
}

std::string ExecutionPlan::serialize() const
{
    return canonical_dump(to_json()) + "\n";
}

ExecutionPlan ExecutionPlan::from_json(const nlohmann::json& j)
{
    ExecutionPlan plan;
    try {
        if (j.at("schema").get<std::string>() != kSchema)
            throw Error(ErrorCode::FormatError, "unsupported plan schema '" + j["schema"].get<std::string>() + "'");
        const auto& stages = j.at("stages");
        if (!stages.is_array() || stages.empty())
            throw Error(ErrorCode::FormatError, "plan has no stages");
        int last = -1;
        for (const auto& s : stages) {
            const StageKind kind = stage_kind_from_string(s.at("kind").get<std::string>());
            if (static_cast<int>(kind) <= last)
                throw Error(ErrorCode::FormatError, "plan stages out of order at '" + std::string(to_string(kind)) + "'");
            if (last == -1 && kind != StageKind::Layout)
                throw Error(ErrorCode::FormatError, "plan must start with a layout stage");
            last = static_cast<int>(kind);
            switch (kind) {
            case StageKind::Layout:
                plan.layout.background_prompt = s.at("background_prompt").get<std::string>();
                for (const auto& p : s.at("placements")) {
                    SubjectPlacement sp;
                    sp.instance_id = p.at("instance_id").get<std::string>();
                    sp.source_token = p.at("source_token").get<std::string>();
                    sp.bbox = NormRect::from_json(p.at("bbox"));
                    sp.prompt = p.at("prompt").get<std::string>();
                    if (p.contains("name"))
                        sp.name = p["name"].get<std::string>();
                    plan.layout.placements.push_back(std::move(sp));
                }
                break;
            case StageKind::Style: {
                StyleStage st;
                std::vector<double> raw;
                for (const auto& e : s.at("entries")) {
                    st.entries.push_back({e.at("style_token").get<std::string>(), 0.0});
                    raw.push_back(e.at("weight").get<double>());
                }
                const auto w = normalize_weights(raw);
                for (std::size_t i = 0; i < w.size(); ++i)
                    st.entries[i].weight = w[i];
                plan.style = std::move(st);
                break;
            }
            case StageKind::GlobalColor:
                plan.global_color = GlobalColorStage{WeightedPalette::from_json(s.at("palette"))};
                break;
            case StageKind::LocalColor: {
                LocalColorStage lc;
                for (const auto& e : s.at("entries")) {
                    LocalColorEntry entry{e.at("instance_id").get<std::string>(), WeightedPalette::from_json(e.at("palette")),
                                          e.at("placement_index").get<std::size_t>()};
                    if (entry.placement_index >= plan.layout.placements.size())
                        throw Error(ErrorCode::FormatError, "local colour entry points past the placements");
                    lc.entries.push_back(std::move(entry));
                }
                plan.local_color = std::move(lc);
                break;
            }
            }
        }
        if (j.contains("plan_hash") && j["plan_hash"].get<std::string>() != plan.hash())
            throw Error(ErrorCode::HashMismatch, "plan_hash does not match the plan content");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("malformed plan: ") + e.what());
    }
    return plan;
}

ExecutionPlan ExecutionPlan::parse(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("plan is not valid JSON: ") + e.what());
    }
    return from_json(j);
}

ExecutionPlan compile(const VisualLexicon& lex, const MoodBoard& board, const CompileOptions& opts)
{
    const auto diags = validate(lex, board);
    const bool has_errors = std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.is_error(); });
    if (has_errors)
        throw Error(ErrorCode::ValidationFailed, "lexicon has validation errors", {{"diagnostics", diagnostics_json(diags)}});
    if (opts.strict && !diags.empty())
        throw Error(ErrorCode::StrictWarnings, "lexicon has warnings (strict mode)", {{"diagnostics", diagnostics_json(diags)}});

    const DirectivePromptExtender default_extender;
    const PromptExtender& extender = opts.extender ? *opts.extender : default_extender;

    ExecutionPlan plan;
    std::map<std::string, std::size_t> placement_of;
    for (const auto& inst : lex.instances()) {
        if (inst.kind != InstanceKind::Subject)
            continue;
        placement_of[inst.instance_id] = plan.layout.placements.size();
        plan.layout.placements.push_back({inst.instance_id, *inst.origin, *inst.rect, {}, lex.name_of(inst.instance_id)});
    }

    const std::string background = "";
    std::map<std::string, std::vector<std::string>> texts;
    std::map<std::string, ImaginationLevel> levels;
    std::map<std::string, std::vector<PaletteEntry>> colors;
    std::vector<std::pair<std::string, double>> style_area;

    for (const auto& inst : lex.instances()) {
        if (inst.kind == InstanceKind::Subject)
            continue;
        auto targets = targets_of(lex, inst);
        if (targets.empty() || inst.kind == InstanceKind::Style)
            targets = {background};
        switch (inst.kind) {
        case InstanceKind::Textual:
            for (const auto& t : targets)
                texts[t].push_back(substitute_refs(inst.text));
            break;
        case InstanceKind::Imaginative:
            for (const auto& t : targets) {
                auto& lvl = levels[t];
                lvl = std::max(lvl, inst.level);
            }
            break;
        case InstanceKind::Color: {
            const Rgb c = board.token(*inst.origin).as<ColorPayload>().color;
            for (const auto& t : targets)
                colors[t].push_back({c, inst.rect->area()});
            break;
        }
        case InstanceKind::Style: {
            auto it = std::find_if(style_area.begin(), style_area.end(),
                                   [&](const auto& e) { return e.first == *inst.origin; });
            if (it == style_area.end())
                style_area.emplace_back(*inst.origin, inst.rect->area());
            else
                it->second += inst.rect->area();
            break;
        }
        case InstanceKind::Subject:
            break;
        }
    }

    auto level_of = [&](const std::string& target) {
        auto it = levels.find(target);
        return it == levels.end() ? ImaginationLevel::None : it->second;
    };
    plan.layout.background_prompt = extend_prompt(join(texts[background], "; "), level_of(background), extender);
    for (auto& p : plan.layout.placements)
        p.prompt = extend_prompt(join(texts[p.instance_id], "; "), level_of(p.instance_id), extender);

    if (!style_area.empty()) {
        std::vector<double> raw;
        for (const auto& [id, area] : style_area)
            raw.push_back(area);
        const auto w = normalize_weights(raw);
        StyleStage st;
        for (std::size_t i = 0; i < w.size(); ++i)
            st.entries.push_back({style_area[i].first, w[i]});
        plan.style = std::move(st);
    }
    if (auto it = colors.find(background); it != colors.end())
        plan.global_color = GlobalColorStage{WeightedPalette::from_weights(it->second)};
    LocalColorStage local;
    for (const auto& p : plan.layout.placements)
        if (auto it = colors.find(p.instance_id); it != colors.end())
            local.entries.push_back({p.instance_id, WeightedPalette::from_weights(it->second), placement_of[p.instance_id]});
    if (!local.entries.empty())
        plan.local_color = std::move(local);
    return plan;
}

} // namespace lexcraft
