#include "lexcraft/lexicon.hpp"

#include "lexcraft/canonical.hpp"
#include "lexcraft/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lexcraft {

namespace {

bool is_name_char(char c)
{
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

std::uint64_t trailing_number(std::string_view id)
{
    std::size_t end = id.size();
    std::size_t start = end;
    while (start > 0 && id[start - 1] >= '0' && id[start - 1] <= '9')
        --start;
    if (start == end || end - start > 18)
        return 0;
    std::uint64_t v = 0;
    for (std::size_t i = start; i < end; ++i)
        v = v * 10 + static_cast<std::uint64_t>(id[i] - '0');
    return v;
}

nlohmann::json point_json(Point p)
{
    return {{"x", p.x}, {"y", p.y}};
}

Point point_from_json(const nlohmann::json& j)
{
    return make_point(j.at("x").get<double>(), j.at("y").get<double>());
}

} // namespace

std::string_view to_string(ImaginationLevel level)
{
    switch (level) {
    case ImaginationLevel::None: return "none";
    case ImaginationLevel::Small: return "small";
    case ImaginationLevel::Medium: return "medium";
    case ImaginationLevel::Large: return "large";
    }
    return "?";
}

ImaginationLevel imagination_level_from_string(std::string_view s)
{
    if (s == "none") return ImaginationLevel::None;
    if (s == "small") return ImaginationLevel::Small;
    if (s == "medium") return ImaginationLevel::Medium;
    if (s == "large") return ImaginationLevel::Large;
    throw Error(ErrorCode::BadCommand, "unknown imagination level '" + std::string(s) + "'");
}

std::string_view to_string(InstanceKind kind)
{
    switch (kind) {
    case InstanceKind::Subject: return "subject";
    case InstanceKind::Color: return "color";
    case InstanceKind::Style: return "style";
    case InstanceKind::Textual: return "textual";
    case InstanceKind::Imaginative: return "imaginative";
    }
    return "?";
}

InstanceKind instance_kind_from_string(std::string_view s)
{
    if (s == "subject") return InstanceKind::Subject;
    if (s == "color") return InstanceKind::Color;
    if (s == "style") return InstanceKind::Style;
    if (s == "textual") return InstanceKind::Textual;
    if (s == "imaginative") return InstanceKind::Imaginative;
    throw Error(ErrorCode::FormatError, "unknown instance kind '" + std::string(s) + "'");
}

double preset_area(ImaginationLevel level)
{
    switch (level) {
    case ImaginationLevel::Small: return 0.004;
    case ImaginationLevel::Medium: return 0.01;
    case ImaginationLevel::Large: return 0.02;
    case ImaginationLevel::None: break;
    }
    return 0.0;
}

ImaginationLevel level_for_area(double area)
{
    ImaginationLevel best = ImaginationLevel::Small;
    for (auto level : {ImaginationLevel::Medium, ImaginationLevel::Large})
        if (std::abs(area - preset_area(level)) < std::abs(area - preset_area(best)))
            best = level;
    return best;
}

std::vector<std::string> parse_cross_refs(std::string_view text)
{
    std::vector<std::string> out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '#')
            continue;
        std::size_t j = i + 1;
        while (j < text.size() && is_name_char(text[j]))
            ++j;
        if (j > i + 1)
            out.emplace_back(text.substr(i + 1, j - i - 1));
        i = j - 1;
    }
    return out;
}

bool is_valid_name(std::string_view name)
{
    return !name.empty() && std::all_of(name.begin(), name.end(), is_name_char);
}

bool id_less(std::string_view a, std::string_view b)
{
    const auto na = trailing_number(a), nb = trailing_number(b);
    if (na != nb)
        return na < nb;
    return a < b;
}

nlohmann::json TokenInstance::to_json() const
{
    nlohmann::json j{{"instance_id", instance_id}, {"kind", to_string(kind)}, {"position", point_json(position)}};
    if (origin)
        j["origin"] = *origin;
    if (rect)
        j["rect"] = rect->to_json();
    if (kind == InstanceKind::Textual)
        j["text"] = text;
    if (kind == InstanceKind::Imaginative)
        j["level"] = to_string(level);
    return j;
}

VisualLexicon::VisualLexicon(std::string lexicon_id) : lexicon_id_(std::move(lexicon_id)) {}

std::string VisualLexicon::next_id(char tag)
{
    return lexicon_id_ + "." + tag + std::to_string(next_seq_++);
}

const TokenInstance* VisualLexicon::find_instance(std::string_view id) const
{
    for (const auto& inst : instances_)
        if (inst.instance_id == id)
            return &inst;
    return nullptr;
}

const TokenGroup* VisualLexicon::find_group(std::string_view id) const
{
    for (const auto& g : groups_)
        if (g.group_id == id)
            return &g;
    return nullptr;
}

const TokenGroup* VisualLexicon::group_of(std::string_view instance_id) const
{
    for (const auto& g : groups_)
        if (std::find(g.members.begin(), g.members.end(), instance_id) != g.members.end())
            return &g;
    return nullptr;
}

std::optional<std::string> VisualLexicon::name_of(std::string_view instance_id) const
{
    for (const auto& [name, id] : names_)
        if (id == instance_id)
            return name;
    return std::nullopt;
}

const TokenInstance& VisualLexicon::checked_instance(std::string_view id) const
{
    if (const auto* inst = find_instance(id))
        return *inst;
    throw Error(ErrorCode::UnknownInstance, "no instance '" + std::string(id) + "'");
}

TokenInstance& VisualLexicon::instance_ref(std::string_view id)
{
    return const_cast<TokenInstance&>(checked_instance(id));
}

std::string VisualLexicon::place_copy(const MoodBoard& board, const std::string& source, const NormRect& rect)
{
    const SourceToken* token = board.find_token(source);
    if (!token)
        throw Error(ErrorCode::UnknownSource, "no source token '" + source + "' on the mood board");

    TokenInstance inst;
    inst.origin = source;
    inst.position = {rect.x(), rect.y()};
    switch (token->kind()) {
    case TokenKind::Subject: inst.kind = InstanceKind::Subject; break;
    case TokenKind::Color: inst.kind = InstanceKind::Color; break;
    case TokenKind::Style: inst.kind = InstanceKind::Style; break;
    case TokenKind::Concept: inst.kind = InstanceKind::Textual; break;
    }
    if (inst.kind == InstanceKind::Textual) {
        const auto& words = token->as<ConceptPayload>().keywords;
        for (std::size_t i = 0; i < words.size(); ++i)
            inst.text += (i ? ", " : "") + words[i];
    } else {
        inst.rect = rect;
    }
    inst.instance_id = next_id('i');
    instances_.push_back(std::move(inst));
    bump();
    return instances_.back().instance_id;
}

std::string VisualLexicon::create_textual(const std::string& text, Point position)
{
    if (text.empty())
        throw Error(ErrorCode::EmptyText, "textual tokens need text");
    TokenInstance inst;
    inst.kind = InstanceKind::Textual;
    inst.position = position;
    inst.text = text;
    inst.instance_id = next_id('i');
    instances_.push_back(std::move(inst));
    bump();
    return instances_.back().instance_id;
}

std::string VisualLexicon::create_imaginative(ImaginationLevel level, Point position)
{
    if (level == ImaginationLevel::None)
        throw Error(ErrorCode::BadCommand, "imaginative tokens are small, medium or large");
    TokenInstance inst;
    inst.kind = InstanceKind::Imaginative;
    inst.position = position;
    inst.level = level;
    inst.instance_id = next_id('i');
    instances_.push_back(std::move(inst));
    bump();
    return instances_.back().instance_id;
}

void VisualLexicon::set_geometry(const std::string& instance, const Geometry& geometry)
{
    TokenInstance& inst = instance_ref(instance);
    if (!geometry.position && !geometry.rect)
        throw Error(ErrorCode::BadCommand, "set_geometry needs a position or a rect");

    switch (inst.kind) {
    case InstanceKind::Textual:
        if (geometry.rect)
            throw Error(ErrorCode::ResizeNotAllowed, "textual tokens cannot be resized");
        inst.position = *geometry.position;
        break;
    case InstanceKind::Imaginative:
        if (geometry.rect) {
            inst.level = level_for_area(geometry.rect->area());
            inst.position = {geometry.rect->x(), geometry.rect->y()};
        } else {
            inst.position = *geometry.position;
        }
        break;
    default: {
        const NormRect next = geometry.rect ? *geometry.rect : inst.rect->moved_to(geometry.position->x, geometry.position->y);
        inst.rect = next;
        inst.position = {next.x(), next.y()};
        break;
    }
    }
    bump();
}

std::string VisualLexicon::group(const std::vector<std::string>& instances)
{
    std::set<std::string> unique;
    for (const auto& id : instances) {
        checked_instance(id);
        unique.insert(id);
    }
    if (unique.size() != instances.size())
        throw Error(ErrorCode::BadCommand, "group members listed more than once");
    if (instances.size() < 2)
        throw Error(ErrorCode::TooFewMembers, "a group needs at least two members");
    for (const auto& id : instances)
        if (checked_instance(id).kind == InstanceKind::Subject)
            throw Error(ErrorCode::SubjectInGroup, "subject '" + id + "' cannot be grouped; groups bundle modifiers");
    for (const auto& id : instances)
        if (const auto* g = group_of(id))
            throw Error(ErrorCode::AlreadyGrouped, "'" + id + "' already belongs to " + g->group_id);
    groups_.push_back({next_id('g'), instances});
    bump();
    return groups_.back().group_id;
}

void VisualLexicon::ungroup(const std::string& group_id)
{
    auto it = std::find_if(groups_.begin(), groups_.end(), [&](const TokenGroup& g) { return g.group_id == group_id; });
    if (it == groups_.end())
        throw Error(ErrorCode::UnknownGroup, "no group '" + group_id + "'");
    groups_.erase(it);
    std::erase_if(links_, [&](const LexiconLink& l) { return l.modifier == group_id; });
    bump();
}

std::string VisualLexicon::link(const std::string& modifier, const std::string& target)
{
    const TokenInstance* mod = find_instance(modifier);
    if (!mod && !find_group(modifier))
        throw Error(ErrorCode::UnknownInstance, "no instance or group '" + modifier + "'");
    const TokenInstance& tgt = checked_instance(target);
    if (mod && mod->kind == InstanceKind::Subject)
        throw Error(ErrorCode::InvalidEndpoint, "subjects cannot modify other subjects");
    if (tgt.kind != InstanceKind::Subject)
        throw Error(ErrorCode::InvalidEndpoint, "link targets must be subject instances");
    for (const auto& l : links_)
        if (l.modifier == modifier && l.target == target)
            throw Error(ErrorCode::DuplicateLink, modifier + " is already linked to " + target);
    links_.push_back({next_id('l'), modifier, target});
    bump();
    return links_.back().link_id;
}

void VisualLexicon::unlink(const std::string& link_id)
{
    auto it = std::find_if(links_.begin(), links_.end(), [&](const LexiconLink& l) { return l.link_id == link_id; });
    if (it == links_.end())
        throw Error(ErrorCode::UnknownLink, "no link '" + link_id + "'");
    links_.erase(it);
    bump();
}

void VisualLexicon::set_name(const std::string& instance, const std::string& name)
{
    checked_instance(instance);
    if (!is_valid_name(name))
        throw Error(ErrorCode::BadName, "names match [A-Za-z0-9_]+, got '" + name + "'");
    if (auto it = names_.find(name); it != names_.end() && it->second != instance)
        throw Error(ErrorCode::NameTaken, "name '" + name + "' already refers to " + it->second);
    std::erase_if(names_, [&](const auto& kv) { return kv.second == instance; });
    names_[name] = instance;
    bump();
}

void VisualLexicon::clear_panel()
{
    instances_.clear();
    groups_.clear();
    links_.clear();
    names_.clear();
    bump();
}

std::vector<std::pair<std::string, std::string>> VisualLexicon::integrity_problems() const
{
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::string> grouped;
    for (const auto& g : groups_) {
        if (g.members.size() < 2)
            out.emplace_back(g.group_id, "group " + g.group_id + " has fewer than two members");
        for (const auto& m : g.members) {
            const auto* inst = find_instance(m);
            if (!inst)
                out.emplace_back(g.group_id, "group " + g.group_id + " references missing instance " + m);
            else if (inst->kind == InstanceKind::Subject)
                out.emplace_back(g.group_id, "group " + g.group_id + " contains subject " + m);
            if (!grouped.insert(m).second)
                out.emplace_back(g.group_id, "instance " + m + " belongs to more than one group");
        }
    }
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& l : links_) {
        const auto* mod = find_instance(l.modifier);
        if (!mod && !find_group(l.modifier))
            out.emplace_back(l.link_id, "link " + l.link_id + " references missing modifier " + l.modifier);
        else if (mod && mod->kind == InstanceKind::Subject)
            out.emplace_back(l.link_id, "link " + l.link_id + " uses subject " + l.modifier + " as a modifier");
        const auto* tgt = find_instance(l.target);
        if (!tgt)
            out.emplace_back(l.link_id, "link " + l.link_id + " references missing target " + l.target);
        else if (tgt->kind != InstanceKind::Subject)
            out.emplace_back(l.link_id, "link " + l.link_id + " targets non-subject " + l.target);
        if (!pairs.emplace(l.modifier, l.target).second)
            out.emplace_back(l.link_id, "link " + l.link_id + " duplicates an earlier link");
    }
    for (const auto& [name, id] : names_)
        if (!find_instance(id))
            out.emplace_back(id, "name '" + name + "' references missing instance " + id);
    return out;
}

VisualLexicon VisualLexicon::fork(const std::string& new_lexicon_id, const std::optional<std::string>& parent_entry) const
{
    VisualLexicon out(new_lexicon_id);
    out.parent_entry_ = parent_entry;
    std::map<std::string, std::string> remap;
    for (const auto& inst : instances_) {
        TokenInstance copy = inst;
        copy.instance_id = out.next_id('i');
        remap[inst.instance_id] = copy.instance_id;
        out.instances_.push_back(std::move(copy));
    }
    auto mapped = [&](const std::string& id) {
        auto it = remap.find(id);
        return it == remap.end() ? id : it->second;
    };
    for (const auto& g : groups_) {
        TokenGroup copy{out.next_id('g'), {}};
        for (const auto& m : g.members)
            copy.members.push_back(mapped(m));
        remap[g.group_id] = copy.group_id;
        out.groups_.push_back(std::move(copy));
    }
    for (const auto& l : links_)
        out.links_.push_back({out.next_id('l'), mapped(l.modifier), mapped(l.target)});
    for (const auto& [name, id] : names_)
        out.names_[name] = mapped(id);
    return out;
}

nlohmann::json VisualLexicon::to_json() const
{
    auto instances = nlohmann::json::array();
    for (const auto& inst : instances_)
        instances.push_back(inst.to_json());
    auto groups = nlohmann::json::array();
    for (const auto& g : groups_)
        groups.push_back({{"group_id", g.group_id}, {"members", g.members}});
    auto links = nlohmann::json::array();
    for (const auto& l : links_)
        links.push_back({{"link_id", l.link_id}, {"modifier", l.modifier}, {"target", l.target}});
    auto names = nlohmann::json::object();
    for (const auto& [name, id] : names_)
        names[name] = id;
    nlohmann::json j{{"lexicon_id", lexicon_id_}, {"revision", revision_}, {"next_seq", next_seq_},
                     {"instances", instances}, {"groups", groups}, {"links", links}, {"names", names}};
    if (parent_entry_)
        j["parent_entry"] = *parent_entry_;
    return j;
}

VisualLexicon VisualLexicon::from_json(const nlohmann::json& j)
{
    try {
        VisualLexicon lex(j.at("lexicon_id").get<std::string>());
        lex.revision_ = j.value("revision", std::uint64_t{0});
        if (j.contains("parent_entry"))
            lex.parent_entry_ = j["parent_entry"].get<std::string>();
        std::set<std::string> ids;
        std::uint64_t max_seq = 0;
        auto claim = [&](const std::string& id) {
            if (!ids.insert(id).second)
                throw Error(ErrorCode::FormatError, "duplicate id '" + id + "'");
            max_seq = std::max(max_seq, trailing_number(id));
        };
        for (const auto& ij : j.value("instances", nlohmann::json::array())) {
            TokenInstance inst;
            inst.instance_id = ij.at("instance_id").get<std::string>();
            claim(inst.instance_id);
            inst.kind = instance_kind_from_string(ij.at("kind").get<std::string>());
            if (ij.contains("origin"))
                inst.origin = ij["origin"].get<std::string>();
            if (ij.contains("rect"))
                inst.rect = NormRect::from_json(ij["rect"]);
            if (ij.contains("position"))
                inst.position = point_from_json(ij["position"]);
            else if (inst.rect)
                inst.position = {inst.rect->x(), inst.rect->y()};
            else
                throw Error(ErrorCode::FormatError, "instance " + inst.instance_id + " has no position");
            switch (inst.kind) {
            case InstanceKind::Subject:
            case InstanceKind::Color:
            case InstanceKind::Style:
                if (!inst.origin || !inst.rect)
                    throw Error(ErrorCode::FormatError, "instance " + inst.instance_id + " needs an origin and a rect");
                break;
            case InstanceKind::Textual:
                if (inst.rect)
                    throw Error(ErrorCode::FormatError, "textual instance " + inst.instance_id + " cannot have a rect");
                inst.text = ij.at("text").get<std::string>();
                if (inst.text.empty())
                    throw Error(ErrorCode::FormatError, "textual instance " + inst.instance_id + " has no text");
                break;
            case InstanceKind::Imaginative:
                if (inst.rect)
                    throw Error(ErrorCode::FormatError, "imaginative instance " + inst.instance_id + " cannot have a rect");
                inst.level = imagination_level_from_string(ij.at("level").get<std::string>());
                if (inst.level == ImaginationLevel::None)
                    throw Error(ErrorCode::FormatError, "imaginative instance " + inst.instance_id + " needs a level");
                break;
            }
            lex.instances_.push_back(std::move(inst));
        }
        for (const auto& gj : j.value("groups", nlohmann::json::array())) {
            TokenGroup g{gj.at("group_id").get<std::string>(), gj.at("members").get<std::vector<std::string>>()};
            claim(g.group_id);
            lex.groups_.push_back(std::move(g));
        }
        for (const auto& lj : j.value("links", nlohmann::json::array())) {
            LexiconLink l{lj.at("link_id").get<std::string>(), lj.at("modifier").get<std::string>(),
                          lj.at("target").get<std::string>()};
            claim(l.link_id);
            lex.links_.push_back(std::move(l));
        }
        const nlohmann::json names = j.value("names", nlohmann::json::object());
        for (const auto& [name, id] : names.items()) {
            if (!is_valid_name(name))
                throw Error(ErrorCode::FormatError, "invalid name '" + name + "'");
            lex.names_[name] = id.get<std::string>();
        }
        for (const auto& [name, id] : lex.names_)
            if (std::count_if(lex.names_.begin(), lex.names_.end(), [&](const auto& kv) { return kv.second == id; }) > 1)
                throw Error(ErrorCode::FormatError, "instance " + id + " has more than one name");
        lex.next_seq_ = std::max(j.value("next_seq", std::uint64_t{1}), max_seq + 1);
        return lex;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("malformed lexicon: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::FormatError)
            throw;
        throw Error(ErrorCode::FormatError, std::string("malformed lexicon: ") + e.what());
    }
}

std::string VisualLexicon::canonical() const
{
    return canonical_dump(to_json());
}

namespace {

const nlohmann::json& arg(const nlohmann::json& args, const char* key)
{
    if (!args.contains(key))
        throw Error(ErrorCode::BadCommand, std::string("missing argument '") + key + "'");
    return args[key];
}

std::string string_arg(const nlohmann::json& args, const char* key)
{
    const auto& v = arg(args, key);
    if (!v.is_string())
        throw Error(ErrorCode::BadCommand, std::string("argument '") + key + "' must be a string");
    return v.get<std::string>();
}

Point position_arg(const nlohmann::json& args)
{
    if (args.contains("position"))
        return point_from_json(args["position"]);
    return make_point(arg(args, "x").get<double>(), arg(args, "y").get<double>());
}

} // namespace

CommandResult apply_command(VisualLexicon& lex, const MoodBoard& board, const nlohmann::json& envelope)
{
    if (!envelope.is_object() || !envelope.contains("op") || !envelope["op"].is_string())
        throw Error(ErrorCode::BadCommand, "command envelope needs a string 'op'");
    if (!envelope.contains("expected_revision") || !envelope["expected_revision"].is_number_integer())
        throw Error(ErrorCode::BadCommand, "command envelope needs an integer 'expected_revision'");
    const auto expected = envelope["expected_revision"].get<std::int64_t>();
    if (expected < 0 || static_cast<std::uint64_t>(expected) != lex.revision())
        throw Error(ErrorCode::RevisionConflict,
                    "expected revision " + std::to_string(expected) + " but document is at " + std::to_string(lex.revision()),
                    {{"expected_revision", expected}, {"revision", lex.revision()}});

    const std::string op = envelope["op"].get<std::string>();
    const nlohmann::json args = envelope.value("args", nlohmann::json::object());
    if (!args.is_object())
        throw Error(ErrorCode::BadCommand, "'args' must be an object");

    CommandResult out;
    try {
        if (op == "place_copy") {
            out.result["instance_id"] = lex.place_copy(board, string_arg(args, "source"), NormRect::from_json(arg(args, "rect")));
        } else if (op == "create_textual") {
            out.result["instance_id"] = lex.create_textual(string_arg(args, "text"), position_arg(args));
        } else if (op == "create_imaginative") {
            out.result["instance_id"] =
                lex.create_imaginative(imagination_level_from_string(string_arg(args, "level")), position_arg(args));
        } else if (op == "set_geometry") {
            Geometry g;
            if (args.contains("rect"))
                g.rect = NormRect::from_json(args["rect"]);
            else
                g.position = position_arg(args);
            lex.set_geometry(string_arg(args, "instance"), g);
        } else if (op == "group") {
            const auto& members = arg(args, "instances");
            if (!members.is_array())
                throw Error(ErrorCode::BadCommand, "'instances' must be an array of ids");
            out.result["group_id"] = lex.group(members.get<std::vector<std::string>>());
        } else if (op == "ungroup") {
            lex.ungroup(string_arg(args, "group"));
        } else if (op == "link") {
            out.result["link_id"] = lex.link(string_arg(args, "modifier"), string_arg(args, "target"));
        } else if (op == "unlink") {
            lex.unlink(string_arg(args, "link"));
        } else if (op == "set_name") {
            lex.set_name(string_arg(args, "instance"), string_arg(args, "name"));
        } else if (op == "clear_panel") {
            lex.clear_panel();
        } else {
            throw Error(ErrorCode::BadCommand, "unknown op '" + op + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadCommand, std::string("malformed arguments: ") + e.what());
    }
    out.revision = lex.revision();
    return out;
}

} // namespace lexcraft
