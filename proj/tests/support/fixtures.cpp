#include "fixtures.hpp"

#include "lexcraft/error.hpp"

#include <cmath>

namespace lexcraft::fixtures {

namespace {

void fill_rect(Image& img, int x0, int y0, int x1, int y1, Rgb c)
{
    for (int y = std::max(0, y0); y < std::min(img.height, y1); ++y)
        for (int x = std::max(0, x0); x < std::min(img.width, x1); ++x)
            img.at(x, y) = c;
}

void fill_ellipse(Image& img, double cx, double cy, double rx, double ry, Rgb c)
{
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
            if (dx * dx + dy * dy <= 1.0)
                img.at(x, y) = c;
        }
}

const std::vector<std::string> kLevels{"small", "medium", "large"};
const std::vector<std::string> kWords{"misty", "golden hour", "facing left", "soft light", "behind", "tiny"};

nlohmann::json random_rect(std::mt19937_64& rng)
{
    const double w = uniform(rng, 0.05, 0.5), h = uniform(rng, 0.05, 0.5);
    return {{"x", uniform(rng, 0.0, 1.0 - w)}, {"y", uniform(rng, 0.0, 1.0 - h)}, {"w", w}, {"h", h}};
}

nlohmann::json random_position(std::mt19937_64& rng)
{
    return {{"x", uniform(rng, 0.0, 1.0)}, {"y", uniform(rng, 0.0, 1.0)}};
}

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng)
{
    return v[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(v.size()) - 1))];
}

std::string random_text(const VisualLexicon& lex, std::mt19937_64& rng, bool valid_refs_only)
{
    std::string text = pick(kWords, rng);
    if (uniform_int(rng, 0, 2) == 0) {
        std::vector<std::string> names;
        for (const auto& [name, id] : lex.names())
            if (const auto* inst = lex.find_instance(id); inst && inst->kind == InstanceKind::Subject)
                names.push_back(name);
        if (!names.empty())
            text += " near #" + pick(names, rng);
        else if (!valid_refs_only)
            text += " near #ghost";
    }
    return text;
}

} // namespace

double uniform(std::mt19937_64& rng, double lo, double hi)
{
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi)
{
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

Image solid(int width, int height, Rgb color)
{
    return Image(width, height, color);
}

Image draw_owl(int size)
{
    Image img = solid(size, size, {200, 225, 245});
    const double s = size / 256.0;
    fill_ellipse(img, 128 * s, 150 * s, 70 * s, 90 * s, {120, 80, 40});
    fill_ellipse(img, 128 * s, 170 * s, 45 * s, 55 * s, {190, 160, 110});
    fill_ellipse(img, 100 * s, 100 * s, 20 * s, 20 * s, {250, 250, 240});
    fill_ellipse(img, 156 * s, 100 * s, 20 * s, 20 * s, {250, 250, 240});
    fill_ellipse(img, 100 * s, 100 * s, 8 * s, 8 * s, {20, 20, 20});
    fill_ellipse(img, 156 * s, 100 * s, 8 * s, 8 * s, {20, 20, 20});
    fill_rect(img, static_cast<int>(120 * s), static_cast<int>(115 * s), static_cast<int>(136 * s),
              static_cast<int>(130 * s), {230, 160, 30});
    return img;
}

Image draw_car(int size)
{
    Image img = solid(size, size, {235, 235, 235});
    const double s = size / 256.0;
    auto px = [s](double v) { return static_cast<int>(v * s); };
    fill_rect(img, px(30), px(120), px(226), px(180), {200, 30, 40});
    fill_rect(img, px(70), px(80), px(180), px(125), {180, 25, 35});
    fill_rect(img, px(85), px(88), px(165), px(118), {150, 200, 230});
    fill_ellipse(img, 75 * s, 185 * s, 22 * s, 22 * s, {30, 30, 30});
    fill_ellipse(img, 180 * s, 185 * s, 22 * s, 22 * s, {30, 30, 30});
    return img;
}

Image draw_tree(int size)
{
    Image img = solid(size, size, {250, 245, 230});
    const double s = size / 256.0;
    fill_rect(img, static_cast<int>(115 * s), static_cast<int>(150 * s), static_cast<int>(141 * s),
              static_cast<int>(240 * s), {100, 60, 30});
    fill_ellipse(img, 128 * s, 100 * s, 80 * s, 75 * s, {40, 140, 50});
    fill_ellipse(img, 100 * s, 80 * s, 20 * s, 18 * s, {70, 170, 70});
    return img;
}

Image draw_stripes(int size)
{
    Image img = solid(size, size, {0, 0, 0});
    const Rgb a{70, 40, 110}, b{240, 200, 120};
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            img.at(x, y) = ((x + y) / 16) % 2 ? a : b;
    return img;
}

Image draw_palette_blocks(int size)
{
    Image img = solid(size, size, {0, 0, 0});
    const int h = size / 2;
    fill_rect(img, 0, 0, size, h, {60, 120, 60});                 // 50%
    fill_rect(img, 0, h, size, h + size / 4, {230, 190, 90});     // 25%
    fill_rect(img, 0, h + size / 4, h, size, {90, 150, 220});     // 12.5%
    fill_rect(img, h, h + size / 4, size, size, {240, 120, 110}); // 12.5%
    return img;
}

Mask ForegroundSegmenter::segment(const Image& image, const PixelRect& box) const
{
    const Rgb bg = image.at(0, 0);
    Mask m(box.width(), box.height(), false);
    for (int y = 0; y < box.height(); ++y)
        for (int x = 0; x < box.width(); ++x)
            if (!(image.at(box.x0 + x, box.y0 + y) == bg))
                m.set(x, y, true);
    return m;
}

MoodBoard::Clock counter_clock()
{
    auto t = std::make_shared<std::int64_t>(1'700'000'000'000);
    return [t] { return (*t)++; };
}

OwlCar build_owl_car()
{
    OwlCar f{MoodBoard(counter_clock()), VisualLexicon("lx1"), {}, {}, {}, {}, {}, {}, {}, {}};
    MoodBoard& b = f.board;
    const ForegroundSegmenter seg;
    const auto owl_img = b.add_image(draw_owl()).image_id;
    const auto car_img = b.add_image(draw_car()).image_id;
    const auto tree_img = b.add_image(draw_tree()).image_id;
    const auto style_img = b.add_image(draw_stripes()).image_id;
    const auto palette_img = b.add_image(draw_palette_blocks()).image_id;

    const auto owl_tok = b.create_subject_token(owl_img, NormRect::make(0.2, 0.1, 0.6, 0.85), seg).token_id;
    const auto car_tok = b.create_subject_token(car_img, NormRect::make(0.1, 0.3, 0.8, 0.5), seg).token_id;
    const auto tree_tok = b.create_subject_token(tree_img, NormRect::make(0.15, 0.08, 0.7, 0.88), seg).token_id;
    const auto colors = b.extract_color_tokens(palette_img);
    const auto style_tok = b.create_style_token(style_img).token_id;
    const auto concept_tok = b.create_concept_token(style_img, FixedKeywords({"playfulness"})).token_id;

    VisualLexicon& lx = f.lexicon;
    f.owl = lx.place_copy(b, owl_tok, NormRect::make(0.08, 0.35, 0.3, 0.45));
    f.car = lx.place_copy(b, car_tok, NormRect::make(0.4, 0.55, 0.45, 0.3));
    f.tree = lx.place_copy(b, tree_tok, NormRect::make(0.62, 0.08, 0.3, 0.42));
    lx.set_name(f.car, "car");

    // Swatch area follows the extracted share so the palette keeps its proportions.
    std::vector<std::string> swatches;
    const auto shares = kmeans_palette(b.image(palette_img).pixels, 5);
    double x = 0.02;
    for (const auto& c : colors) {
        const double h = 0.2 * shares[shares.find(c.as<ColorPayload>().color)].weight;
        swatches.push_back(lx.place_copy(b, c.token_id, NormRect::make(x, 0.02, 0.04, h)));
        x += 0.05;
    }
    f.color_group = lx.group(swatches);
    f.style = lx.place_copy(b, style_tok, NormRect::make(0.3, 0.02, 0.08, 0.08));

    f.behind_car = lx.create_textual("standing behind #car, facing left", make_point(0.1, 0.3));
    lx.link(f.behind_car, f.owl);
    f.large = lx.create_imaginative(ImaginationLevel::Large, make_point(0.8, 0.05));
    lx.link(f.large, f.tree);
    lx.place_copy(b, concept_tok, NormRect::make(0.45, 0.02, 0.1, 0.05));
    f.park = lx.create_textual("beautiful park", make_point(0.5, 0.95));
    return f;
}

namespace {

struct SubjectBoard {
    MoodBoard board{counter_clock()};
    std::string token;
};

SubjectBoard subject_board()
{
    SubjectBoard s;
    const auto img = s.board.add_image(draw_owl(128)).image_id;
    s.token = s.board.create_subject_token(img, NormRect::make(0.1, 0.1, 0.8, 0.8), ForegroundSegmenter{}).token_id;
    return s;
}

} // namespace

LexiconBundle seven_subjects()
{
    auto s = subject_board();
    VisualLexicon lx("lx7");
    for (int i = 0; i < 7; ++i)
        lx.place_copy(s.board, s.token, NormRect::make(0.02 + 0.135 * i, 0.3, 0.12, 0.3));
    return {std::move(s.board), std::move(lx)};
}

LexiconBundle ghost_reference()
{
    auto s = subject_board();
    VisualLexicon lx("lxg");
    const auto owl = lx.place_copy(s.board, s.token, NormRect::make(0.3, 0.3, 0.4, 0.4));
    lx.set_name(owl, "owl");
    const auto text = lx.create_textual("perched next to #ghost", make_point(0.1, 0.1));
    lx.link(text, owl);
    return {std::move(s.board), std::move(lx)};
}

LexiconBundle overlapping_subjects()
{
    auto s = subject_board();
    VisualLexicon lx("lxo");
    // Same size, offset so the intersection is 0.9 / 1.1 of the union: IoU ~0.9.
    const double side = 0.4, shift = side * (1.0 - 0.9) / (1.0 + 0.9);
    lx.place_copy(s.board, s.token, NormRect::make(0.3, 0.3, side, side));
    lx.place_copy(s.board, s.token, NormRect::make(0.3 + shift, 0.3, side, side));
    return {std::move(s.board), std::move(lx)};
}

MoodBoard random_board(std::mt19937_64& rng)
{
    MoodBoard b(counter_clock());
    const ForegroundSegmenter seg;
    std::vector<std::string> imgs;
    imgs.push_back(b.add_image(draw_owl(64)).image_id);
    imgs.push_back(b.add_image(draw_car(64)).image_id);
    imgs.push_back(b.add_image(draw_tree(64)).image_id);
    for (int i = 0; i < 3; ++i) {
        const double w = uniform(rng, 0.5, 0.9), h = uniform(rng, 0.5, 0.9);
        b.create_subject_token(imgs[i], NormRect::make((1 - w) / 2, (1 - h) / 2, w, h), seg);
    }
    for (int i = 0; i < 3; ++i)
        b.create_color_token({static_cast<std::uint8_t>(rng() & 0xFF), static_cast<std::uint8_t>(rng() & 0xFF),
                              static_cast<std::uint8_t>(rng() & 0xFF)});
    const auto style_img = b.add_image(draw_stripes(32)).image_id;
    b.create_style_token(style_img);
    b.create_concept_token(style_img, FixedKeywords({"playful"}));
    return b;
}

nlohmann::json random_command(const VisualLexicon& lex, const MoodBoard& board, std::mt19937_64& rng)
{
    std::vector<std::string> subjects, modifiers, all, groups, links;
    for (const auto& i : lex.instances()) {
        all.push_back(i.instance_id);
        (i.kind == InstanceKind::Subject ? subjects : modifiers).push_back(i.instance_id);
    }
    for (const auto& g : lex.groups())
        groups.push_back(g.group_id);
    for (const auto& l : lex.links())
        links.push_back(l.link_id);
    std::vector<std::string> sources;
    for (const auto& t : board.tokens())
        sources.push_back(t.token_id);

    // Occasionally reference an id that does not exist.
    auto some = [&](const std::vector<std::string>& ids) {
        return ids.empty() || uniform_int(rng, 0, 19) == 0 ? std::string("missing.9") : pick(ids, rng);
    };

    nlohmann::json args = nlohmann::json::object();
    std::string op;
    switch (uniform_int(rng, 0, 11)) {
    case 0:
    case 1:
    case 2:
        op = "place_copy";
        args = {{"source", sources.empty() ? "tok_1" : pick(sources, rng)}, {"rect", random_rect(rng)}};
        break;
    case 3:
        op = "create_textual";
        args = {{"text", random_text(lex, rng, false)}, {"position", random_position(rng)}};
        break;
    case 4:
        op = "create_imaginative";
        args = {{"level", pick(kLevels, rng)}, {"position", random_position(rng)}};
        break;
    case 5:
        op = "set_geometry";
        if (uniform_int(rng, 0, 1))
            args = {{"instance", some(all)}, {"rect", random_rect(rng)}};
        else
            args = {{"instance", some(all)}, {"position", random_position(rng)}};
        break;
    case 6: {
        op = "group";
        auto members = nlohmann::json::array();
        const int n = uniform_int(rng, 1, 3);
        for (int i = 0; i < n; ++i)
            members.push_back(uniform_int(rng, 0, 5) == 0 ? some(subjects) : some(modifiers));
        args = {{"instances", members}};
        break;
    }
    case 7:
        op = "ungroup";
        args = {{"group", some(groups)}};
        break;
    case 8:
    case 9: {
        op = "link";
        std::vector<std::string> mods = modifiers;
        mods.insert(mods.end(), groups.begin(), groups.end());
        args = {{"modifier", some(mods)}, {"target", some(subjects)}};
        break;
    }
    case 10:
        op = uniform_int(rng, 0, 9) == 0 ? "clear_panel" : "unlink";
        if (op == "unlink")
            args = {{"link", some(links)}};
        break;
    default:
        op = "set_name";
        args = {{"instance", some(all)},
                {"name", uniform_int(rng, 0, 9) == 0 ? std::string("bad name") : "n" + std::to_string(uniform_int(rng, 0, 5))}};
        break;
    }
    return {{"op", op}, {"args", args}, {"expected_revision", lex.revision()}};
}

VisualLexicon random_lexicon(const MoodBoard& board, std::mt19937_64& rng, int accepted, const std::string& id)
{
    VisualLexicon lex(id);
    int ok = 0;
    for (int attempt = 0; ok < accepted && attempt < 4 * accepted; ++attempt) {
        try {
            apply_command(lex, board, random_command(lex, board, rng));
            ++ok;
        } catch (const Error&) {
        }
    }
    return lex;
}

VisualLexicon random_valid_lexicon(const MoodBoard& board, std::mt19937_64& rng, const std::string& id)
{
    VisualLexicon lex(id);
    std::vector<std::string> subject_tokens, modifier_tokens;
    for (const auto& t : board.tokens())
        (t.kind() == TokenKind::Subject ? subject_tokens : modifier_tokens).push_back(t.token_id);

    auto attempt = [](auto&& f) {
        try {
            f();
        } catch (const Error&) {
        }
    };

    std::vector<std::string> subjects, modifiers;
    const int n_subjects = uniform_int(rng, 1, 5);
    for (int i = 0; i < n_subjects; ++i) {
        subjects.push_back(lex.place_copy(board, pick(subject_tokens, rng),
                                          NormRect::from_json(random_rect(rng))));
        if (uniform_int(rng, 0, 1))
            attempt([&] { lex.set_name(subjects.back(), "s" + std::to_string(i)); });
    }
    const int n_mods = uniform_int(rng, 0, 6);
    for (int i = 0; i < n_mods; ++i) {
        switch (uniform_int(rng, 0, 3)) {
        case 0:
        case 1:
            modifiers.push_back(lex.place_copy(board, pick(modifier_tokens, rng), NormRect::from_json(random_rect(rng))));
            break;
        case 2:
            modifiers.push_back(lex.create_textual(random_text(lex, rng, true), make_point(uniform(rng, 0, 1), uniform(rng, 0, 1))));
            break;
        default:
            modifiers.push_back(lex.create_imaginative(imagination_level_from_string(pick(kLevels, rng)),
                                                       make_point(uniform(rng, 0, 1), uniform(rng, 0, 1))));
            break;
        }
    }
    if (modifiers.size() >= 2 && uniform_int(rng, 0, 2) == 0)
        attempt([&] { lex.group({modifiers[0], modifiers[1]}); });
    for (const auto& m : modifiers)
        if (uniform_int(rng, 0, 1))
            attempt([&] {
                const auto* g = lex.group_of(m);
                lex.link(g ? g->group_id : m, pick(subjects, rng));
            });
    return lex;
}

} // namespace lexcraft::fixtures
