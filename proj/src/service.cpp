#include "lexcraft/service.hpp"

#include "lexcraft/canonical.hpp"
#include "lexcraft/compiler.hpp"
#include "lexcraft/error.hpp"

#include <httplib.h>

#include <cstdlib>
#include <random>

namespace lexcraft {

namespace {

std::string random_session_id()
{
    static std::mutex mutex;
    static std::random_device device;
    std::lock_guard lock(mutex);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out = "s";
    for (int i = 0; i < 16; ++i)
        out += hex[device() & 0xF];
    return out;
}

const nlohmann::json& require(const nlohmann::json& body, const char* key)
{
    if (!body.is_object() || !body.contains(key))
        throw Error(ErrorCode::BadCommand, std::string("missing field '") + key + "'");
    return body[key];
}

std::string require_string(const nlohmann::json& body, const char* key)
{
    const auto& v = require(body, key);
    if (!v.is_string())
        throw Error(ErrorCode::BadCommand, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

Canvas canvas_from(const nlohmann::json& body)
{
    Canvas c;
    if (!body.is_object() || !body.contains("canvas"))
        return c;
    const auto& v = body["canvas"];
    if (v.is_number_integer()) {
        c.width = c.height = v.get<int>();
    } else if (v.is_object()) {
        c.width = v.at("width").get<int>();
        c.height = v.at("height").get<int>();
    } else {
        throw Error(ErrorCode::BadCommand, "canvas must be an integer or {width, height}");
    }
    return c;
}

std::string artifact_url(const std::string& id, const std::string& stem)
{
    return "/artifacts/" + id + "/" + stem + ".png";
}

} // namespace

ServiceConfig config_from_env()
{
    ServiceConfig c;
    if (const char* dir = std::getenv("LEXCRAFT_DATA_DIR"); dir && *dir)
        c.data_dir = std::filesystem::path(dir);
    return c;
}

Service::Session::Session(std::string session_id, const ServiceConfig& config)
    : id(session_id),
      history(std::move(session_id),
              config.data_dir ? std::optional(*config.data_dir / "history") : std::optional<std::filesystem::path>())
{
    next_artifact = history.list().size() + 1;
}

Service::Service(ServiceConfig config) : config_(std::move(config))
{
    if (!config_.data_dir)
        return;
    const auto dir = *config_.data_dir / "history";
    if (!std::filesystem::is_directory(dir))
        return;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".ndjson")
            continue;
        const std::string id = entry.path().stem().string();
        sessions_.emplace(id, std::make_shared<Session>(id, config_));
    }
}

Service::~Service() = default;

std::shared_ptr<Service::Session> Service::session(const std::string& id)
{
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end())
        throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
    return it->second;
}

std::shared_ptr<Service::LiveLexicon> Service::live(Session& s, const std::string& lexicon_id)
{
    std::lock_guard lock(s.lexicons_mutex);
    auto it = s.lexicons.find(lexicon_id);
    if (it == s.lexicons.end())
        throw Error(ErrorCode::UnknownLexicon, "no lexicon '" + lexicon_id + "' in session " + s.id);
    return it->second;
}

std::string Service::create_session()
{
    auto id = random_session_id();
    std::unique_lock lock(sessions_mutex_);
    while (sessions_.contains(id))
        id = random_session_id();
    sessions_.emplace(id, std::make_shared<Session>(id, config_));
    return id;
}

nlohmann::json Service::add_image(const std::string& sid, std::span<const std::uint8_t> png_bytes)
{
    auto s = session(sid);
    Image img = decode_png(png_bytes);
    std::unique_lock lock(s->board_mutex);
    return s->board.add_image(std::move(img)).to_json();
}

std::vector<std::uint8_t> Service::image_png(const std::string& sid, const std::string& image_id)
{
    auto s = session(sid);
    std::shared_lock lock(s->board_mutex);
    return encode_png(s->board.image(image_id));
}

nlohmann::json Service::create_tokens(const std::string& sid, const nlohmann::json& body)
{
    auto s = session(sid);
    const std::string kind = require_string(body, "kind");
    const nlohmann::json args = body.value("args", nlohmann::json::object());

    std::vector<SourceToken> created;
    std::unique_lock lock(s->board_mutex);
    try {
        if (kind == "subject") {
            created.push_back(s->board.create_subject_token(require_string(args, "image_id"),
                                                            NormRect::from_json(require(args, "bbox"))));
        } else if (kind == "colors:auto") {
            created = s->board.extract_color_tokens(require_string(args, "image_id"));
        } else if (kind == "color:manual") {
            const auto origin = color_origin_from_string(args.value("origin", std::string("manual")));
            created.push_back(s->board.create_color_token(rgb_from_hex(require_string(args, "rgb")), origin));
        } else if (kind == "style") {
            created.push_back(s->board.create_style_token(require_string(args, "image_id")));
        } else if (kind == "concept") {
            created.push_back(s->board.create_concept_token(require_string(args, "image_id")));
        } else {
            throw Error(ErrorCode::BadCommand, "unknown token kind '" + kind + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadCommand, std::string("malformed token request: ") + e.what());
    }
    auto out = nlohmann::json::array();
    for (const auto& t : created)
        out.push_back(t.to_json());
    return {{"tokens", out}};
}

nlohmann::json Service::recolor_token(const std::string& sid, const std::string& token_id, const nlohmann::json& body)
{
    auto s = session(sid);
    const Rgb color = rgb_from_hex(require_string(body, "rgb"));
    std::unique_lock lock(s->board_mutex);
    s->board.recolor_token(token_id, color);
    return s->board.token(token_id).to_json();
}

nlohmann::json Service::list_tokens(const std::string& sid)
{
    auto s = session(sid);
    std::shared_lock lock(s->board_mutex);
    auto out = nlohmann::json::array();
    for (const auto& t : s->board.tokens())
        out.push_back(t.to_json());
    return {{"tokens", out}};
}

std::vector<std::uint8_t> Service::token_thumbnail_png(const std::string& sid, const std::string& token_id)
{
    auto s = session(sid);
    std::shared_lock lock(s->board_mutex);
    const SourceToken& t = s->board.token(token_id);
    if (const auto* p = std::get_if<SubjectPayload>(&t.payload))
        return encode_png(p->thumbnail);
    if (const auto* p = std::get_if<StylePayload>(&t.payload))
        return encode_png(p->style_thumbnail);
    throw Error(ErrorCode::KindMismatch, "only subject and style tokens have thumbnails");
}

std::string Service::add_lexicon(Session& s, const std::optional<std::string>& fork_from)
{
    std::lock_guard lock(s.lexicons_mutex);
    std::string id;
    do {
        id = "lx" + std::to_string(s.next_lexicon++);
    } while (s.lexicons.contains(id));
    auto live = std::make_shared<LiveLexicon>();
    live->doc = fork_from ? s.history.fork(*fork_from, id) : VisualLexicon(id);
    s.lexicons.emplace(id, std::move(live));
    return id;
}

std::string Service::create_lexicon(const std::string& sid)
{
    auto s = session(sid);
    return add_lexicon(*s, std::nullopt);
}

CommandResult Service::command(const std::string& sid, const std::string& lexicon, const nlohmann::json& envelope)
{
    auto s = session(sid);
    auto lx = live(*s, lexicon);
    std::shared_lock board_lock(s->board_mutex);
    std::lock_guard lock(lx->mutex);
    return apply_command(lx->doc, s->board, envelope);
}

nlohmann::json Service::snapshot(const std::string& sid, const std::string& lexicon)
{
    auto s = session(sid);
    auto lx = live(*s, lexicon);
    std::lock_guard lock(lx->mutex);
    return lx->doc.to_json();
}

nlohmann::json Service::validate(const std::string& sid, const std::string& lexicon)
{
    auto s = session(sid);
    auto lx = live(*s, lexicon);
    std::shared_lock board_lock(s->board_mutex);
    std::lock_guard lock(lx->mutex);
    return {{"revision", lx->doc.revision()}, {"diagnostics", diagnostics_json(lexcraft::validate(lx->doc, s->board))}};
}

nlohmann::json Service::generate(const std::string& sid, const std::string& lexicon, const nlohmann::json& body)
{
    auto s = session(sid);
    auto lx = live(*s, lexicon);
    VisualLexicon doc;
    {
        std::lock_guard lock(lx->mutex);
        doc = lx->doc;
    }
    MoodBoard board;
    {
        std::shared_lock lock(s->board_mutex);
        board = s->board;
    }

    const Canvas canvas = canvas_from(body);
    const auto seed = body.is_object() ? body.value("seed", kDefaultSeed) : kDefaultSeed;
    CompileOptions opts;
    opts.strict = body.is_object() && body.value("strict", false);
    const ExecutionPlan plan = compile(doc, board, opts);
    CompositorBackend backend;
    const RenderArtifact artifact = render(plan, board, backend, canvas, seed);

    std::string artifact_id;
    {
        std::lock_guard lock(s->lexicons_mutex);
        artifact_id = s->id + "-a" + std::to_string(s->next_artifact++);
    }
    auto stored = std::make_shared<StoredArtifact>();
    auto stages = nlohmann::json::array();
    for (std::size_t i = 0; i < artifact.stages.size(); ++i) {
        const auto stem = stage_file_stem(i, artifact.stages[i].stage);
        stored->pngs[stem] = encode_png(artifact.stages[i].image);
        stages.push_back({{"stage", to_string(artifact.stages[i].stage)}, {"url", artifact_url(artifact_id, stem)}});
    }
    stored->pngs["final"] = encode_png(artifact.final_image());
    stored->metadata = artifact.to_json();
    if (config_.data_dir) {
        const auto dir = *config_.data_dir / "artifacts" / artifact_id;
        std::filesystem::create_directories(dir);
        for (const auto& [stem, bytes] : stored->pngs)
            write_file_bytes((dir / (stem + ".png")).string(), bytes);
    }
    {
        std::lock_guard lock(artifacts_mutex_);
        artifacts_[artifact_id] = stored;
    }
    const std::string entry_id = s->history.record(doc, plan, board, artifact_id);

    return {{"entry_id", entry_id},
            {"artifact_id", artifact_id},
            {"plan_hash", plan.hash()},
            {"revision", doc.revision()},
            {"diagnostics", diagnostics_json(lexcraft::validate(doc, board))},
            {"stages", stages},
            {"final", artifact_url(artifact_id, "final")}};
}

nlohmann::json Service::history(const std::string& sid)
{
    auto s = session(sid);
    auto out = nlohmann::json::array();
    for (const auto& e : s->history.list()) {
        auto j = e->to_json();
        j["final"] = artifact_url(e->artifact_id, "final");
        out.push_back(std::move(j));
    }
    return {{"entries", out}};
}

std::string Service::fork(const std::string& sid, const std::string& entry_id)
{
    auto s = session(sid);
    return add_lexicon(*s, entry_id);
}

std::vector<std::uint8_t> Service::artifact_png(const std::string& artifact_id, const std::string& stage)
{
    {
        std::lock_guard lock(artifacts_mutex_);
        if (auto it = artifacts_.find(artifact_id); it != artifacts_.end()) {
            auto png = it->second->pngs.find(stage);
            if (png == it->second->pngs.end())
                throw Error(ErrorCode::UnknownArtifact, "artifact " + artifact_id + " has no stage '" + stage + "'");
            return png->second;
        }
    }
    if (config_.data_dir) {
        const auto file = *config_.data_dir / "artifacts" / artifact_id / (stage + ".png");
        if (artifact_id.find("..") == std::string::npos && stage.find("..") == std::string::npos &&
            std::filesystem::exists(file))
            return read_file_bytes(file.string());
    }
    throw Error(ErrorCode::UnknownArtifact, "no artifact '" + artifact_id + "'");
}

int http_status(ErrorCode code)
{
    switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownLexicon:
    case ErrorCode::UnknownArtifact:
    case ErrorCode::UnknownEntry:
    case ErrorCode::UnknownImage:
    case ErrorCode::UnknownToken:
    case ErrorCode::UnknownInstance:
    case ErrorCode::UnknownGroup:
    case ErrorCode::UnknownLink:
    case ErrorCode::UnknownSource:
        return 404;
    case ErrorCode::RevisionConflict:
        return 409;
    case ErrorCode::ValidationFailed:
    case ErrorCode::StrictWarnings:
        return 422;
    case ErrorCode::BackendError:
    case ErrorCode::IoError:
        return 500;
    default:
        return 400;
    }
}

nlohmann::json error_body(const Error& e)
{
    return {{"code", to_string(e.code())}, {"message", e.what()}, {"details", e.details()}};
}

namespace {

void send_json(httplib::Response& res, const nlohmann::json& body, int status = 200)
{
    res.status = status;
    res.set_content(canonical_dump(body), "application/json; charset=utf-8");
}

void send_png(httplib::Response& res, const std::vector<std::uint8_t>& bytes)
{
    res.status = 200;
    res.set_content(reinterpret_cast<const char*>(bytes.data()), bytes.size(), "image/png");
}

nlohmann::json parse_body(const httplib::Request& req)
{
    if (req.body.empty())
        return nlohmann::json::object();
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadCommand, std::string("request body is not valid JSON: ") + e.what());
    }
}

template <typename F>
httplib::Server::Handler guarded(F f)
{
    return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            send_json(res, error_body(e), http_status(e.code()));
        } catch (const std::exception& e) {
            send_json(res, {{"code", "InternalError"}, {"message", e.what()}, {"details", nlohmann::json::object()}}, 500);
        }
    };
}

} // namespace

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>())
{
    auto& svr = *server_;
    Service& api = service_;

    svr.Post("/sessions", guarded([&api](const httplib::Request&, httplib::Response& res) {
        send_json(res, {{"session_id", api.create_session()}}, 201);
    }));
    svr.Post(R"(/sessions/([^/]+)/images)", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        const auto* data = reinterpret_cast<const std::uint8_t*>(req.body.data());
        send_json(res, api.add_image(req.matches[1], std::span(data, req.body.size())), 201);
    }));
    svr.Get(R"(/sessions/([^/]+)/images/([^/]+)\.png)", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        send_png(res, api.image_png(req.matches[1], req.matches[2]));
    }));
    svr.Post(R"(/sessions/([^/]+)/tokens)", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        send_json(res, api.create_tokens(req.matches[1], parse_body(req)), 201);
    }));
    svr.Get(R"(/sessions/([^/]+)/tokens)", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        send_json(res, api.list_tokens(req.matches[1]));
    }));
    svr.Post(R"(/sessions/([^/]+)/tokens/([^/]+)/recolor)", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        send_json(res, api.recolor_token(req.matches[1], req.matches[2], parse_body(req)));
    }));
    svr.Get(R"(/sessions/([^/]+)/tokens/([^/]+)/thumbnail\.png)", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        send_png(res, api.token_thumbnail_png(req.matches[1], req.matches[2]));
    }));
    svr.Post(R"(/sessions/([^/]+)/lexicons)", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        send_json(res, {{"lexicon_id", api.create_lexicon(req.matches[1])}}, 201);
    }));
    svr.Post(R"(/sessions/([^/]+)/lexicons/([^/]+)/commands)", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        const auto r = api.command(req.matches[1], req.matches[2], parse_body(req));
        send_json(res, {{"revision", r.revision}, {"result", r.result}});
    }));
    svr.Get(R"(/sessions/([^/]+)/lexicons/([^/]+))", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        send_json(res, api.snapshot(req.matches[1], req.matches[2]));
    }));
    svr.Post(R"(/sessions/([^/]+)/lexicons/([^/]+)/validate)", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        send_json(res, api.validate(req.matches[1], req.matches[2]));
    }));
    svr.Post(R"(/sessions/([^/]+)/lexicons/([^/]+)/generate)", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        send_json(res, api.generate(req.matches[1], req.matches[2], parse_body(req)), 201);
    }));
    svr.Get(R"(/sessions/([^/]+)/history)", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        send_json(res, api.history(req.matches[1]));
    }));
    svr.Post(R"(/sessions/([^/]+)/history/([^/]+)/fork)", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        send_json(res, {{"lexicon_id", api.fork(req.matches[1], req.matches[2])}}, 201);
    }));
    svr.Get(R"(/artifacts/([^/]+)/([^/]+)\.png)", guarded([&api](const httplib::Request& req, httplib::Response& res) {
        send_png(res, api.artifact_png(req.matches[1], req.matches[2]));
    }));
}

HttpServer::~HttpServer()
{
    stop();
}

int HttpServer::bind(const std::string& host, int port)
{
    if (port == 0)
        return server_->bind_to_any_port(host);
    if (!server_->bind_to_port(host, port))
        throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::listen()
{
    server_->listen_after_bind();
}

int HttpServer::start(const std::string& host, int port)
{
    const int bound = bind(host, port);
    if (bound <= 0)
        throw Error(ErrorCode::IoError, "cannot bind " + host);
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void HttpServer::stop()
{
    if (server_)
        server_->stop();
    if (thread_.joinable())
        thread_.join();
}

} // namespace lexcraft
