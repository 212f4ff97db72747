#pragma once

#include "lexcraft/history.hpp"
#include "lexcraft/lexicon.hpp"
#include "lexcraft/moodboard.hpp"
#include "lexcraft/renderer.hpp"

#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace lexcraft {

struct ServiceConfig {
    /// Persistence root: history/<session>.ndjson and artifacts/<id>/*.png.
    std::optional<std::filesystem::path> data_dir;
};

/// Reads LEXCRAFT_DATA_DIR.
ServiceConfig config_from_env();

/// Transport-independent facade over the engine. Every method throws
/// lexcraft::Error; HttpServer maps those to status codes.
///
/// Sessions are independent. Within a session the mood board takes a
/// reader/writer lock and every lexicon has its own mutex, so commands on one
/// lexicon apply one at a time.
class Service {
public:
    explicit Service(ServiceConfig config = {});
    ~Service();

    std::string create_session();

    nlohmann::json add_image(const std::string& session, std::span<const std::uint8_t> png_bytes);
    std::vector<std::uint8_t> image_png(const std::string& session, const std::string& image_id);
    /// body: {kind: subject|colors:auto|color:manual|style|concept, args: {...}}
    nlohmann::json create_tokens(const std::string& session, const nlohmann::json& body);
    nlohmann::json recolor_token(const std::string& session, const std::string& token_id, const nlohmann::json& body);
    nlohmann::json list_tokens(const std::string& session);
    std::vector<std::uint8_t> token_thumbnail_png(const std::string& session, const std::string& token_id);

    std::string create_lexicon(const std::string& session);
    CommandResult command(const std::string& session, const std::string& lexicon, const nlohmann::json& envelope);
    nlohmann::json snapshot(const std::string& session, const std::string& lexicon);
    nlohmann::json validate(const std::string& session, const std::string& lexicon);
    /// body: {canvas: n | {width, height}, seed, strict}; compile + render + record.
    nlohmann::json generate(const std::string& session, const std::string& lexicon, const nlohmann::json& body);

    nlohmann::json history(const std::string& session);
    std::string fork(const std::string& session, const std::string& entry_id);

    /// stage is "final" or a stage file stem such as "stage_0_layout".
    std::vector<std::uint8_t> artifact_png(const std::string& artifact_id, const std::string& stage);

private:
    struct LiveLexicon {
        std::mutex mutex;
        VisualLexicon doc;
    };
    struct Session {
        Session(std::string id, const ServiceConfig& config);
        std::string id;
        std::shared_mutex board_mutex;
        MoodBoard board;
        std::mutex lexicons_mutex;
        std::map<std::string, std::shared_ptr<LiveLexicon>> lexicons;
        std::uint64_t next_lexicon = 1;
        std::uint64_t next_artifact = 1;
        History history;
    };
    struct StoredArtifact {
        std::map<std::string, std::vector<std::uint8_t>> pngs;
        nlohmann::json metadata;
    };

    std::shared_ptr<Session> session(const std::string& id);
    std::shared_ptr<LiveLexicon> live(Session& s, const std::string& lexicon_id);
    std::string add_lexicon(Session& s, const std::optional<std::string>& fork_from);

    ServiceConfig config_;
    std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::mutex artifacts_mutex_;
    std::map<std::string, std::shared_ptr<const StoredArtifact>> artifacts_;
};

/// HTTP binding of Service. All bodies are canonical JSON except image
/// uploads and downloads (PNG). Errors come back as {code, message, details}.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    /// Binds host:port (0 picks a free port) and returns the bound port.
    int bind(const std::string& host, int port);
    /// Blocks serving requests until stop().
    void listen();
    /// bind + listen on a background thread.
    int start(const std::string& host, int port);
    void stop();

private:
    Service& service_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

int http_status(ErrorCode code);
nlohmann::json error_body(const Error& e);

} // namespace lexcraft
