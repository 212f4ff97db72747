#include "cli.hpp"

#include "lexcraft/bundle.hpp"
#include "lexcraft/canonical.hpp"
#include "lexcraft/compiler.hpp"
#include "lexcraft/error.hpp"
#include "lexcraft/renderer.hpp"
#include "lexcraft/service.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lexcraft::cli {

namespace {

std::uint64_t parse_seed(const std::string& text)
{
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(text, &used, 0);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw Error(ErrorCode::FormatError, "seed must be an integer (decimal or 0x-prefixed hex): " + text);
    return v;
}

std::string read_text(const std::string& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& file, const std::string& text)
{
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + file);
}

void print_diagnostics(const std::vector<Diagnostic>& diags, std::ostream& os)
{
    for (const auto& d : diags) {
        os << d.code;
        if (!d.ids.empty()) {
            os << ' ';
            for (std::size_t i = 0; i < d.ids.size(); ++i)
                os << (i ? "," : "") << d.ids[i];
        }
        os << ": " << d.message << '\n';
    }
}

void report(const Error& e, std::ostream& err)
{
    err << canonical_dump(error_body(e)) << '\n';
}

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::ValidationFailed:
    case ErrorCode::StrictWarnings:
        return kValidation;
    case ErrorCode::BackendError:
        return kBackend;
    case ErrorCode::InvalidK:
    case ErrorCode::InvalidGeometry:
        return kUsage;
    default:
        return kIo;
    }
}

int cmd_validate(const std::string& file, bool strict, std::ostream& out)
{
    const auto bundle = load_bundle(file);
    const auto diags = validate(bundle.lexicon, bundle.board);
    print_diagnostics(diags, out);
    for (const auto& d : diags)
        if (d.is_error() || strict)
            return kValidation;
    return kOk;
}

int cmd_compile(const std::string& file, const std::string& output, bool strict, std::ostream& out,
                std::ostream& err)
{
    const auto bundle = load_bundle(file);
    CompileOptions opts;
    opts.strict = strict;
    try {
        const auto plan = compile(bundle.lexicon, bundle.board, opts);
        if (output.empty() || output == "-")
            out << plan.serialize();
        else
            write_text(output, plan.serialize());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ValidationFailed && e.code() != ErrorCode::StrictWarnings)
            throw;
        print_diagnostics(validate(bundle.lexicon, bundle.board), err);
        throw;
    }
    return kOk;
}

int cmd_render(const std::string& plan_file, const std::string& board_path, const std::string& out_dir, int canvas,
               const std::string& seed, std::ostream& out)
{
    const auto plan = ExecutionPlan::parse(read_text(plan_file));
    const auto board = load_board(board_path);
    if (canvas < 64)
        throw Error(ErrorCode::InvalidGeometry, "canvas must be at least 64");
    CompositorBackend backend;
    try {
        const auto artifact = render(plan, board, backend, Canvas{canvas, canvas}, parse_seed(seed));
        export_artifact(artifact, out_dir);
        for (std::size_t i = 0; i < artifact.stages.size(); ++i)
            out << out_dir << '/' << stage_file_stem(i, artifact.stages[i].stage) << ".png\n";
    } catch (const BackendError& e) {
        if (!e.partial().stages.empty())
            export_artifact(e.partial(), out_dir);
        throw;
    }
    return kOk;
}

int cmd_colors(const std::string& file, int k, const std::string& seed, std::ostream& out)
{
    const Image img = read_png_file(file);
    const auto palette = kmeans_palette(img.pixels, k, parse_seed(seed));
    for (const auto& e : palette.entries()) {
        char weight[32];
        std::snprintf(weight, sizeof weight, "%.6f", e.weight);
        out << to_hex(e.color) << ' ' << weight << '\n';
    }
    return kOk;
}

int cmd_serve(const std::string& host, int port, std::ostream& out)
{
    Service service(config_from_env());
    HttpServer server(service);
    const int bound = server.bind(host, port);
    if (bound <= 0)
        throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
    out << "listening on http://" << host << ':' << bound << std::endl;
    server.listen();
    return kOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"lexcraft: compile and render visual lexicons"};
    app.require_subcommand(1);

    std::string input, output, board, seed = "0xB21C", backend = "compositor", host = "127.0.0.1";
    bool strict = false;
    int canvas = 1024, k = 5, port = 8787;

    auto* validate_cmd = app.add_subcommand("validate", "Print diagnostics for a lexicon bundle");
    validate_cmd->add_option("lexicon", input, "lexicon/1 bundle")->required();
    validate_cmd->add_flag("--strict", strict, "Treat warnings as errors");

    auto* compile_cmd = app.add_subcommand("compile", "Compile a lexicon bundle into a plan");
    compile_cmd->add_option("lexicon", input, "lexicon/1 bundle")->required();
    compile_cmd->add_option("-o,--output", output, "Plan file (stdout when omitted)");
    compile_cmd->add_flag("--strict", strict, "Treat warnings as errors");

    auto* render_cmd = app.add_subcommand("render", "Render a plan into stage images");
    render_cmd->add_option("plan", input, "plan.json")->required();
    render_cmd->add_option("--board", board, "Board directory or bundle")->required();
    render_cmd->add_option("-o,--output", output, "Output directory")->required();
    render_cmd->add_option("--canvas", canvas, "Square canvas size in pixels");
    render_cmd->add_option("--seed", seed, "Render seed");
    render_cmd->add_option("--backend", backend, "Generative backend")->check(CLI::IsMember({"compositor"}));

    auto* colors_cmd = app.add_subcommand("colors", "Extract a weighted palette from a PNG");
    colors_cmd->add_option("image", input, "PNG file")->required();
    colors_cmd->add_option("--k", k, "Maximum number of colours");
    colors_cmd->add_option("--seed", seed, "Clustering seed");

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    serve_cmd->add_option("--port", port, "TCP port (0 picks a free one)");
    serve_cmd->add_option("--host", host, "Bind address");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*validate_cmd)
            return cmd_validate(input, strict, out);
        if (*compile_cmd)
            return cmd_compile(input, output, strict, out, err);
        if (*render_cmd)
            return cmd_render(input, board, output, canvas, seed, out);
        if (*colors_cmd)
            return cmd_colors(input, k, seed, out);
        if (*serve_cmd)
            return cmd_serve(host, port, out);
    } catch (const Error& e) {
        report(e, err);
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << canonical_dump({{"code", "IoError"}, {"message", e.what()}, {"details", nlohmann::json::object()}})
            << '\n';
        return kIo;
    }
    return kUsage;
}

} // namespace lexcraft::cli
