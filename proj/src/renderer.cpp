#include "lexcraft/renderer.hpp"

#include "lexcraft/canonical.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

namespace lexcraft {

namespace {

constexpr int kMinCanvas = 64;

nlohmann::json report_json(const QuantizeReport& r)
{
    auto achieved = nlohmann::json::array();
    for (double a : r.achieved)
        achieved.push_back(a);
    return {{"achieved", achieved}, {"passes", r.passes}, {"max_deviation", r.max_deviation}};
}

} // namespace

LayoutOutput CompositorBackend::compose_layout(const LayoutStage& layout, const MoodBoard& board, Canvas canvas,
                                               std::uint64_t)
{
    LayoutOutput out;
    out.image = Image(canvas.width, canvas.height, {255, 255, 255});
    auto placed = nlohmann::json::array();
    for (const auto& p : layout.placements) {
        const SourceToken& token = board.token(p.source_token);
        const auto* subject = std::get_if<SubjectPayload>(&token.payload);
        if (!subject)
            throw Error(ErrorCode::KindMismatch, "placement source " + p.source_token + " is not a subject token");
        const Image& source = board.image(subject->image_id);
        const PixelRect src_box = subject->bbox.to_pixels(source.width, source.height);
        const PixelRect dst = p.bbox.to_pixels(canvas.width, canvas.height);
        const Image scaled = resize_bilinear(crop(source, src_box), dst.width(), dst.height());
        const Mask scaled_mask = resize_nearest(subject->mask, dst.width(), dst.height());

        Mask mask(canvas.width, canvas.height);
        for (int y = 0; y < dst.height(); ++y)
            for (int x = 0; x < dst.width(); ++x) {
                if (!scaled_mask.at(x, y))
                    continue;
                const int cx = dst.x0 + x, cy = dst.y0 + y;
                out.image.at(cx, cy) = scaled.at(x, y);
                mask.set(cx, cy, true);
                for (auto& earlier : out.masks)
                    earlier.set(cx, cy, false);
            }
        out.masks.push_back(std::move(mask));
        placed.push_back({{"instance_id", p.instance_id}, {"prompt", p.prompt},
                          {"pixels", {dst.x0, dst.y0, dst.x1, dst.y1}}});
    }
    out.metadata = {{"background_prompt", layout.background_prompt}, {"placements", placed}};
    return out;
}

StageOutput CompositorBackend::apply_style(const Image& image, const StyleStage& style, const MoodBoard&, std::uint64_t)
{
    auto entries = nlohmann::json::array();
    for (const auto& e : style.entries)
        entries.push_back({{"style_token", e.style_token}, {"weight", e.weight}});
    return {image, {{"entries", entries}, {"effect", "identity"}}};
}

StageOutput CompositorBackend::apply_global_colors(const Image& image, const GlobalColorStage& stage, std::uint64_t)
{
    QuantizeReport r = quantize_report(image, stage.palette, QuantizeMode::Proportional);
    auto meta = report_json(r);
    meta["palette"] = stage.palette.to_json();
    return {std::move(r.image), std::move(meta)};
}

StageOutput CompositorBackend::apply_local_colors(const Image& image, std::span<const Mask> masks,
                                                  const LocalColorStage& stage, std::uint64_t)
{
    StageOutput out{image, {}};
    auto entries = nlohmann::json::array();
    for (const auto& e : stage.entries) {
        if (e.placement_index >= masks.size())
            throw Error(ErrorCode::DimensionMismatch, "no subject mask for placement " + std::to_string(e.placement_index));
        QuantizeReport r = quantize_report(out.image, e.palette, QuantizeMode::Proportional, &masks[e.placement_index]);
        out.image = std::move(r.image);
        auto meta = report_json(r);
        meta["instance_id"] = e.instance_id;
        entries.push_back(std::move(meta));
    }
    out.metadata = {{"entries", entries}};
    return out;
}

nlohmann::json RenderArtifact::to_json() const
{
    auto stage_list = nlohmann::json::array();
    for (std::size_t i = 0; i < stages.size(); ++i)
        stage_list.push_back({{"index", i},
                              {"stage", to_string(stages[i].stage)},
                              {"file", stage_file_stem(i, stages[i].stage) + ".png"},
                              {"image_hash", content_hash(stages[i].image)},
                              {"millis", stages[i].millis},
                              {"metadata", stages[i].metadata}});
    auto mask_hashes = nlohmann::json::array();
    for (const auto& m : masks)
        mask_hashes.push_back(mask_hash(m));
    return {{"plan_hash", plan_hash},
            {"backend", backend},
            {"canvas", {{"width", canvas.width}, {"height", canvas.height}}},
            {"seed", seed},
            {"stages", stage_list},
            {"mask_hashes", mask_hashes},
            {"final", "final.png"}};
}

std::string stage_file_stem(std::size_t index, StageKind kind)
{
    return "stage_" + std::to_string(index) + "_" + std::string(to_string(kind));
}

BackendError::BackendError(StageKind stage, const std::string& message, RenderArtifact partial)
    : Error(ErrorCode::BackendError, message, {{"stage", to_string(stage)}}), stage_(stage), partial_(std::move(partial))
{
}

StageRunner::StageRunner(const ExecutionPlan& plan, const MoodBoard& board, GenerativeBackend& backend, Canvas canvas,
                         std::uint64_t seed)
    : plan_(plan), board_(board), backend_(backend), sequence_(plan.stage_sequence())
{
    if (canvas.width < kMinCanvas || canvas.height < kMinCanvas)
        throw Error(ErrorCode::InvalidGeometry, "canvas must be at least 64x64");
    artifact_.plan_hash = plan.hash();
    artifact_.backend = backend.name();
    artifact_.canvas = canvas;
    artifact_.seed = seed;
}

std::optional<StageKind> StageRunner::pending() const
{
    if (next_ < sequence_.size())
        return sequence_[next_];
    return std::nullopt;
}

void StageRunner::run(StageKind stage)
{
    if (next_ >= sequence_.size() || sequence_[next_] != stage) {
        const std::string expected = next_ < sequence_.size() ? std::string(to_string(sequence_[next_])) : "none";
        throw BackendError(stage, "stage " + std::string(to_string(stage)) + " requested out of plan order (expected " +
                                      expected + ")",
                           artifact_);
    }

    const auto start = std::chrono::steady_clock::now();
    StageRecord record;
    record.stage = stage;
    try {
        switch (stage) {
        case StageKind::Layout: {
            LayoutOutput out = backend_.compose_layout(plan_.layout, board_, artifact_.canvas, artifact_.seed);
            if (out.masks.size() != plan_.layout.placements.size())
                throw Error(ErrorCode::BackendError, "layout returned the wrong number of subject masks");
            record.image = std::move(out.image);
            record.metadata = std::move(out.metadata);
            artifact_.masks = std::move(out.masks);
            break;
        }
        case StageKind::Style: {
            StageOutput out = backend_.apply_style(artifact_.final_image(), *plan_.style, board_, artifact_.seed);
            record.image = std::move(out.image);
            record.metadata = std::move(out.metadata);
            break;
        }
        case StageKind::GlobalColor: {
            StageOutput out = backend_.apply_global_colors(artifact_.final_image(), *plan_.global_color, artifact_.seed);
            record.image = std::move(out.image);
            record.metadata = std::move(out.metadata);
            break;
        }
        case StageKind::LocalColor: {
            StageOutput out = backend_.apply_local_colors(artifact_.final_image(), artifact_.masks, *plan_.local_color,
                                                          artifact_.seed);
            record.image = std::move(out.image);
            record.metadata = std::move(out.metadata);
            break;
        }
        }
        if (record.image.width != artifact_.canvas.width || record.image.height != artifact_.canvas.height)
            throw Error(ErrorCode::BackendError, "stage produced an image of the wrong size");
    } catch (const BackendError&) {
        throw;
    } catch (const std::exception& e) {
        throw BackendError(stage, "stage " + std::string(to_string(stage)) + " failed: " + e.what(), artifact_);
    }
    record.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    artifact_.stages.push_back(std::move(record));
    ++next_;
}

void StageRunner::run_all()
{
    while (auto stage = pending())
        run(*stage);
}

RenderArtifact render(const ExecutionPlan& plan, const MoodBoard& board, GenerativeBackend& backend, Canvas canvas,
                      std::uint64_t seed)
{
    StageRunner runner(plan, board, backend, canvas, seed);
    runner.run_all();
    return runner.take();
}

void export_artifact(const RenderArtifact& artifact, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    const std::filesystem::path root(dir);
    for (std::size_t i = 0; i < artifact.stages.size(); ++i)
        write_png_file((root / (stage_file_stem(i, artifact.stages[i].stage) + ".png")).string(), artifact.stages[i].image);
    write_png_file((root / "final.png").string(), artifact.final_image());
    std::ofstream out(root / "artifact.json", std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + (root / "artifact.json").string());
    out << canonical_dump(artifact.to_json()) << "\n";
}

} // namespace lexcraft
