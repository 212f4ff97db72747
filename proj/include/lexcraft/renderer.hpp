#pragma once

#include "lexcraft/compiler.hpp"
#include "lexcraft/error.hpp"
#include "lexcraft/image.hpp"
#include "lexcraft/moodboard.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lexcraft {

struct Canvas {
    int width = 1024;
    int height = 1024;
};

struct StageOutput {
    Image image;
    nlohmann::json metadata = nlohmann::json::object();
};

struct LayoutOutput {
    Image image;
    std::vector<Mask> masks;  // one canvas-sized mask per placement, in placement order
    nlohmann::json metadata = nlohmann::json::object();
};

/// Seam for the generative models. Each operation is handed the previous
/// stage's output; the renderer guarantees plan order.
class GenerativeBackend {
public:
    virtual ~GenerativeBackend() = default;
    virtual std::string name() const = 0;
    virtual LayoutOutput compose_layout(const LayoutStage& layout, const MoodBoard& board, Canvas canvas,
                                        std::uint64_t seed) = 0;
    virtual StageOutput apply_style(const Image& image, const StyleStage& style, const MoodBoard& board,
                                    std::uint64_t seed) = 0;
    virtual StageOutput apply_global_colors(const Image& image, const GlobalColorStage& stage, std::uint64_t seed) = 0;
    virtual StageOutput apply_local_colors(const Image& image, std::span<const Mask> masks,
                                           const LocalColorStage& stage, std::uint64_t seed) = 0;
};

/// Deterministic default: composites masked subject crops onto a white canvas,
/// leaves style untouched and recolours by proportional palette quantization.
class CompositorBackend : public GenerativeBackend {
public:
    std::string name() const override { return "compositor"; }
    LayoutOutput compose_layout(const LayoutStage& layout, const MoodBoard& board, Canvas canvas,
                                std::uint64_t seed) override;
    StageOutput apply_style(const Image& image, const StyleStage& style, const MoodBoard& board,
                            std::uint64_t seed) override;
    StageOutput apply_global_colors(const Image& image, const GlobalColorStage& stage, std::uint64_t seed) override;
    StageOutput apply_local_colors(const Image& image, std::span<const Mask> masks, const LocalColorStage& stage,
                                   std::uint64_t seed) override;
};

struct StageRecord {
    StageKind stage = StageKind::Layout;
    Image image;
    double millis = 0.0;
    nlohmann::json metadata = nlohmann::json::object();
};

struct RenderArtifact {
    std::string plan_hash;
    std::string backend;
    Canvas canvas;
    std::uint64_t seed = 0;
    std::vector<StageRecord> stages;  // one per executed stage, in order
    std::vector<Mask> masks;          // subject masks from the layout stage

    const Image& final_image() const { return stages.back().image; }
    /// artifact.json content.
    nlohmann::json to_json() const;
};

/// "stage_<index>_<kind>", e.g. stage_0_layout.
std::string stage_file_stem(std::size_t index, StageKind kind);

/// Stage failure. Carries everything produced before the failing stage.
class BackendError : public Error {
public:
    BackendError(StageKind stage, const std::string& message, RenderArtifact partial);

    StageKind stage() const { return stage_; }
    const RenderArtifact& partial() const { return partial_; }

private:
    StageKind stage_;
    RenderArtifact partial_;
};

/// Step-wise executor that only admits stages in plan order. Out-of-order or
/// repeated stages throw BackendError.
class StageRunner {
public:
    StageRunner(const ExecutionPlan& plan, const MoodBoard& board, GenerativeBackend& backend, Canvas canvas,
                std::uint64_t seed);

    /// Next stage the plan expects, if any.
    std::optional<StageKind> pending() const;
    void run(StageKind stage);
    void run_all();

    const RenderArtifact& artifact() const { return artifact_; }
    RenderArtifact take() { return std::move(artifact_); }

private:
    const ExecutionPlan& plan_;
    const MoodBoard& board_;
    GenerativeBackend& backend_;
    std::vector<StageKind> sequence_;
    std::size_t next_ = 0;
    RenderArtifact artifact_;
};

/// Runs every plan stage through the backend. Canvas sides must be >= 64.
RenderArtifact render(const ExecutionPlan& plan, const MoodBoard& board, GenerativeBackend& backend,
                      Canvas canvas = {}, std::uint64_t seed = kDefaultSeed);

/// Writes stage_<i>_<kind>.png files, final.png and artifact.json into dir.
void export_artifact(const RenderArtifact& artifact, const std::string& dir);

} // namespace lexcraft
