#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgs/graphrepr.hpp"
#include "sgs/layout.hpp"
#include "sgs/losses.hpp"
#include "sgs/metrics.hpp"
#include "sgs/network.hpp"

namespace sgs {

/// k: photo -> sketch, o: sketch -> photo.
enum class Direction { PhotoToSketch, SketchToPhoto };

std::string direction_tag(Direction direction);
/// Accepts "k", "o", "photo2sketch" and "sketch2photo".
Direction parse_direction(const std::string& text);
Direction opposite(Direction direction);

struct TrainConfig {
    int epochs = 40;
    double lr = 0.0002;
    double beta1 = 0.5;
    double beta2 = 0.999;
    std::size_t batch_size = 1;
    LossWeights weights;
    std::uint64_t seed = 7;
    std::size_t image_size = 64;
    std::size_t depth = 5;
    bool use_saliency = true;
    std::size_t base_channels = 8;
    std::size_t max_channels = 64;
    std::size_t si_hidden = 32;
    std::size_t disc_channels = 8;
    NormKind norm = NormKind::Instance;
    GanMode gan = GanMode::SigmoidCrossEntropy;
    VarianceMode variance = VarianceMode::Literal;
    std::size_t iterations = 4;                     // T
    std::vector<std::size_t> ict_taps{0, 1, 2, 3, 4};
    std::uint64_t extractor_seed = 1001;
    std::uint64_t parsing_seed = 2002;
    double parsing_sharpness = 4.0;

    /// Throws ConfigError naming the first offending field.
    void validate() const;
    /// Network shape for one direction; weights are seeded per stage.
    NetworkConfig network(Direction direction, std::size_t stage) const;
};

std::string train_config_to_json(const TrainConfig& config);

/// One direction's view of a paired sample.
struct DirectedSample {
    const Tensor* source;
    const SaliencyMap* source_saliency;
    const SemanticLayout* source_layout;
    const Tensor* target;
    const SaliencyMap* target_saliency;
    const SemanticLayout* target_layout;
};

DirectedSample directed(const PairedSample& sample, Direction direction);

/// Sum over the selected taps of the mean absolute difference between the
/// frozen generator's features of `real` and of `fake`. The `real` branch is
/// computed without gradient. Throws ConfigError unless exactly five taps are
/// selected and all exist.
Tensor ict_loss(const Generator& frozen, const Tensor& real, const Tensor& fake, const Tensor& saliency,
                const SemanticLayout& layout, const std::vector<std::size_t>& taps);

struct CorpusSplit {
    std::vector<PairedSample> train;
    std::vector<PairedSample> validation;
};

/// The last `val_count` samples validate when the corpus is larger than
/// that; otherwise the whole corpus serves as both sets.
CorpusSplit split_corpus(std::vector<PairedSample> samples, std::size_t val_count = 8);

/// Fixed loss networks shared by every stage of a run.
struct LossNetworks {
    FeatureExtractor extractor_photo;
    FeatureExtractor extractor_sketch;
    ParsingOracle parsing_photo;
    ParsingOracle parsing_sketch;

    explicit LossNetworks(const TrainConfig& config);
    const FeatureExtractor& extractor(Direction direction) const;
    const ParsingOracle& parsing(Direction direction) const;
};

/// SSIM, FSIM and the Fréchet proxy of a generator over `samples`. The
/// proxy compares extractor embeddings of real and synthesized targets.
MetricReport evaluate(const Generator& generator, Direction direction, const std::vector<PairedSample>& samples,
                      const FeatureExtractor& extractor);

struct CheckpointMetrics {
    double frechet = 0.0;
    double ssim = 0.0;
    double fsim = 0.0;
};

struct Checkpoint {
    std::size_t stage = 0;
    Direction direction = Direction::PhotoToSketch;
    std::filesystem::path dir;
    std::string digest;                         // FNV-1a of model.bin
    std::optional<CheckpointMetrics> metrics;
};

struct StageResult {
    Checkpoint checkpoint;
    std::shared_ptr<Generator> generator;
    std::vector<double> epoch_total;            // epoch-mean generator objective
    std::vector<double> epoch_ict;              // epoch-mean unweighted ICT term
    std::vector<double> epoch_d;                // epoch-mean discriminator loss
    MetricReport report;
    // Digests of the frozen opposite generator around the stage (empty at stage 0).
    std::string frozen_before;
    std::string frozen_after;
    bool frozen_bit_identical = true;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Trains one direction from scratch. With `frozen` set, the ICT term is
/// active. Writes model.bin, model.json, losses.csv, epochs.csv,
/// val_metrics.json and val_per_sample.csv to `run_dir`/stage<i>_<dir>.
StageResult train_stage(const TrainConfig& config, const LossNetworks& nets, Direction direction, std::size_t stage,
                        const CorpusSplit& data, const Generator* frozen, const std::filesystem::path& run_dir,
                        const ProgressFn& progress = {});

struct StagePair {
    StageResult photo_to_sketch;
    StageResult sketch_to_photo;
};

/// Both directions at stage 0, without the ICT term.
StagePair train_stage0(const TrainConfig& config, const CorpusSplit& data, const std::filesystem::path& run_dir,
                       const ProgressFn& progress = {});

/// Restores a finished stage from its checkpoint directory. Throws DataError
/// if the checkpoint or its metrics are missing.
StageResult load_stage(const TrainConfig& config, Direction direction, std::size_t stage,
                       const std::filesystem::path& run_dir);

/// Stage 0, then T alternating stages per direction, each trained from
/// scratch against the opposite direction's previous stage. With
/// `reuse_stage0`, stage 0 is loaded from `run_dir` instead of trained.
/// Writes run.json describing every checkpoint.
std::vector<StageResult> run_iterative(const TrainConfig& config, const CorpusSplit& data,
                                       const std::filesystem::path& run_dir, bool reuse_stage0 = false,
                                       const ProgressFn& progress = {});

/// Lowest Fréchet proxy, ties broken by higher SSIM, then by earlier stage.
/// Throws ConfigError on an empty list or a checkpoint without metrics.
Checkpoint select_optimal(const std::vector<Checkpoint>& checkpoints);

/// FNV-1a 64-bit digest of a byte range or file, as 16 hex digits.
std::string digest_bytes(const void* data, std::size_t size);
std::string digest_file(const std::filesystem::path& path);

}  // namespace sgs
