#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lordd/adapters/adapter_set.hpp"
#include "lordd/adapters/checkpoint.hpp"
#include "lordd/corpus/conversation.hpp"
#include "lordd/corpus/prompt.hpp"
#include "lordd/lm/tiny_decoder.hpp"
#include "lordd/training/losses.hpp"

namespace lordd::training {

struct TaskTrainConfig {
    int epochs = 20;
    int batch_size = 32;
    double learning_rate = 2e-4;
    std::string optimizer_id = "adamw-paged-8bit";
    double weight_decay = 0.0;
    std::uint64_t seed = 13;

    void validate() const;
    std::string canonical() const;
};

struct DialectTrainConfig {
    int epochs = 10;
    int batch_size = 8;
    double learning_rate = 2e-5;
    double margin = 0.25;
    double weight_decay = 0.0;
    std::uint64_t seed = 13;

    void validate() const;
    std::string canonical() const;
};

struct EpochMetrics {
    int epoch = 0;
    std::string split;
    double loss = 0.0;
    double wall_seconds = 0.0;
};

struct TrainOutcome {
    adapters::AdapterCheckpoint best;
    int best_epoch = 0;
    std::vector<EpochMetrics> metrics;
};

// Called once per epoch and split as soon as the value is known.
using MetricsSink = std::function<void(const EpochMetrics&)>;

// Prompt tokens x followed by the answer tokens t = target word + end marker.
struct TaskInstance {
    std::string id;
    lm::TokenSequence tokens;
    TargetSpan span;
};

template <typename Scalar>
TaskInstance make_task_instance(const lm::LanguageModel<Scalar>& model, const corpus::MaskedExample& ex,
                                const corpus::PromptTemplate& tmpl);

// Minimizes the target-word NLL over `train` with AdamW on the task set of
// `stack`. The dialect set, if present, must be frozen; it stays active.
// Returns the checkpoint with the lowest validation loss (training loss when
// `valid` is empty) and leaves those weights loaded.
template <typename Scalar>
TrainOutcome train_task(lm::TinyDecoder<Scalar>& model, adapters::AdapterStack<Scalar>& stack,
                        std::span<const corpus::MaskedExample> train, std::span<const corpus::MaskedExample> valid,
                        const corpus::PromptTemplate& tmpl, const TaskTrainConfig& cfg,
                        const MetricsSink& sink = {});

// Contrastive training of the dialect set. The frozen-side representation is
// taken with every adapter disabled; the focus side runs with the dialect set.
// `examples` must contain every id the pairs reference.
template <typename Scalar>
TrainOutcome train_dialect(lm::TinyDecoder<Scalar>& model, adapters::AdapterSet<Scalar>& dialect,
                           std::span<const corpus::ContrastivePair> train_pairs,
                           std::span<const corpus::ContrastivePair> valid_pairs,
                           std::span<const corpus::MaskedExample> examples, const corpus::PromptTemplate& tmpl,
                           const DialectTrainConfig& cfg, const MetricsSink& sink = {});

void write_metrics(const std::filesystem::path& path, std::span<const EpochMetrics> metrics);

}  // namespace lordd::training
