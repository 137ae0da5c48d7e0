#include "lordd/training/trainers.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <unordered_map>

#include <json.hpp>

#include "lordd/error.hpp"
#include "lordd/rng.hpp"
#include "lordd/text.hpp"
#include "lordd/training/optimizer.hpp"

namespace lordd::training {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename Scalar>
std::vector<ParamRef<Scalar>> trainable_params(adapters::AdapterSet<Scalar>& set) {
    std::vector<ParamRef<Scalar>> out;
    for (auto* a : set.entries()) {
        if (!a->trainable) continue;
        out.push_back({&a->A, &a->grad_A});
        out.push_back({&a->B, &a->grad_B});
    }
    return out;
}

// Visits batches of indices in a seeded per-epoch order.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, int batch_size, Rng& rng) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t i = 0; i < n; i += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(n, i + static_cast<std::size_t>(batch_size));
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

// Sum in index order so the epoch loss does not depend on batch order.
double ordered_mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

void check_finite(double loss, const std::string& stage, int epoch, const std::string& id) {
    if (!std::isfinite(loss)) {
        throw NumericError(stage + ": non-finite loss at epoch " + std::to_string(epoch) + " on example " + id);
    }
}

void emit(TrainOutcome& out, const MetricsSink& sink, EpochMetrics m) {
    out.metrics.push_back(m);
    if (sink) sink(m);
}

template <typename Scalar>
double task_example(lm::TinyDecoder<Scalar>& model, const TaskInstance& inst, Scalar grad_scale, bool with_grad) {
    const std::span<const lm::TokenId> input(inst.tokens.data(), inst.tokens.size() - 1);
    if (!with_grad) {
        const auto out = model.forward(input);
        return static_cast<double>(target_nll(out.logits, inst.tokens, inst.span));
    }
    const auto cache = model.forward_with_cache(input);
    Matrix<Scalar> dlogits;
    const Scalar nll = target_nll(cache.logits, inst.tokens, inst.span, &dlogits, grad_scale);
    model.backward(cache, dlogits, Matrix<Scalar>());
    return static_cast<double>(nll);
}

}  // namespace

void TaskTrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("task epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("task batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("task learning_rate must be > 0");
    if (weight_decay < 0.0) throw ConfigError("task weight_decay must be >= 0");
}

std::string TaskTrainConfig::canonical() const {
    return "task;epochs=" + std::to_string(epochs) + ";batch_size=" + std::to_string(batch_size) +
           ";learning_rate=" + exact(learning_rate) + ";optimizer_id=" + optimizer_id +
           ";weight_decay=" + exact(weight_decay) + ";seed=" + std::to_string(seed);
}

void DialectTrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("dialect epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("dialect batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("dialect learning_rate must be > 0");
    if (!(margin >= 0.0 && margin < 1.0)) throw ConfigError("dialect margin must lie in [0, 1)");
    if (weight_decay < 0.0) throw ConfigError("dialect weight_decay must be >= 0");
}

std::string DialectTrainConfig::canonical() const {
    return "dialect;epochs=" + std::to_string(epochs) + ";batch_size=" + std::to_string(batch_size) +
           ";learning_rate=" + exact(learning_rate) + ";margin=" + exact(margin) +
           ";weight_decay=" + exact(weight_decay) + ";seed=" + std::to_string(seed);
}

template <typename Scalar>
TaskInstance make_task_instance(const lm::LanguageModel<Scalar>& model, const corpus::MaskedExample& ex,
                                const corpus::PromptTemplate& tmpl) {
    TaskInstance inst;
    inst.id = ex.source_id;
    inst.tokens = model.tokenize(corpus::render_prompt(ex, tmpl));
    const std::size_t prompt_len = inst.tokens.size();
    const lm::TokenSequence answer = model.tokenize(ex.target_word);
    if (answer.empty()) throw ArgumentError("example " + ex.source_id + ": empty target");
    inst.tokens.insert(inst.tokens.end(), answer.begin(), answer.end());
    inst.tokens.push_back(model.descriptor().end_token_id);
    inst.span = {prompt_len + 1, inst.tokens.size()};
    if (inst.tokens.size() - 1 > static_cast<std::size_t>(model.descriptor().context_len)) {
        throw ContextError("example " + ex.source_id + ": " + std::to_string(inst.tokens.size()) +
                           " tokens do not fit the context of " + std::to_string(model.descriptor().context_len));
    }
    return inst;
}

template <typename Scalar>
TrainOutcome train_task(lm::TinyDecoder<Scalar>& model, adapters::AdapterStack<Scalar>& stack,
                        std::span<const corpus::MaskedExample> train, std::span<const corpus::MaskedExample> valid,
                        const corpus::PromptTemplate& tmpl, const TaskTrainConfig& cfg, const MetricsSink& sink) {
    cfg.validate();
    if (train.empty()) throw ArgumentError("train_task: empty dataset");
    if (stack.task.host() != &model.linear_layers()) throw ArgumentError("train_task: stack is on another backend");
    if (stack.dialect && stack.dialect->trainable()) {
        throw ArgumentError("train_task: the dialect set must be frozen during task training");
    }
    model.set_role_enabled(adapters::AdapterRole::task, true);
    if (stack.dialect) model.set_role_enabled(adapters::AdapterRole::dialect, true);

    std::vector<TaskInstance> train_set, valid_set;
    for (const auto& ex : train) train_set.push_back(make_task_instance(model, ex, tmpl));
    for (const auto& ex : valid) valid_set.push_back(make_task_instance(model, ex, tmpl));

    auto params = trainable_params(stack.task);
    const bool learning = !params.empty();
    AdamW<Scalar> opt({cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.weight_decay});
    Rng rng(cfg.seed);

    TrainOutcome out;
    double best = std::numeric_limits<double>::infinity();
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = Clock::now();
        std::vector<double> losses(train_set.size());
        for (const auto& batch : make_batches(train_set.size(), cfg.batch_size, rng)) {
            stack.task.zero_grad();
            const Scalar scale = Scalar(1) / static_cast<Scalar>(batch.size());
            for (std::size_t idx : batch) {
                losses[idx] = task_example(model, train_set[idx], scale, learning);
                check_finite(losses[idx], "train_task", epoch, train_set[idx].id);
            }
            if (learning) opt.step(params);
        }
        const double train_loss = ordered_mean(losses);
        emit(out, sink, {epoch, "train", train_loss, seconds_since(t0)});

        double select = train_loss;
        if (!valid_set.empty()) {
            const auto v0 = Clock::now();
            std::vector<double> vl(valid_set.size());
            for (std::size_t i = 0; i < valid_set.size(); ++i) vl[i] = task_example(model, valid_set[i], Scalar(1), false);
            select = ordered_mean(vl);
            check_finite(select, "train_task", epoch, "validation");
            emit(out, sink, {epoch, "valid", select, seconds_since(v0)});
        }
        if (select < best) {
            best = select;
            out.best_epoch = epoch;
            out.best = adapters::snapshot(stack.task);
        }
    }
    adapters::restore(stack.task, out.best);
    stack.task.zero_grad();

    out.best.stack_order = stack.order_string();
    out.best.config_digest = text::git_blob_digest(cfg.canonical());
    out.best.metadata["optimizer"] = "adamw";
    out.best.metadata["optimizer_requested"] = cfg.optimizer_id;
    out.best.metadata["best_epoch"] = std::to_string(out.best_epoch);
    out.best.metadata["selection"] = valid_set.empty() ? "train_loss" : "valid_loss";
    return out;
}

template <typename Scalar>
TrainOutcome train_dialect(lm::TinyDecoder<Scalar>& model, adapters::AdapterSet<Scalar>& dialect,
                           std::span<const corpus::ContrastivePair> train_pairs,
                           std::span<const corpus::ContrastivePair> valid_pairs,
                           std::span<const corpus::MaskedExample> examples, const corpus::PromptTemplate& tmpl,
                           const DialectTrainConfig& cfg, const MetricsSink& sink) {
    using adapters::AdapterRole;
    cfg.validate();
    if (train_pairs.empty()) throw ArgumentError("train_dialect: no training pairs");
    if (dialect.host() != &model.linear_layers()) throw ArgumentError("train_dialect: set is on another backend");
    if (dialect.role() != AdapterRole::dialect) throw ArgumentError("train_dialect: expected the dialect set");
    if (!dialect.trainable()) throw ArgumentError("train_dialect: the dialect set must be trainable");
    for (const auto& l : model.linear_layers()) {
        if (l.slot(AdapterRole::task)) throw ArgumentError("train_dialect: a task set must not be active");
    }
    model.set_role_enabled(AdapterRole::dialect, true);

    std::unordered_map<std::string, const corpus::MaskedExample*> by_id;
    for (const auto& ex : examples) {
        if (!by_id.emplace(ex.source_id, &ex).second) {
            throw ArgumentError("train_dialect: duplicate example id " + ex.source_id);
        }
    }
    const lm::TokenId mask_id = model.descriptor().mask_token_id;
    std::unordered_map<std::string, lm::TokenSequence> tokens;
    std::unordered_map<std::string, std::size_t> mask_pos;
    auto prepare = [&](const std::string& id) {
        if (tokens.contains(id)) return;
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw ArgumentError("train_dialect: pair references missing example " + id);
        tokens[id] = model.tokenize(corpus::render_prompt(*it->second, tmpl));
        mask_pos[id] = lm::mask_position(tokens[id], mask_id);
    };
    for (const auto* pairs : {&train_pairs, &valid_pairs}) {
        for (const auto& p : *pairs) {
            prepare(p.us_id);
            prepare(p.x_id);
        }
    }

    // Frozen side: pristine base, computed once.
    std::unordered_map<std::string, Vector<Scalar>> frozen;
    {
        lm::AdaptersDisabled<Scalar> off(model);
        for (const auto* pairs : {&train_pairs, &valid_pairs}) {
            for (const auto& p : *pairs) {
                if (!frozen.contains(p.us_id)) frozen[p.us_id] = lm::mask_representation<Scalar>(model, tokens[p.us_id]);
            }
        }
    }

    const auto margin = static_cast<Scalar>(cfg.margin);
    auto pair_loss = [&](const corpus::ContrastivePair& p, Scalar grad_scale, bool with_grad) {
        const auto& toks = tokens[p.x_id];
        const auto row = static_cast<Eigen::Index>(mask_pos[p.x_id]);
        if (!with_grad) {
            const Vector<Scalar> rep = lm::mask_representation<Scalar>(model, toks);
            return static_cast<double>(dialect_loss(frozen[p.us_id], rep, p.label, margin));
        }
        const auto cache = model.forward_with_cache(toks);
        const Vector<Scalar> rep = cache.hidden.row(row).transpose();
        const auto r = dialect_loss_with_grad(frozen[p.us_id], rep, p.label, margin);
        if (r.loss > Scalar(0)) {
            Matrix<Scalar> dhidden = Matrix<Scalar>::Zero(cache.hidden.rows(), cache.hidden.cols());
            dhidden.row(row) = grad_scale * r.grad_trainable.transpose();
            model.backward(cache, Matrix<Scalar>(), dhidden);
        }
        return static_cast<double>(r.loss);
    };

    auto params = trainable_params(dialect);
    AdamW<Scalar> opt({cfg.learning_rate, 0.9, 0.999, 1e-8, cfg.weight_decay});
    Rng rng(cfg.seed);
    TrainOutcome out;
    double best = std::numeric_limits<double>::infinity();
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = Clock::now();
        std::vector<double> losses(train_pairs.size());
        for (const auto& batch : make_batches(train_pairs.size(), cfg.batch_size, rng)) {
            dialect.zero_grad();
            const Scalar scale = Scalar(1) / static_cast<Scalar>(batch.size());
            for (std::size_t idx : batch) {
                losses[idx] = pair_loss(train_pairs[idx], scale, true);
                check_finite(losses[idx], "train_dialect", epoch, train_pairs[idx].x_id);
            }
            opt.step(params);
        }
        const double train_loss = ordered_mean(losses);
        emit(out, sink, {epoch, "train", train_loss, seconds_since(t0)});

        double select = train_loss;
        if (!valid_pairs.empty()) {
            const auto v0 = Clock::now();
            std::vector<double> vl(valid_pairs.size());
            for (std::size_t i = 0; i < valid_pairs.size(); ++i) vl[i] = pair_loss(valid_pairs[i], Scalar(1), false);
            select = ordered_mean(vl);
            emit(out, sink, {epoch, "valid", select, seconds_since(v0)});
        }
        if (select < best) {
            best = select;
            out.best_epoch = epoch;
            out.best = adapters::snapshot(dialect);
        }
    }
    adapters::restore(dialect, out.best);
    dialect.zero_grad();

    out.best.stack_order = "dialect";
    out.best.config_digest = text::git_blob_digest(cfg.canonical());
    out.best.metadata["optimizer"] = "adamw";
    out.best.metadata["best_epoch"] = std::to_string(out.best_epoch);
    out.best.metadata["margin"] = exact(cfg.margin);
    out.best.metadata["selection"] = valid_pairs.empty() ? "train_loss" : "valid_loss";
    return out;
}

void write_metrics(const std::filesystem::path& path, std::span<const EpochMetrics> metrics) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& m : metrics) {
        nlohmann::json j{{"epoch", m.epoch}, {"split", m.split}, {"loss", m.loss}, {"wall_seconds", m.wall_seconds}};
        out << j.dump() << '\n';
    }
}

template TaskInstance make_task_instance(const lm::LanguageModel<float>&, const corpus::MaskedExample&,
                                         const corpus::PromptTemplate&);
template TaskInstance make_task_instance(const lm::LanguageModel<double>&, const corpus::MaskedExample&,
                                         const corpus::PromptTemplate&);
template TrainOutcome train_task(lm::TinyDecoder<float>&, adapters::AdapterStack<float>&,
                                 std::span<const corpus::MaskedExample>, std::span<const corpus::MaskedExample>,
                                 const corpus::PromptTemplate&, const TaskTrainConfig&, const MetricsSink&);
template TrainOutcome train_task(lm::TinyDecoder<double>&, adapters::AdapterStack<double>&,
                                 std::span<const corpus::MaskedExample>, std::span<const corpus::MaskedExample>,
                                 const corpus::PromptTemplate&, const TaskTrainConfig&, const MetricsSink&);
template TrainOutcome train_dialect(lm::TinyDecoder<float>&, adapters::AdapterSet<float>&,
                                    std::span<const corpus::ContrastivePair>, std::span<const corpus::ContrastivePair>,
                                    std::span<const corpus::MaskedExample>, const corpus::PromptTemplate&,
                                    const DialectTrainConfig&, const MetricsSink&);
template TrainOutcome train_dialect(lm::TinyDecoder<double>&, adapters::AdapterSet<double>&,
                                    std::span<const corpus::ContrastivePair>, std::span<const corpus::ContrastivePair>,
                                    std::span<const corpus::MaskedExample>, const corpus::PromptTemplate&,
                                    const DialectTrainConfig&, const MetricsSink&);

}  // namespace lordd::training
