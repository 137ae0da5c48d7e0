#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lordd/adapters/low_rank.hpp"
#include "lordd/lm/language_model.hpp"
#include "lordd/lm/tokenizer.hpp"

namespace lordd::lm {

struct TinyDecoderConfig {
    int layers = 2;
    int hidden_dim = 32;
    int heads = 4;
    int vocab_size = CharTokenizer::kVocabSize;
    int context_len = 512;
    std::uint64_t seed = 13;

    // Throws ConfigError naming the offending field.
    void validate() const;
};

// Pre-norm decoder-only transformer (parameter-free RMS norm, tanh GELU MLP
// of width 4 * hidden_dim, learned absolute positions). Every projection is
// an AdaptedLinear so low-rank adapters can be attached by name. Gradients
// are computed only for adapter parameters; base weights stay frozen.
template <typename Scalar>
class TinyDecoder final : public LanguageModel<Scalar> {
public:
    using Mat = Matrix<Scalar>;

    explicit TinyDecoder(const TinyDecoderConfig& cfg);

    const TinyDecoderConfig& config() const { return cfg_; }
    const BackendDescriptor& descriptor() const override { return desc_; }
    TokenSequence tokenize(std::string_view text) const override;
    std::string detokenize(std::span<const TokenId> ids) const override;
    ForwardResult<Scalar> forward(std::span<const TokenId> tokens) const override;

    // Activations kept for the backward pass.
    struct BlockCache {
        Mat x_in, n1, q, k, v, att, x_mid, n2, up, act;
        std::vector<Mat> probs;  // per head, length x length
    };
    struct Cache {
        TokenSequence tokens;
        std::vector<BlockCache> blocks;
        Mat x_final;
        Mat hidden;
        Mat logits;
        adapters::ActiveRoles active{};
    };

    Cache forward_with_cache(std::span<const TokenId> tokens) const;

    // Backpropagates dL/dlogits and dL/dhidden (either may be empty) and
    // accumulates gradients into active trainable adapters.
    void backward(const Cache& cache, const Mat& dlogits, const Mat& dhidden);

    std::vector<adapters::AdaptedLinear<Scalar>>& linear_layers() { return linears_; }
    const std::vector<adapters::AdaptedLinear<Scalar>>& linear_layers() const { return linears_; }
    adapters::AdaptedLinear<Scalar>& linear(std::string_view name);
    const adapters::AdaptedLinear<Scalar>& linear(std::string_view name) const;

    const Mat& token_embedding() const { return tok_emb_; }
    const Mat& position_embedding() const { return pos_emb_; }

    // Role-level switch consulted on every forward. Disabled roles keep their
    // adapters but contribute nothing.
    void set_role_enabled(adapters::AdapterRole role, bool enabled) {
        active_[static_cast<int>(role)] = enabled;
    }
    bool role_enabled(adapters::AdapterRole role) const { return active_[static_cast<int>(role)]; }
    adapters::ActiveRoles active_roles() const { return active_; }
    void set_active_roles(adapters::ActiveRoles roles) { active_ = roles; }

    // Directory with manifest.txt and one tensor file per base parameter.
    void save(const std::filesystem::path& dir) const;
    static TinyDecoder load(const std::filesystem::path& dir);

    // Exact comparison of all base parameters (adapters excluded).
    bool base_weights_equal(const TinyDecoder& other) const;

private:
    Mat attention_forward(const Mat& q, const Mat& k, const Mat& v, std::vector<Mat>* probs) const;
    int mlp_dim() const { return 4 * cfg_.hidden_dim; }
    std::size_t layer_index(int block, int which) const { return static_cast<std::size_t>(block * 6 + which); }

    TinyDecoderConfig cfg_;
    BackendDescriptor desc_;
    CharTokenizer tokenizer_;
    Mat tok_emb_;
    Mat pos_emb_;
    std::vector<adapters::AdaptedLinear<Scalar>> linears_;
    std::unordered_map<std::string, std::size_t> by_name_;
    adapters::ActiveRoles active_{true, true};
};

// Disables every adapter role on a decoder for the guard's lifetime.
template <typename Scalar>
class AdaptersDisabled {
public:
    explicit AdaptersDisabled(TinyDecoder<Scalar>& model) : model_(model), saved_(model.active_roles()) {
        model_.set_active_roles({false, false});
    }
    ~AdaptersDisabled() { model_.set_active_roles(saved_); }
    AdaptersDisabled(const AdaptersDisabled&) = delete;
    AdaptersDisabled& operator=(const AdaptersDisabled&) = delete;

private:
    TinyDecoder<Scalar>& model_;
    adapters::ActiveRoles saved_;
};

extern template class TinyDecoder<float>;
extern template class TinyDecoder<double>;

}  // namespace lordd::lm
