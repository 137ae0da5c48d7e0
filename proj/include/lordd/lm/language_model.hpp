#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lordd/lm/tokenizer.hpp"
#include "lordd/types.hpp"

namespace lordd::lm {

struct BackendDescriptor {
    std::string backend_id;
    int vocab_size = 0;
    int hidden_dim = 0;
    int context_len = 0;
    std::vector<std::string> linear_layer_names;
    TokenId mask_token_id = 0;
    TokenId end_token_id = 0;
};

// Throws ValidationError on duplicate layer names or an out-of-range mask id.
void validate(const BackendDescriptor& desc);

template <typename Scalar>
struct ForwardResult {
    Matrix<Scalar> logits;  // length x vocab_size
    Matrix<Scalar> hidden;  // length x hidden_dim, final layer
};

// Contract every decoder backend implements, whether the tiny reference
// decoder or an adapter onto a pretrained model.
template <typename Scalar>
class LanguageModel {
public:
    virtual ~LanguageModel() = default;

    virtual const BackendDescriptor& descriptor() const = 0;
    virtual TokenSequence tokenize(std::string_view text) const = 0;
    virtual std::string detokenize(std::span<const TokenId> ids) const = 0;

    // Row i of both outputs depends only on tokens[0..i].
    virtual ForwardResult<Scalar> forward(std::span<const TokenId> tokens) const = 0;
};

// Final-layer hidden state at the (unique) mask token position.
template <typename Scalar>
Vector<Scalar> mask_representation(const LanguageModel<Scalar>& model, std::span<const TokenId> tokens);

// Position of the single mask token; ArgumentError if there are zero or several.
std::size_t mask_position(std::span<const TokenId> tokens, TokenId mask_id);

struct Generation {
    std::string text;
    TokenSequence ids;
    bool truncated = false;
    bool stopped = false;
};

// Greedy decoding, lowest id on ties. Stops at a stop token (not included
// in the output), after max_new tokens, or when the context is full.
template <typename Scalar>
Generation generate_greedy(const LanguageModel<Scalar>& model, std::span<const TokenId> prompt, int max_new,
                           const std::set<TokenId>& stop);

}  // namespace lordd::lm
