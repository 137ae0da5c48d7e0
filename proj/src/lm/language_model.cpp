#include "lordd/lm/language_model.hpp"

#include <unordered_set>

#include "lordd/error.hpp"

namespace lordd::lm {

void validate(const BackendDescriptor& desc) {
    std::unordered_set<std::string> seen;
    for (const std::string& name : desc.linear_layer_names) {
        if (!seen.insert(name).second) throw ValidationError("duplicate linear layer name '" + name + "'");
    }
    if (desc.mask_token_id < 0 || desc.mask_token_id >= desc.vocab_size) {
        throw ValidationError("mask token id outside vocabulary");
    }
}

std::size_t mask_position(std::span<const TokenId> tokens, TokenId mask_id) {
    std::size_t pos = 0;
    int count = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == mask_id) {
            pos = i;
            ++count;
        }
    }
    if (count != 1) {
        throw ArgumentError("expected exactly one mask token, found " + std::to_string(count));
    }
    return pos;
}

template <typename Scalar>
Vector<Scalar> mask_representation(const LanguageModel<Scalar>& model, std::span<const TokenId> tokens) {
    const std::size_t pos = mask_position(tokens, model.descriptor().mask_token_id);
    const ForwardResult<Scalar> out = model.forward(tokens);
    return out.hidden.row(static_cast<Eigen::Index>(pos)).transpose();
}

template <typename Scalar>
Generation generate_greedy(const LanguageModel<Scalar>& model, std::span<const TokenId> prompt, int max_new,
                           const std::set<TokenId>& stop) {
    if (max_new < 1) throw ArgumentError("max_new must be at least 1");
    if (prompt.empty()) throw ArgumentError("generation needs a nonempty prompt");
    const std::size_t context = static_cast<std::size_t>(model.descriptor().context_len);
    if (prompt.size() > context) throw ContextError("prompt of " + std::to_string(prompt.size()) +
                                                    " tokens exceeds context of " + std::to_string(context));
    Generation gen;
    TokenSequence seq(prompt.begin(), prompt.end());
    for (int step = 0; step < max_new; ++step) {
        if (seq.size() >= context) {
            gen.truncated = true;
            break;
        }
        const ForwardResult<Scalar> out = model.forward(seq);
        const auto last = out.logits.row(out.logits.rows() - 1);
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < last.size(); ++j) {
            if (last(j) > last(best)) best = j;  // strict: ties keep the lowest id
        }
        const auto id = static_cast<TokenId>(best);
        if (stop.contains(id)) {
            gen.stopped = true;
            break;
        }
        gen.ids.push_back(id);
        seq.push_back(id);
    }
    gen.text = model.detokenize(gen.ids);
    return gen;
}

template Vector<float> mask_representation(const LanguageModel<float>&, std::span<const TokenId>);
template Vector<double> mask_representation(const LanguageModel<double>&, std::span<const TokenId>);
template Generation generate_greedy(const LanguageModel<float>&, std::span<const TokenId>, int,
                                    const std::set<TokenId>&);
template Generation generate_greedy(const LanguageModel<double>&, std::span<const TokenId>, int,
                                    const std::set<TokenId>&);

}  // namespace lordd::lm
