#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lordd/adapters/low_rank.hpp"

namespace lordd::adapters {

struct AdapterConfig {
    int rank = 16;
    double alpha = 32.0;
    double init_std = 0.02;
    std::vector<std::string> target_layers;  // empty selects every linear layer

    void validate() const;
};

template <typename Scalar>
using LayerList = std::vector<AdaptedLinear<Scalar>>;

// Handle onto the adapters of one role inside a backend's layer list. It
// does not own the adapters and must not outlive the backend.
template <typename Scalar>
class AdapterSet {
public:
    AdapterSet(LayerList<Scalar>& layers, AdapterRole role) : layers_(&layers), role_(role) {}

    AdapterRole role() const { return role_; }
    const LayerList<Scalar>* host() const { return layers_; }

    std::vector<std::string> layer_names() const;
    LowRankAdapter<Scalar>& entry(std::string_view layer);
    const LowRankAdapter<Scalar>& entry(std::string_view layer) const;
    std::vector<LowRankAdapter<Scalar>*> entries();

    bool trainable() const;
    std::size_t parameter_count() const;
    void zero_grad();

private:
    LayerList<Scalar>* layers_;
    AdapterRole role_;
};

// Attaches a fresh adapter of `role` to every targeted layer: A ~ N(0, init_std^2)
// from `seed`, B = 0, so the layer output is unchanged. Throws ConfigError
// naming the layer if the rank exceeds min(in, out), or if the role is
// already injected.
template <typename Scalar>
AdapterSet<Scalar> inject(LayerList<Scalar>& layers, const AdapterConfig& cfg, AdapterRole role,
                          std::uint64_t seed);

template <typename Scalar>
void set_trainable(AdapterSet<Scalar>& set, bool flag);

// Dialect-then-task composition. Both sets must live on the same backend.
template <typename Scalar>
struct AdapterStack {
    std::optional<AdapterSet<Scalar>> dialect;
    AdapterSet<Scalar> task;

    std::vector<AdapterRole> order() const;
    std::string order_string() const;
};

template <typename Scalar>
AdapterStack<Scalar> stack(const AdapterSet<Scalar>& dialect, const AdapterSet<Scalar>& task);

template <typename Scalar>
AdapterStack<Scalar> stack(const AdapterSet<Scalar>& task);

// Folds every adapter of the stack into its base weight (W0 += s B A) and
// removes the adapters.
template <typename Scalar>
void merge(LayerList<Scalar>& layers, const AdapterStack<Scalar>& stack);

// Removes the adapters of one role without folding them in.
template <typename Scalar>
void remove(LayerList<Scalar>& layers, AdapterRole role);

}  // namespace lordd::adapters
