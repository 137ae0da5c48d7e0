#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lordd/adapters/adapter_set.hpp"
#include "lordd/lm/language_model.hpp"
#include "lordd/types.hpp"

namespace lordd::adapters {

// Serializable copy of one adapter set.
struct AdapterCheckpoint {
    AdapterRole role = AdapterRole::task;
    int rank = 0;
    double alpha = 0.0;
    std::string stack_order;
    std::string config_digest;
    std::map<std::string, std::string> metadata;  // e.g. optimizer, best_epoch
    std::vector<std::string> layers;
    std::map<std::string, std::pair<MatrixF, MatrixF>> tensors;  // layer -> (A, B)

    bool operator==(const AdapterCheckpoint&) const = default;
};

template <typename Scalar>
AdapterCheckpoint snapshot(const AdapterSet<Scalar>& set);

// Overwrites A and B of an existing set from the checkpoint.
template <typename Scalar>
void restore(AdapterSet<Scalar>& set, const AdapterCheckpoint& ckpt);

// Injects the checkpoint's adapters onto the layers, validating shapes
// against the backend descriptor.
template <typename Scalar>
AdapterSet<Scalar> attach(LayerList<Scalar>& layers, const lm::BackendDescriptor& desc,
                          const AdapterCheckpoint& ckpt);

void save_checkpoint(const std::filesystem::path& dir, const AdapterCheckpoint& ckpt);
AdapterCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace lordd::adapters
