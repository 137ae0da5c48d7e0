#include "lordd/adapters/adapter_set.hpp"

#include <algorithm>

#include "lordd/error.hpp"
#include "lordd/rng.hpp"

namespace lordd::adapters {

std::string_view to_string(AdapterRole role) {
    return role == AdapterRole::dialect ? "dialect" : "task";
}

AdapterRole parse_role(std::string_view s) {
    if (s == "dialect") return AdapterRole::dialect;
    if (s == "task") return AdapterRole::task;
    throw ParseError("unknown adapter role '" + std::string(s) + "'");
}

void AdapterConfig::validate() const {
    if (rank < 1) throw ConfigError("adapter rank must be >= 1");
    if (!(alpha > 0.0)) throw ConfigError("adapter alpha must be > 0");
    if (!(init_std > 0.0)) throw ConfigError("adapter init_std must be > 0");
}

template <typename Scalar>
std::vector<std::string> AdapterSet<Scalar>::layer_names() const {
    std::vector<std::string> out;
    for (const auto& l : *layers_) {
        if (l.slot(role_)) out.push_back(l.name());
    }
    return out;
}

template <typename Scalar>
LowRankAdapter<Scalar>& AdapterSet<Scalar>::entry(std::string_view layer) {
    for (auto& l : *layers_) {
        if (l.name() == layer && l.slot(role_)) return *l.slot(role_);
    }
    throw ArgumentError("no " + std::string(to_string(role_)) + " adapter on layer '" + std::string(layer) + "'");
}

template <typename Scalar>
const LowRankAdapter<Scalar>& AdapterSet<Scalar>::entry(std::string_view layer) const {
    return const_cast<AdapterSet*>(this)->entry(layer);
}

template <typename Scalar>
std::vector<LowRankAdapter<Scalar>*> AdapterSet<Scalar>::entries() {
    std::vector<LowRankAdapter<Scalar>*> out;
    for (auto& l : *layers_) {
        if (l.slot(role_)) out.push_back(&*l.slot(role_));
    }
    return out;
}

template <typename Scalar>
bool AdapterSet<Scalar>::trainable() const {
    for (const auto& l : *layers_) {
        if (l.slot(role_)) return l.slot(role_)->trainable;
    }
    return false;
}

template <typename Scalar>
std::size_t AdapterSet<Scalar>::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : *layers_) {
        if (l.slot(role_)) n += static_cast<std::size_t>(l.slot(role_)->A.size() + l.slot(role_)->B.size());
    }
    return n;
}

template <typename Scalar>
void AdapterSet<Scalar>::zero_grad() {
    for (auto* a : entries()) a->zero_grad();
}

template <typename Scalar>
AdapterSet<Scalar> inject(LayerList<Scalar>& layers, const AdapterConfig& cfg, AdapterRole role,
                          std::uint64_t seed) {
    cfg.validate();
    auto targeted = [&](const std::string& name) {
        return cfg.target_layers.empty() ||
               std::find(cfg.target_layers.begin(), cfg.target_layers.end(), name) != cfg.target_layers.end();
    };
    for (const std::string& name : cfg.target_layers) {
        const bool known = std::any_of(layers.begin(), layers.end(), [&](const auto& l) { return l.name() == name; });
        if (!known) throw ConfigError("adapter target layer '" + name + "' does not exist");
    }
    for (const auto& l : layers) {
        if (!targeted(l.name())) continue;
        if (cfg.rank > std::min(l.in_dim(), l.out_dim())) {
            throw ConfigError("adapter rank " + std::to_string(cfg.rank) + " exceeds min(in, out) = " +
                              std::to_string(std::min(l.in_dim(), l.out_dim())) + " for layer '" + l.name() + "'");
        }
        if (l.slot(role)) {
            throw ConfigError("layer '" + l.name() + "' already has a " + std::string(to_string(role)) + " adapter");
        }
    }
    Rng rng(seed);
    for (auto& l : layers) {
        if (!targeted(l.name())) continue;
        LowRankAdapter<Scalar> a;
        a.A.resize(cfg.rank, l.in_dim());
        for (Eigen::Index i = 0; i < a.A.size(); ++i) a.A.data()[i] = static_cast<Scalar>(cfg.init_std * rng.normal());
        a.B = Matrix<Scalar>::Zero(l.out_dim(), cfg.rank);
        a.alpha = static_cast<Scalar>(cfg.alpha);
        a.trainable = true;
        a.zero_grad();
        l.slot(role) = std::move(a);
    }
    return AdapterSet<Scalar>(layers, role);
}

template <typename Scalar>
void set_trainable(AdapterSet<Scalar>& set, bool flag) {
    for (auto* a : set.entries()) {
        a->trainable = flag;
        a->zero_grad();
    }
}

template <typename Scalar>
std::vector<AdapterRole> AdapterStack<Scalar>::order() const {
    if (dialect) return {AdapterRole::dialect, AdapterRole::task};
    return {AdapterRole::task};
}

template <typename Scalar>
std::string AdapterStack<Scalar>::order_string() const {
    return dialect ? "dialect,task" : "task";
}

template <typename Scalar>
AdapterStack<Scalar> stack(const AdapterSet<Scalar>& dialect, const AdapterSet<Scalar>& task) {
    if (dialect.host() != task.host()) throw ArgumentError("stack: adapter sets belong to different backends");
    if (dialect.role() != AdapterRole::dialect || task.role() != AdapterRole::task) {
        throw ArgumentError("stack: expected a dialect set and a task set");
    }
    return AdapterStack<Scalar>{dialect, task};
}

template <typename Scalar>
AdapterStack<Scalar> stack(const AdapterSet<Scalar>& task) {
    if (task.role() != AdapterRole::task) throw ArgumentError("stack: expected a task set");
    return AdapterStack<Scalar>{std::nullopt, task};
}

template <typename Scalar>
void merge(LayerList<Scalar>& layers, const AdapterStack<Scalar>& st) {
    if (st.task.host() != &layers) throw ArgumentError("merge: stack belongs to a different backend");
    for (auto& l : layers) {
        for (AdapterRole role : st.order()) {
            auto& slot = l.slot(role);
            if (!slot) continue;
            l.weight().noalias() += slot->delta();
            slot.reset();
        }
    }
}

template <typename Scalar>
void remove(LayerList<Scalar>& layers, AdapterRole role) {
    for (auto& l : layers) l.slot(role).reset();
}

#define LORDD_INSTANTIATE(S)                                                                              \
    template class AdapterSet<S>;                                                                         \
    template struct AdapterStack<S>;                                                                      \
    template AdapterSet<S> inject(LayerList<S>&, const AdapterConfig&, AdapterRole, std::uint64_t);      \
    template void set_trainable(AdapterSet<S>&, bool);                                                    \
    template AdapterStack<S> stack(const AdapterSet<S>&, const AdapterSet<S>&);                           \
    template AdapterStack<S> stack(const AdapterSet<S>&);                                                 \
    template void merge(LayerList<S>&, const AdapterStack<S>&);                                           \
    template void remove(LayerList<S>&, AdapterRole);

LORDD_INSTANTIATE(float)
LORDD_INSTANTIATE(double)
#undef LORDD_INSTANTIATE

}  // namespace lordd::adapters
