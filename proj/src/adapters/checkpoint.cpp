#include "lordd/adapters/checkpoint.hpp"

#include <algorithm>
#include <cstdio>

#include "lordd/error.hpp"
#include "lordd/lm/tensor_io.hpp"
#include "lordd/text.hpp"

namespace lordd::adapters {

namespace {

constexpr const char* kFormat = "lordd-adapter/1";

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += xs[i];
    }
    return out;
}

}  // namespace

template <typename Scalar>
AdapterCheckpoint snapshot(const AdapterSet<Scalar>& set) {
    AdapterCheckpoint ck;
    ck.role = set.role();
    ck.layers = set.layer_names();
    for (const std::string& name : ck.layers) {
        const auto& a = set.entry(name);
        ck.rank = a.rank();
        ck.alpha = static_cast<double>(a.alpha);
        ck.tensors[name] = {a.A.template cast<float>(), a.B.template cast<float>()};
    }
    return ck;
}

template <typename Scalar>
void restore(AdapterSet<Scalar>& set, const AdapterCheckpoint& ck) {
    if (ck.role != set.role()) throw ArgumentError("restore: checkpoint role does not match adapter set");
    for (const auto& [name, ab] : ck.tensors) {
        auto& a = set.entry(name);
        if (a.A.rows() != ab.first.rows() || a.A.cols() != ab.first.cols() || a.B.rows() != ab.second.rows() ||
            a.B.cols() != ab.second.cols()) {
            throw ValidationError("restore: shape mismatch on layer '" + name + "'");
        }
        a.A = ab.first.template cast<Scalar>();
        a.B = ab.second.template cast<Scalar>();
    }
}

template <typename Scalar>
AdapterSet<Scalar> attach(LayerList<Scalar>& layers, const lm::BackendDescriptor& desc,
                          const AdapterCheckpoint& ck) {
    for (const std::string& name : ck.layers) {
        const bool known = std::find(desc.linear_layer_names.begin(), desc.linear_layer_names.end(), name) !=
                           desc.linear_layer_names.end();
        if (!known) throw ValidationError("checkpoint layer '" + name + "' is not a backend linear layer");
    }
    for (auto& l : layers) {
        const auto it = ck.tensors.find(l.name());
        if (it == ck.tensors.end()) continue;
        const auto& [A, B] = it->second;
        if (A.rows() != ck.rank || A.cols() != l.in_dim() || B.rows() != l.out_dim() || B.cols() != ck.rank) {
            throw ValidationError("checkpoint tensors for layer '" + l.name() + "' do not match its " +
                                  std::to_string(l.out_dim()) + "x" + std::to_string(l.in_dim()) + " shape");
        }
        if (l.slot(ck.role)) {
            throw ValidationError("layer '" + l.name() + "' already has a " + std::string(to_string(ck.role)) +
                                  " adapter");
        }
    }
    for (auto& l : layers) {
        const auto it = ck.tensors.find(l.name());
        if (it == ck.tensors.end()) continue;
        LowRankAdapter<Scalar> a;
        a.A = it->second.first.template cast<Scalar>();
        a.B = it->second.second.template cast<Scalar>();
        a.alpha = static_cast<Scalar>(ck.alpha);
        a.trainable = false;
        a.zero_grad();
        l.slot(ck.role) = std::move(a);
    }
    return AdapterSet<Scalar>(layers, ck.role);
}

void save_checkpoint(const std::filesystem::path& dir, const AdapterCheckpoint& ck) {
    std::filesystem::create_directories(dir);
    lm::Manifest m;
    for (const auto& [k, v] : ck.metadata) m["meta." + k] = v;
    m["format"] = kFormat;
    m["set"] = std::string(to_string(ck.role));
    m["rank"] = std::to_string(ck.rank);
    m["alpha"] = exact(ck.alpha);
    m["layers"] = join(ck.layers);
    m["stack_order"] = ck.stack_order;
    m["config_digest"] = ck.config_digest;
    lm::write_manifest(dir / "manifest.txt", m);
    for (const auto& [name, ab] : ck.tensors) {
        lm::write_tensor(dir / (name + ".A.bin"), ab.first);
        lm::write_tensor(dir / (name + ".B.bin"), ab.second);
    }
}

AdapterCheckpoint load_checkpoint(const std::filesystem::path& dir) {
    const auto mpath = dir / "manifest.txt";
    if (!std::filesystem::exists(mpath)) throw IoError("no adapter checkpoint at " + dir.string());
    const lm::Manifest m = lm::read_manifest(mpath);
    if (lm::manifest_get(m, "format", mpath) != kFormat) throw ParseError(mpath.string() + ": unknown format");
    AdapterCheckpoint ck;
    ck.role = parse_role(lm::manifest_get(m, "set", mpath));
    try {
        ck.rank = std::stoi(lm::manifest_get(m, "rank", mpath));
        ck.alpha = std::stod(lm::manifest_get(m, "alpha", mpath));
    } catch (const std::logic_error&) {
        throw ParseError(mpath.string() + ": malformed rank/alpha");
    }
    ck.stack_order = lm::manifest_get(m, "stack_order", mpath);
    ck.config_digest = lm::manifest_get(m, "config_digest", mpath);
    const std::string& layers = lm::manifest_get(m, "layers", mpath);
    if (!layers.empty()) ck.layers = text::split(layers, ',');
    for (const auto& [k, v] : m) {
        if (k.rfind("meta.", 0) == 0) ck.metadata[k.substr(5)] = v;
    }
    for (const std::string& name : ck.layers) {
        ck.tensors[name] = {lm::read_tensor(dir / (name + ".A.bin")), lm::read_tensor(dir / (name + ".B.bin"))};
    }
    return ck;
}

template AdapterCheckpoint snapshot(const AdapterSet<float>&);
template AdapterCheckpoint snapshot(const AdapterSet<double>&);
template void restore(AdapterSet<float>&, const AdapterCheckpoint&);
template void restore(AdapterSet<double>&, const AdapterCheckpoint&);
template AdapterSet<float> attach(LayerList<float>&, const lm::BackendDescriptor&, const AdapterCheckpoint&);
template AdapterSet<double> attach(LayerList<double>&, const lm::BackendDescriptor&, const AdapterCheckpoint&);

}  // namespace lordd::adapters
