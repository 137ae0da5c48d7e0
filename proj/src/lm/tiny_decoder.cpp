#include "lordd/lm/tiny_decoder.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "lordd/error.hpp"
#include "lordd/lm/tensor_io.hpp"
#include "lordd/rng.hpp"

namespace lordd::lm {

namespace {

constexpr double kNormEps = 1e-5;
constexpr const char* kFormat = "lordd-tiny-decoder/1";
constexpr const char* kWhich[6] = {"attn.q", "attn.k", "attn.v", "attn.o", "mlp.up", "mlp.down"};

template <typename Scalar>
Matrix<Scalar> random_matrix(Rng& rng, int rows, int cols, double std) {
    Matrix<Scalar> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(std * rng.normal());
    return m;
}

// Row-wise RMS normalization without gain.
template <typename Scalar>
Matrix<Scalar> rms_forward(const Matrix<Scalar>& x) {
    Matrix<Scalar> y(x.rows(), x.cols());
    const Scalar d = static_cast<Scalar>(x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Scalar r = Scalar(1) / std::sqrt(x.row(i).squaredNorm() / d + Scalar(kNormEps));
        y.row(i) = x.row(i) * r;
    }
    return y;
}

template <typename Scalar>
Matrix<Scalar> rms_backward(const Matrix<Scalar>& x, const Matrix<Scalar>& dy) {
    Matrix<Scalar> dx(x.rows(), x.cols());
    const Scalar d = static_cast<Scalar>(x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Scalar r = Scalar(1) / std::sqrt(x.row(i).squaredNorm() / d + Scalar(kNormEps));
        const Scalar dot = dy.row(i).dot(x.row(i));
        dx.row(i) = r * dy.row(i) - (r * r * r / d) * dot * x.row(i);
    }
    return dx;
}

template <typename Scalar>
Scalar gelu(Scalar x) {
    constexpr Scalar c = Scalar(0.7978845608028654);
    return Scalar(0.5) * x * (Scalar(1) + std::tanh(c * (x + Scalar(0.044715) * x * x * x)));
}

template <typename Scalar>
Scalar gelu_grad(Scalar x) {
    constexpr Scalar c = Scalar(0.7978845608028654);
    const Scalar t = std::tanh(c * (x + Scalar(0.044715) * x * x * x));
    return Scalar(0.5) * (Scalar(1) + t) +
           Scalar(0.5) * x * (Scalar(1) - t * t) * c * (Scalar(1) + Scalar(3 * 0.044715) * x * x);
}

template <typename Scalar>
bool bitwise_equal(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(Scalar) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

void TinyDecoderConfig::validate() const {
    if (layers < 1) throw ConfigError("layers must be >= 1");
    if (hidden_dim < 8) throw ConfigError("hidden_dim must be >= 8");
    if (heads < 1 || hidden_dim % heads != 0) throw ConfigError("heads must divide hidden_dim");
    if (vocab_size < 16) throw ConfigError("vocab_size must be >= 16");
    if (vocab_size < CharTokenizer::kVocabSize) {
        throw ConfigError("vocab_size must cover the character tokenizer (" +
                          std::to_string(CharTokenizer::kVocabSize) + ")");
    }
    if (context_len < 32) throw ConfigError("context_len must be >= 32");
}

template <typename Scalar>
TinyDecoder<Scalar>::TinyDecoder(const TinyDecoderConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(cfg_.seed);
    const int d = cfg_.hidden_dim;
    tok_emb_ = random_matrix<Scalar>(rng, cfg_.vocab_size, d, 1.0);
    pos_emb_ = random_matrix<Scalar>(rng, cfg_.context_len, d, 1.0);
    auto add = [&](std::string name, int out, int in) {
        by_name_[name] = linears_.size();
        desc_.linear_layer_names.push_back(name);
        linears_.emplace_back(std::move(name), random_matrix<Scalar>(rng, out, in, 1.0 / std::sqrt(in)));
    };
    for (int b = 0; b < cfg_.layers; ++b) {
        const std::string prefix = "blocks." + std::to_string(b) + ".";
        add(prefix + kWhich[0], d, d);
        add(prefix + kWhich[1], d, d);
        add(prefix + kWhich[2], d, d);
        add(prefix + kWhich[3], d, d);
        add(prefix + kWhich[4], mlp_dim(), d);
        add(prefix + kWhich[5], d, mlp_dim());
    }
    add("lm_head", cfg_.vocab_size, d);

    desc_.backend_id = "tiny-decoder";
    desc_.vocab_size = cfg_.vocab_size;
    desc_.hidden_dim = d;
    desc_.context_len = cfg_.context_len;
    desc_.mask_token_id = CharTokenizer::kMask;
    desc_.end_token_id = CharTokenizer::kEndOfAnswer;
}

template <typename Scalar>
TokenSequence TinyDecoder<Scalar>::tokenize(std::string_view text) const {
    return tokenizer_.encode(text);
}

template <typename Scalar>
std::string TinyDecoder<Scalar>::detokenize(std::span<const TokenId> ids) const {
    return tokenizer_.decode(ids);
}

template <typename Scalar>
adapters::AdaptedLinear<Scalar>& TinyDecoder<Scalar>::linear(std::string_view name) {
    const auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) throw ArgumentError("no linear layer named '" + std::string(name) + "'");
    return linears_[it->second];
}

template <typename Scalar>
const adapters::AdaptedLinear<Scalar>& TinyDecoder<Scalar>::linear(std::string_view name) const {
    return const_cast<TinyDecoder*>(this)->linear(name);
}

template <typename Scalar>
auto TinyDecoder<Scalar>::attention_forward(const Mat& q, const Mat& k, const Mat& v,
                                            std::vector<Mat>* probs) const -> Mat {
    const Eigen::Index t = q.rows();
    const int dh = cfg_.hidden_dim / cfg_.heads;
    const Scalar inv_sqrt = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
    Mat out(t, cfg_.hidden_dim);
    for (int h = 0; h < cfg_.heads; ++h) {
        const auto qh = q.middleCols(h * dh, dh);
        const auto kh = k.middleCols(h * dh, dh);
        const auto vh = v.middleCols(h * dh, dh);
        Mat p = (qh * kh.transpose()) * inv_sqrt;
        for (Eigen::Index i = 0; i < t; ++i) {
            const Scalar mx = p.row(i).head(i + 1).maxCoeff();
            Scalar sum = 0;
            for (Eigen::Index j = 0; j <= i; ++j) {
                p(i, j) = std::exp(p(i, j) - mx);
                sum += p(i, j);
            }
            p.row(i).head(i + 1) /= sum;
            p.row(i).tail(t - i - 1).setZero();
        }
        out.middleCols(h * dh, dh).noalias() = p * vh;
        if (probs != nullptr) probs->push_back(std::move(p));
    }
    return out;
}

template <typename Scalar>
auto TinyDecoder<Scalar>::forward_with_cache(std::span<const TokenId> tokens) const -> Cache {
    const auto t = static_cast<Eigen::Index>(tokens.size());
    if (t < 1) throw ContextError("forward needs at least one token");
    if (t > cfg_.context_len) {
        throw ContextError("input of " + std::to_string(t) + " tokens exceeds context of " +
                           std::to_string(cfg_.context_len));
    }
    Cache c;
    c.tokens.assign(tokens.begin(), tokens.end());
    c.active = active_;
    Mat x(t, cfg_.hidden_dim);
    for (Eigen::Index i = 0; i < t; ++i) {
        const TokenId id = tokens[static_cast<std::size_t>(i)];
        if (id < 0 || id >= cfg_.vocab_size) throw ArgumentError("token id " + std::to_string(id) + " out of range");
        x.row(i) = tok_emb_.row(id) + pos_emb_.row(i);
    }
    c.blocks.resize(static_cast<std::size_t>(cfg_.layers));
    for (int b = 0; b < cfg_.layers; ++b) {
        BlockCache& bc = c.blocks[static_cast<std::size_t>(b)];
        bc.x_in = x;
        bc.n1 = rms_forward(x);
        bc.q = linears_[layer_index(b, 0)].forward(bc.n1, active_);
        bc.k = linears_[layer_index(b, 1)].forward(bc.n1, active_);
        bc.v = linears_[layer_index(b, 2)].forward(bc.n1, active_);
        bc.att = attention_forward(bc.q, bc.k, bc.v, &bc.probs);
        bc.x_mid = x + linears_[layer_index(b, 3)].forward(bc.att, active_);
        bc.n2 = rms_forward(bc.x_mid);
        bc.up = linears_[layer_index(b, 4)].forward(bc.n2, active_);
        bc.act = bc.up.unaryExpr([](Scalar z) { return gelu(z); });
        x = bc.x_mid + linears_[layer_index(b, 5)].forward(bc.act, active_);
    }
    c.x_final = x;
    c.hidden = rms_forward(x);
    c.logits = linears_.back().forward(c.hidden, active_);
    return c;
}

template <typename Scalar>
ForwardResult<Scalar> TinyDecoder<Scalar>::forward(std::span<const TokenId> tokens) const {
    Cache c = forward_with_cache(tokens);
    return {std::move(c.logits), std::move(c.hidden)};
}

template <typename Scalar>
void TinyDecoder<Scalar>::backward(const Cache& c, const Mat& dlogits, const Mat& dhidden) {
    const Eigen::Index t = c.hidden.rows();
    Mat dh = Mat::Zero(t, cfg_.hidden_dim);
    if (dhidden.size() != 0) dh += dhidden;
    if (dlogits.size() != 0) dh += linears_.back().backward(c.hidden, dlogits, c.active);
    Mat dx = rms_backward(c.x_final, dh);

    const int dh_head = cfg_.hidden_dim / cfg_.heads;
    const Scalar inv_sqrt = Scalar(1) / std::sqrt(static_cast<Scalar>(dh_head));
    for (int b = cfg_.layers - 1; b >= 0; --b) {
        const BlockCache& bc = c.blocks[static_cast<std::size_t>(b)];
        // MLP residual branch.
        Mat dact = linears_[layer_index(b, 5)].backward(bc.act, dx, c.active);
        Mat dup = dact.cwiseProduct(bc.up.unaryExpr([](Scalar z) { return gelu_grad(z); }));
        Mat dn2 = linears_[layer_index(b, 4)].backward(bc.n2, dup, c.active);
        Mat dx_mid = dx + rms_backward(bc.x_mid, dn2);

        // Attention residual branch.
        Mat datt = linears_[layer_index(b, 3)].backward(bc.att, dx_mid, c.active);
        Mat dq(t, cfg_.hidden_dim), dk(t, cfg_.hidden_dim), dv(t, cfg_.hidden_dim);
        for (int h = 0; h < cfg_.heads; ++h) {
            const Mat& p = bc.probs[static_cast<std::size_t>(h)];
            const auto qh = bc.q.middleCols(h * dh_head, dh_head);
            const auto kh = bc.k.middleCols(h * dh_head, dh_head);
            const auto vh = bc.v.middleCols(h * dh_head, dh_head);
            const Mat dout = datt.middleCols(h * dh_head, dh_head);
            const Mat dp = dout * vh.transpose();
            dv.middleCols(h * dh_head, dh_head).noalias() = p.transpose() * dout;
            Mat ds = p.cwiseProduct(dp);
            const Vector<Scalar> rowdot = ds.rowwise().sum();
            ds -= p.cwiseProduct(rowdot.replicate(1, t));
            ds *= inv_sqrt;
            dq.middleCols(h * dh_head, dh_head).noalias() = ds * kh;
            dk.middleCols(h * dh_head, dh_head).noalias() = ds.transpose() * qh;
        }
        Mat dn1 = linears_[layer_index(b, 0)].backward(bc.n1, dq, c.active);
        dn1 += linears_[layer_index(b, 1)].backward(bc.n1, dk, c.active);
        dn1 += linears_[layer_index(b, 2)].backward(bc.n1, dv, c.active);
        dx = dx_mid + rms_backward(bc.x_in, dn1);
    }
}

template <typename Scalar>
void TinyDecoder<Scalar>::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    Manifest m;
    m["format"] = kFormat;
    m["layers"] = std::to_string(cfg_.layers);
    m["hidden_dim"] = std::to_string(cfg_.hidden_dim);
    m["heads"] = std::to_string(cfg_.heads);
    m["vocab_size"] = std::to_string(cfg_.vocab_size);
    m["context_len"] = std::to_string(cfg_.context_len);
    m["seed"] = std::to_string(cfg_.seed);
    write_manifest(dir / "manifest.txt", m);
    write_tensor(dir / "tok_emb.bin", tok_emb_.template cast<float>());
    write_tensor(dir / "pos_emb.bin", pos_emb_.template cast<float>());
    for (const auto& l : linears_) write_tensor(dir / (l.name() + ".bin"), l.weight().template cast<float>());
}

template <typename Scalar>
TinyDecoder<Scalar> TinyDecoder<Scalar>::load(const std::filesystem::path& dir) {
    const std::filesystem::path mpath = dir / "manifest.txt";
    const Manifest m = read_manifest(mpath);
    if (manifest_get(m, "format", mpath) != kFormat) throw ParseError(mpath.string() + ": unknown format");
    TinyDecoderConfig cfg;
    try {
        cfg.layers = std::stoi(manifest_get(m, "layers", mpath));
        cfg.hidden_dim = std::stoi(manifest_get(m, "hidden_dim", mpath));
        cfg.heads = std::stoi(manifest_get(m, "heads", mpath));
        cfg.vocab_size = std::stoi(manifest_get(m, "vocab_size", mpath));
        cfg.context_len = std::stoi(manifest_get(m, "context_len", mpath));
        cfg.seed = std::stoull(manifest_get(m, "seed", mpath));
    } catch (const std::logic_error&) {
        throw ParseError(mpath.string() + ": malformed numeric field");
    }
    TinyDecoder model(cfg);
    auto load_into = [&](const std::string& file, Mat& target) {
        const MatrixF t = read_tensor(dir / file);
        if (t.rows() != target.rows() || t.cols() != target.cols()) {
            throw ValidationError("tensor " + file + " has shape " + std::to_string(t.rows()) + "x" +
                                  std::to_string(t.cols()) + ", expected " + std::to_string(target.rows()) + "x" +
                                  std::to_string(target.cols()));
        }
        target = t.template cast<Scalar>();
    };
    load_into("tok_emb.bin", model.tok_emb_);
    load_into("pos_emb.bin", model.pos_emb_);
    for (auto& l : model.linears_) load_into(l.name() + ".bin", l.weight());
    return model;
}

template <typename Scalar>
bool TinyDecoder<Scalar>::base_weights_equal(const TinyDecoder& other) const {
    if (linears_.size() != other.linears_.size()) return false;
    if (!bitwise_equal(tok_emb_, other.tok_emb_) || !bitwise_equal(pos_emb_, other.pos_emb_)) return false;
    for (std::size_t i = 0; i < linears_.size(); ++i) {
        if (!bitwise_equal(linears_[i].weight(), other.linears_[i].weight())) return false;
    }
    return true;
}

template class TinyDecoder<float>;
template class TinyDecoder<double>;

}  // namespace lordd::lm
