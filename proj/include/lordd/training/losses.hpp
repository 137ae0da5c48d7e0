#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "lordd/error.hpp"
#include "lordd/lm/tokenizer.hpp"
#include "lordd/types.hpp"

namespace lordd::training {

// Target positions of one example, 1-indexed and inclusive: tokens
// start..end are scored, each conditioned on everything before it.
struct TargetSpan {
    std::size_t start = 0;
    std::size_t end = 0;
};

struct TrainBatch {
    std::vector<lm::TokenSequence> tokens;
    std::vector<TargetSpan> spans;

    std::size_t size() const { return tokens.size(); }
};

void validate_span(const lm::TokenSequence& tokens, TargetSpan span, Eigen::Index logit_rows);

// Summed negative log-likelihood of one example's target tokens. Row r of
// `logits` is the next-token distribution after token r (0-indexed). When
// `dlogits` is given it receives d(sum)/d(logits), scaled by `grad_scale`.
template <typename Scalar>
Scalar target_nll(const Matrix<Scalar>& logits, const lm::TokenSequence& tokens, TargetSpan span,
                  Matrix<Scalar>* dlogits = nullptr, Scalar grad_scale = Scalar(1)) {
    validate_span(tokens, span, logits.rows());
    if (dlogits != nullptr) dlogits->setZero(logits.rows(), logits.cols());
    Scalar total = 0;
    for (std::size_t i = span.start; i <= span.end; ++i) {
        const auto row = static_cast<Eigen::Index>(i - 2);
        const auto target = static_cast<Eigen::Index>(tokens[i - 1]);
        const auto z = logits.row(row);
        const Scalar mx = z.maxCoeff();
        const Scalar lse = mx + std::log((z.array() - mx).exp().sum());
        total += lse - z(target);
        if (dlogits != nullptr) {
            dlogits->row(row) = (z.array() - lse).exp().matrix() * grad_scale;
            (*dlogits)(row, target) -= grad_scale;
        }
    }
    return total;
}

// Mean over the batch of each example's summed target NLL.
template <typename Scalar>
Scalar task_loss(std::span<const Matrix<Scalar>> logits, const TrainBatch& batch) {
    if (batch.size() == 0) throw ArgumentError("task_loss: empty batch");
    if (logits.size() != batch.size() || batch.spans.size() != batch.size()) {
        throw ArgumentError("task_loss: logits, tokens and spans must align");
    }
    Scalar sum = 0;
    for (std::size_t j = 0; j < batch.size(); ++j) sum += target_nll(logits[j], batch.tokens[j], batch.spans[j]);
    return sum / static_cast<Scalar>(batch.size());
}

template <typename Scalar>
struct DialectLossResult {
    Scalar loss = 0;
    Scalar similarity = 0;
    Vector<Scalar> grad_frozen;     // d loss / d rep_us
    Vector<Scalar> grad_trainable;  // d loss / d rep_x
};

template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v) {
    using Scalar = typename DerivedU::Scalar;
    const Scalar uu = u.dot(u);
    const Scalar vv = v.dot(v);
    if (!(uu > Scalar(0)) || !(vv > Scalar(0))) throw ArgumentError("cosine similarity of a zero vector");
    return u.dot(v) / std::sqrt(uu * vv);
}

// Cosine embedding loss: 1 - sim for y = 1, max(0, sim - margin) for y = -1.
template <typename Scalar>
DialectLossResult<Scalar> dialect_loss_with_grad(const Vector<Scalar>& rep_us, const Vector<Scalar>& rep_x, int y,
                                                 Scalar margin) {
    if (rep_us.size() != rep_x.size()) throw ArgumentError("dialect_loss: dimension mismatch");
    if (y != 1 && y != -1) throw ArgumentError("dialect_loss: label must be 1 or -1");
    const Scalar uu = rep_us.dot(rep_us);
    const Scalar vv = rep_x.dot(rep_x);
    if (!(uu > Scalar(0)) || !(vv > Scalar(0))) throw ArgumentError("dialect_loss: zero vector, cosine undefined");
    const Scalar uv = rep_us.dot(rep_x);
    const Scalar norm = std::sqrt(uu * vv);
    DialectLossResult<Scalar> r;
    r.similarity = uv / norm;
    // d sim / d v = (u - (uv / vv) v) / |u||v|; exactly zero when u == v.
    const Vector<Scalar> dsim_dx = (rep_us - (uv / vv) * rep_x) / norm;
    const Vector<Scalar> dsim_du = (rep_x - (uv / uu) * rep_us) / norm;
    if (y == 1) {
        r.loss = Scalar(1) - r.similarity;
        r.grad_trainable = -dsim_dx;
        r.grad_frozen = -dsim_du;
    } else if (r.similarity > margin) {
        r.loss = r.similarity - margin;
        r.grad_trainable = dsim_dx;
        r.grad_frozen = dsim_du;
    } else {
        r.loss = Scalar(0);
        r.grad_trainable = Vector<Scalar>::Zero(rep_x.size());
        r.grad_frozen = Vector<Scalar>::Zero(rep_us.size());
    }
    return r;
}

template <typename Scalar>
Scalar dialect_loss(const Vector<Scalar>& rep_us, const Vector<Scalar>& rep_x, int y, Scalar margin) {
    return dialect_loss_with_grad(rep_us, rep_x, y, margin).loss;
}

}  // namespace lordd::training
