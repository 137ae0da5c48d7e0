#pragma once

#include <cmath>
#include <vector>

#include "lordd/types.hpp"

namespace lordd::training {

struct AdamWConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

template <typename Scalar>
struct ParamRef {
    Matrix<Scalar>* value;
    const Matrix<Scalar>* grad;
};

// Decoupled-weight-decay Adam. Moment buffers are matched to parameters by
// position, so the parameter list must be the same on every step.
template <typename Scalar>
class AdamW {
public:
    explicit AdamW(AdamWConfig cfg) : cfg_(cfg) {}

    void step(const std::vector<ParamRef<Scalar>>& params) {
        if (m_.empty()) {
            for (const auto& p : params) {
                m_.push_back(Matrix<Scalar>::Zero(p.value->rows(), p.value->cols()));
                v_.push_back(Matrix<Scalar>::Zero(p.value->rows(), p.value->cols()));
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        const auto b1 = static_cast<Scalar>(cfg_.beta1);
        const auto b2 = static_cast<Scalar>(cfg_.beta2);
        const auto lr = static_cast<Scalar>(cfg_.learning_rate);
        const auto step_size = static_cast<Scalar>(cfg_.learning_rate / bc1);
        const auto sqrt_bc2 = static_cast<Scalar>(std::sqrt(bc2));
        const auto eps = static_cast<Scalar>(cfg_.eps);
        const auto wd = static_cast<Scalar>(cfg_.weight_decay);
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& w = *params[i].value;
            const auto& g = *params[i].grad;
            if (wd != Scalar(0)) w *= Scalar(1) - lr * wd;
            m_[i] = b1 * m_[i] + (Scalar(1) - b1) * g;
            v_[i] = b2 * v_[i] + (Scalar(1) - b2) * g.cwiseProduct(g);
            w.array() -= step_size * m_[i].array() / (v_[i].array().sqrt() / sqrt_bc2 + eps);
        }
    }

    int steps() const { return t_; }

private:
    AdamWConfig cfg_;
    std::vector<Matrix<Scalar>> m_;
    std::vector<Matrix<Scalar>> v_;
    int t_ = 0;
};

}  // namespace lordd::training
