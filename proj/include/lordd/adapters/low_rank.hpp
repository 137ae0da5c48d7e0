#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "lordd/types.hpp"

namespace lordd::adapters {

enum class AdapterRole { dialect = 0, task = 1 };

inline constexpr std::array<AdapterRole, 2> kStackOrder = {AdapterRole::dialect, AdapterRole::task};

std::string_view to_string(AdapterRole role);
AdapterRole parse_role(std::string_view s);

// Low-rank update delta = (alpha / r) * B * A for a layer of shape out x in.
template <typename Scalar>
struct LowRankAdapter {
    Matrix<Scalar> A;  // r x in
    Matrix<Scalar> B;  // out x r
    Scalar alpha = Scalar(1);
    bool trainable = true;
    Matrix<Scalar> grad_A;
    Matrix<Scalar> grad_B;

    int rank() const { return static_cast<int>(A.rows()); }
    Scalar scale() const { return alpha / static_cast<Scalar>(rank()); }
    Matrix<Scalar> delta() const { return scale() * (B * A); }

    void zero_grad() {
        grad_A.setZero(A.rows(), A.cols());
        grad_B.setZero(B.rows(), B.cols());
    }
};

using ActiveRoles = std::array<bool, 2>;

// A frozen base weight plus up to one adapter per role. All adapters read
// the layer input and their deltas add: y = W0 x + sum_k s_k B_k A_k x.
template <typename Scalar>
class AdaptedLinear {
public:
    AdaptedLinear(std::string name, Matrix<Scalar> weight) : name_(std::move(name)), weight_(std::move(weight)) {}

    const std::string& name() const { return name_; }
    int in_dim() const { return static_cast<int>(weight_.cols()); }
    int out_dim() const { return static_cast<int>(weight_.rows()); }

    const Matrix<Scalar>& weight() const { return weight_; }
    Matrix<Scalar>& weight() { return weight_; }

    std::optional<LowRankAdapter<Scalar>>& slot(AdapterRole role) { return slots_[static_cast<int>(role)]; }
    const std::optional<LowRankAdapter<Scalar>>& slot(AdapterRole role) const {
        return slots_[static_cast<int>(role)];
    }

    // X is length x in; returns length x out.
    Matrix<Scalar> forward(const Matrix<Scalar>& X, const ActiveRoles& active) const {
        Matrix<Scalar> Y = X * weight_.transpose();
        for (AdapterRole role : kStackOrder) {
            const auto& a = slot(role);
            if (a && active[static_cast<int>(role)]) {
                Y.noalias() += a->scale() * ((X * a->A.transpose()) * a->B.transpose());
            }
        }
        return Y;
    }

    // Returns dL/dX and accumulates dL/dA, dL/dB into every active trainable
    // adapter. The base weight never receives a gradient.
    Matrix<Scalar> backward(const Matrix<Scalar>& X, const Matrix<Scalar>& dY, const ActiveRoles& active) {
        Matrix<Scalar> dX = dY * weight_;
        for (AdapterRole role : kStackOrder) {
            auto& a = slot(role);
            if (!a || !active[static_cast<int>(role)]) continue;
            const Scalar s = a->scale();
            const Matrix<Scalar> dYB = dY * a->B;  // length x r
            dX.noalias() += s * (dYB * a->A);
            if (a->trainable) {
                if (a->grad_A.size() == 0) a->zero_grad();
                a->grad_B.noalias() += s * (dY.transpose() * (X * a->A.transpose()));
                a->grad_A.noalias() += s * (dYB.transpose() * X);
            }
        }
        return dX;
    }

private:
    std::string name_;
    Matrix<Scalar> weight_;
    std::array<std::optional<LowRankAdapter<Scalar>>, 2> slots_;
};

}  // namespace lordd::adapters
