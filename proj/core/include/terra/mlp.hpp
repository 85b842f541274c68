// Feedforward tanh network with exact first and second derivatives.
//
// Hidden layers use tanh, the output layer is affine, and both ends carry an
// affine normalization record, so the network is C-infinity in its raw
// inputs. Derivatives are computed analytically: reverse mode for the
// jacobian, forward-over-reverse for Hessian-vector products.
#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace terra::nn {

struct Layer {
    Eigen::MatrixXd weights; ///< out x in
    Eigen::VectorXd bias;    ///< out
};

/// Per-feature affine map: normalized = (raw - offset) .* gain.
struct Normalization {
    Eigen::VectorXd offset;
    Eigen::VectorXd gain;

    static Normalization identity(Eigen::Index dim);
    /// Maps [min, max] of each column of `data` (rows = samples) onto [-1, 1].
    /// Constant columns get gain 1.
    static Normalization from_range(const Eigen::Ref<const Eigen::MatrixXd>& data);

    Eigen::Index size() const { return offset.size(); }
};

class Mlp {
public:
    Mlp() = default;
    /// Zero weights and identity normalization; `widths` = {in, hidden..., out}.
    explicit Mlp(std::vector<int> widths);

    const std::vector<int>& widths() const { return widths_; }
    int input_dim() const { return widths_.front(); }
    int output_dim() const { return widths_.back(); }

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }
    const Normalization& input_norm() const { return input_norm_; }
    const Normalization& output_norm() const { return output_norm_; }
    void set_input_norm(Normalization norm);
    void set_output_norm(Normalization norm);

    /// Raw-units output. Throws InvalidArgument on non-finite input.
    Eigen::VectorXd forward(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    /// First output only; the common case for the lateral-force surrogate.
    double value(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// Batched forward in normalized units; columns are samples.
    Eigen::MatrixXd forward_normalized(const Eigen::Ref<const Eigen::MatrixXd>& xn) const;
    /// Batched raw-units forward; rows are samples (dataset layout).
    Eigen::MatrixXd predict(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const;

    /// Hidden-layer activations for one raw input, first hidden layer first.
    std::vector<Eigen::VectorXd> hidden_activations(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// d output / d x in raw units, output_dim x input_dim.
    Eigen::MatrixXd jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    /// (d^2 output[k] / dx^2) v in raw units.
    Eigen::VectorXd hessian_vec(const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::Ref<const Eigen::VectorXd>& v, int output = 0) const;

    std::size_t parameter_count() const;
    /// Flattened parameters: per layer, weights row-major then bias.
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::Ref<const Eigen::VectorXd>& theta);

    bool all_finite() const;

private:
    Eigen::VectorXd normalize_input(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    std::vector<int> widths_;
    std::vector<Layer> layers_;
    Normalization input_norm_;
    Normalization output_norm_;
};

} // namespace terra::nn
