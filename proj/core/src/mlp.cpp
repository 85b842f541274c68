#include "terra/mlp.hpp"

#include <cmath>
#include <string>

#include "terra/error.hpp"

namespace terra::nn {

Normalization Normalization::identity(Eigen::Index dim) {
    return Normalization{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Normalization Normalization::from_range(const Eigen::Ref<const Eigen::MatrixXd>& data) {
    const Eigen::Index dim = data.cols();
    Normalization norm = identity(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        const double lo = data.col(j).minCoeff();
        const double hi = data.col(j).maxCoeff();
        norm.offset(j) = 0.5 * (lo + hi);
        norm.gain(j) = hi > lo ? 2.0 / (hi - lo) : 1.0;
    }
    return norm;
}

Mlp::Mlp(std::vector<int> widths) : widths_(std::move(widths)) {
    if (widths_.size() < 2) throw InvalidArgument("network needs at least input and output widths");
    for (int w : widths_) {
        if (w < 1) throw InvalidArgument("layer widths must be positive");
    }
    for (std::size_t l = 1; l < widths_.size(); ++l) {
        layers_.push_back(Layer{Eigen::MatrixXd::Zero(widths_[l], widths_[l - 1]),
                                Eigen::VectorXd::Zero(widths_[l])});
    }
    input_norm_ = Normalization::identity(widths_.front());
    output_norm_ = Normalization::identity(widths_.back());
}

void Mlp::set_input_norm(Normalization norm) {
    if (norm.size() != input_dim() || norm.gain.size() != input_dim()) {
        throw InvalidArgument("input normalization has the wrong dimension");
    }
    input_norm_ = std::move(norm);
}

void Mlp::set_output_norm(Normalization norm) {
    if (norm.size() != output_dim() || norm.gain.size() != output_dim()) {
        throw InvalidArgument("output normalization has the wrong dimension");
    }
    output_norm_ = std::move(norm);
}

Eigen::VectorXd Mlp::normalize_input(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != input_dim()) {
        throw InvalidArgument("network input has " + std::to_string(x.size()) +
                              " entries, expected " + std::to_string(input_dim()));
    }
    if (!x.allFinite()) throw InvalidArgument("network input is not finite");
    return (x - input_norm_.offset).cwiseProduct(input_norm_.gain);
}

Eigen::VectorXd Mlp::forward(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    Eigen::VectorXd h = normalize_input(x);
    const std::size_t last = layers_.size() - 1;
    for (std::size_t l = 0; l < last; ++l) {
        h = (layers_[l].weights * h + layers_[l].bias).array().tanh().matrix();
    }
    Eigen::VectorXd out = layers_[last].weights * h + layers_[last].bias;
    return out.cwiseQuotient(output_norm_.gain) + output_norm_.offset;
}

double Mlp::value(const Eigen::Ref<const Eigen::VectorXd>& x) const { return forward(x)(0); }

Eigen::MatrixXd Mlp::forward_normalized(const Eigen::Ref<const Eigen::MatrixXd>& xn) const {
    Eigen::MatrixXd h = xn;
    const std::size_t last = layers_.size() - 1;
    for (std::size_t l = 0; l < last; ++l) {
        h = ((layers_[l].weights * h).colwise() + layers_[l].bias).array().tanh().matrix();
    }
    return (layers_[last].weights * h).colwise() + layers_[last].bias;
}

Eigen::MatrixXd Mlp::predict(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const {
    if (inputs.cols() != input_dim()) throw InvalidArgument("input matrix has wrong width");
    if (!inputs.allFinite()) throw InvalidArgument("network input is not finite");
    const Eigen::MatrixXd xn =
        ((inputs.rowwise() - input_norm_.offset.transpose()).array().rowwise() *
         input_norm_.gain.transpose().array())
            .matrix()
            .transpose();
    Eigen::MatrixXd yn = forward_normalized(xn).transpose();
    return (yn.array().rowwise() / output_norm_.gain.transpose().array()).matrix().rowwise() +
           output_norm_.offset.transpose();
}

std::vector<Eigen::VectorXd> Mlp::hidden_activations(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    std::vector<Eigen::VectorXd> out;
    Eigen::VectorXd h = normalize_input(x);
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
        h = (layers_[l].weights * h + layers_[l].bias).array().tanh().matrix();
        out.push_back(h);
    }
    return out;
}

Eigen::MatrixXd Mlp::jacobian(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const std::size_t last = layers_.size() - 1;
    std::vector<Eigen::VectorXd> h(last + 1);
    h[0] = normalize_input(x);
    for (std::size_t l = 0; l < last; ++l) {
        h[l + 1] = (layers_[l].weights * h[l] + layers_[l].bias).array().tanh().matrix();
    }
    // Rows of g are d(normalized output)/d(layer input), one row per output.
    Eigen::MatrixXd g = layers_[last].weights;
    for (std::size_t l = last; l-- > 0;) {
        const Eigen::ArrayXd slope = 1.0 - h[l + 1].array().square();
        g = (g.array().rowwise() * slope.transpose()).matrix() * layers_[l].weights;
    }
    return (g.array().colwise() / output_norm_.gain.array()).rowwise() *
           input_norm_.gain.transpose().array();
}

Eigen::VectorXd Mlp::hessian_vec(const Eigen::Ref<const Eigen::VectorXd>& x,
                                 const Eigen::Ref<const Eigen::VectorXd>& v, int output) const {
    if (v.size() != input_dim()) throw InvalidArgument("direction has the wrong dimension");
    if (output < 0 || output >= output_dim()) throw InvalidArgument("output index out of range");
    const std::size_t last = layers_.size() - 1;

    // Forward pass carrying the directional tangent of every activation.
    std::vector<Eigen::VectorXd> h(last + 1);
    std::vector<Eigen::VectorXd> dh(last + 1);
    h[0] = normalize_input(x);
    dh[0] = v.cwiseProduct(input_norm_.gain);
    for (std::size_t l = 0; l < last; ++l) {
        h[l + 1] = (layers_[l].weights * h[l] + layers_[l].bias).array().tanh().matrix();
        const Eigen::VectorXd da = layers_[l].weights * dh[l];
        dh[l + 1] = (1.0 - h[l + 1].array().square()).matrix().cwiseProduct(da);
    }

    // Reverse pass for the gradient, differentiated along the tangent.
    Eigen::VectorXd g = layers_[last].weights.row(output).transpose();
    Eigen::VectorXd dg = Eigen::VectorXd::Zero(g.size());
    for (std::size_t l = last; l-- > 0;) {
        const Eigen::ArrayXd hl = h[l + 1].array();
        const Eigen::ArrayXd slope = 1.0 - hl.square();
        const Eigen::VectorXd ga = (slope * g.array()).matrix();
        const Eigen::VectorXd dga =
            (slope * dg.array() - 2.0 * hl * dh[l + 1].array() * g.array()).matrix();
        g = layers_[l].weights.transpose() * ga;
        dg = layers_[l].weights.transpose() * dga;
    }
    return dg.cwiseProduct(input_norm_.gain) / output_norm_.gain(output);
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) {
        n += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
    }
    return n;
}

Eigen::VectorXd Mlp::parameters() const {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index k = 0;
    for (const auto& layer : layers_) {
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) theta(k++) = layer.weights(i, j);
        }
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) theta(k++) = layer.bias(i);
    }
    return theta;
}

void Mlp::set_parameters(const Eigen::Ref<const Eigen::VectorXd>& theta) {
    if (static_cast<std::size_t>(theta.size()) != parameter_count()) {
        throw InvalidArgument("parameter vector has the wrong length");
    }
    Eigen::Index k = 0;
    for (auto& layer : layers_) {
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = theta(k++);
        }
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = theta(k++);
    }
}

bool Mlp::all_finite() const {
    for (const auto& layer : layers_) {
        if (!layer.weights.allFinite() || !layer.bias.allFinite()) return false;
    }
    return input_norm_.offset.allFinite() && input_norm_.gain.allFinite() &&
           output_norm_.offset.allFinite() && output_norm_.gain.allFinite();
}

} // namespace terra::nn
