#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "padam/errors.hpp"
#include "padam/rng.hpp"

namespace padam {

/// Flat vector of trainable parameters, laid out layer by layer as
/// (weight matrix row-major [out x in], then bias vector).
using ParamVector = std::vector<double>;

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;  // row-major

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
};

struct Batch {
    Matrix inputs;   // J x d_in
    Matrix targets;  // J x d_out
    int size() const { return inputs.rows; }
};

enum class Activation { ReLU, GELU, Identity };

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
// derivative at exactly 0 is fixed to 0
inline double relu_grad(double x) { return x > 0.0 ? 1.0 : 0.0; }

/// x * Phi(x) with the exact standard normal CDF via erf.
inline double gelu(double x) {
    return 0.5 * x * (1.0 + std::erf(x * 0.70710678118654752440));
}

inline double gelu_grad(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x * 0.70710678118654752440));
    const double pdf = 0.39894228040143267794 * std::exp(-0.5 * x * x);
    return cdf + x * pdf;
}

inline double activate(Activation a, double x) {
    switch (a) {
        case Activation::ReLU: return relu(x);
        case Activation::GELU: return gelu(x);
        case Activation::Identity: return x;
    }
    return x;
}

// value and derivative together; GELU shares the erf between the two
inline void activate_with_grad(Activation a, double x, double& value, double& grad) {
    switch (a) {
        case Activation::ReLU:
            value = relu(x);
            grad = relu_grad(x);
            return;
        case Activation::GELU: {
            const double cdf = 0.5 * (1.0 + std::erf(x * 0.70710678118654752440));
            const double pdf = 0.39894228040143267794 * std::exp(-0.5 * x * x);
            value = x * cdf;
            grad = cdf + x * pdf;
            return;
        }
        case Activation::Identity:
            value = x;
            grad = 1.0;
            return;
    }
}

/// Fully connected feed-forward network: hidden layers use the configured
/// activation, the output layer is affine.
struct MlpSpec {
    std::vector<int> layer_widths;  // [d_in, h_1, ..., h_L, d_out]
    Activation activation = Activation::ReLU;

    int input_dim() const { return layer_widths.front(); }
    int output_dim() const { return layer_widths.back(); }
    int layer_count() const { return static_cast<int>(layer_widths.size()) - 1; }

    std::size_t param_count() const {
        std::size_t n = 0;
        for (std::size_t i = 0; i + 1 < layer_widths.size(); ++i) {
            n += static_cast<std::size_t>(layer_widths[i] + 1) * layer_widths[i + 1];
        }
        return n;
    }

    void validate() const {
        if (layer_widths.size() < 2) {
            throw ShapeError("MlpSpec: need at least input and output widths");
        }
        for (int w : layer_widths) {
            if (w < 1) throw ShapeError("MlpSpec: all layer widths must be >= 1");
        }
    }
};

/// Glorot-uniform weights, zero biases. Weights are drawn in storage order,
/// so the stream consumption is reproducible.
inline ParamVector init_params(const MlpSpec& spec, RngStream& stream) {
    spec.validate();
    ParamVector params(spec.param_count(), 0.0);
    std::size_t off = 0;
    for (int l = 0; l < spec.layer_count(); ++l) {
        const int fan_in = spec.layer_widths[l];
        const int fan_out = spec.layer_widths[l + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        const std::size_t weights = static_cast<std::size_t>(fan_in) * fan_out;
        for (std::size_t k = 0; k < weights; ++k) {
            params[off + k] = stream.uniform(-bound, bound);
        }
        off += weights + fan_out;  // biases stay zero
    }
    return params;
}

namespace detail {

inline void check_net_shapes(const MlpSpec& spec, const ParamVector& params, const Matrix& inputs) {
    spec.validate();
    if (params.size() != spec.param_count()) {
        throw ShapeError("parameter vector length " + std::to_string(params.size()) +
                         " does not match spec param count " + std::to_string(spec.param_count()));
    }
    if (inputs.cols != spec.input_dim()) {
        throw ShapeError("input width " + std::to_string(inputs.cols) +
                         " does not match spec input dim " + std::to_string(spec.input_dim()));
    }
    if (inputs.rows < 1) throw ShapeError("batch must contain at least one row");
}

// z = x W^T + b for one layer, W is [out x in] row-major
inline void affine(const Matrix& x, const double* W, const double* b, Matrix& z) {
    const int in = x.cols;
    const int out = z.cols;
    for (int j = 0; j < x.rows; ++j) {
        const double* xr = x.row(j);
        double* zr = z.row(j);
        for (int o = 0; o < out; ++o) {
            const double* w = W + static_cast<std::size_t>(o) * in;
            double s = b[o];
            for (int i = 0; i < in; ++i) s += w[i] * xr[i];
            zr[o] = s;
        }
    }
}

}  // namespace detail

inline Matrix forward(const MlpSpec& spec, const ParamVector& params, const Matrix& inputs) {
    detail::check_net_shapes(spec, params, inputs);
    Matrix cur = inputs;
    std::size_t off = 0;
    for (int l = 0; l < spec.layer_count(); ++l) {
        const int in = spec.layer_widths[l];
        const int out = spec.layer_widths[l + 1];
        const double* W = params.data() + off;
        const double* b = W + static_cast<std::size_t>(in) * out;
        Matrix next(cur.rows, out);
        detail::affine(cur, W, b, next);
        if (l + 1 < spec.layer_count()) {
            for (double& v : next.data) v = activate(spec.activation, v);
        }
        cur = std::move(next);
        off += static_cast<std::size_t>(in + 1) * out;
    }
    return cur;
}

/// (1/J) * sum_j ||forward(x_j) - y_j||^2
inline double mse_loss(const MlpSpec& spec, const ParamVector& params, const Batch& batch) {
    if (batch.targets.rows != batch.inputs.rows) {
        throw ShapeError("batch inputs and targets row counts differ");
    }
    if (batch.targets.cols != spec.output_dim()) {
        throw ShapeError("target width does not match spec output dim");
    }
    const Matrix out = forward(spec, params, batch.inputs);
    double total = 0.0;
    for (std::size_t k = 0; k < out.data.size(); ++k) {
        const double diff = out.data[k] - batch.targets.data[k];
        total += diff * diff;
    }
    return total / batch.size();
}

struct LossAndGrad {
    double loss = 0.0;
    ParamVector grad;
};

/// Batch-mean squared error and its exact gradient via reverse-mode
/// accumulation. Throws NonFiniteError if the loss or any gradient
/// component is non-finite.
inline LossAndGrad mse_loss_and_grad(const MlpSpec& spec, const ParamVector& params, const Batch& batch) {
    detail::check_net_shapes(spec, params, batch.inputs);
    if (batch.targets.rows != batch.inputs.rows) {
        throw ShapeError("batch inputs and targets row counts differ");
    }
    if (batch.targets.cols != spec.output_dim()) {
        throw ShapeError("target width does not match spec output dim");
    }

    const int J = batch.inputs.rows;
    const int L = spec.layer_count();

    // layer offsets into the flat parameter vector
    std::vector<std::size_t> offsets(L);
    {
        std::size_t off = 0;
        for (int l = 0; l < L; ++l) {
            offsets[l] = off;
            off += static_cast<std::size_t>(spec.layer_widths[l] + 1) * spec.layer_widths[l + 1];
        }
    }

    // forward pass, keeping post-activation values and activation slopes
    std::vector<Matrix> acts(L + 1);
    std::vector<Matrix> slopes(L);  // slopes[l] used only for hidden layers
    acts[0] = batch.inputs;
    for (int l = 0; l < L; ++l) {
        const int in = spec.layer_widths[l];
        const int out = spec.layer_widths[l + 1];
        const double* W = params.data() + offsets[l];
        const double* b = W + static_cast<std::size_t>(in) * out;
        Matrix z(J, out);
        detail::affine(acts[l], W, b, z);
        if (l + 1 < L) {
            slopes[l] = Matrix(J, out);
            for (std::size_t k = 0; k < z.data.size(); ++k) {
                activate_with_grad(spec.activation, z.data[k], z.data[k], slopes[l].data[k]);
            }
        }
        acts[l + 1] = std::move(z);
    }

    // loss and output delta
    const Matrix& pred = acts[L];
    double total = 0.0;
    Matrix delta(J, spec.output_dim());
    const double inv_j = 1.0 / J;
    for (std::size_t k = 0; k < pred.data.size(); ++k) {
        const double diff = pred.data[k] - batch.targets.data[k];
        total += diff * diff;
        delta.data[k] = 2.0 * inv_j * diff;
    }
    const double loss = total * inv_j;

    // backward pass
    ParamVector grad(params.size(), 0.0);
    std::vector<double> w_transposed;
    for (int l = L - 1; l >= 0; --l) {
        const int in = spec.layer_widths[l];
        const int out = spec.layer_widths[l + 1];
        const double* W = params.data() + offsets[l];
        double* gw = grad.data() + offsets[l];
        double* gb = gw + static_cast<std::size_t>(in) * out;
        const Matrix& a = acts[l];
        for (int j = 0; j < J; ++j) {
            const double* dj = delta.row(j);
            const double* aj = a.row(j);
            for (int o = 0; o < out; ++o) {
                const double d = dj[o];
                gb[o] += d;
                double* g = gw + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) g[i] += d * aj[i];
            }
        }
        if (l > 0) {
            w_transposed.assign(static_cast<std::size_t>(in) * out, 0.0);
            for (int o = 0; o < out; ++o) {
                for (int i = 0; i < in; ++i) {
                    w_transposed[static_cast<std::size_t>(i) * out + o] =
                        W[static_cast<std::size_t>(o) * in + i];
                }
            }
            Matrix prev(J, in);
            const Matrix& slope = slopes[l - 1];
            for (int j = 0; j < J; ++j) {
                const double* dj = delta.row(j);
                const double* sj = slope.row(j);
                double* pj = prev.row(j);
                for (int i = 0; i < in; ++i) {
                    const double* wt = w_transposed.data() + static_cast<std::size_t>(i) * out;
                    double s = 0.0;
                    for (int o = 0; o < out; ++o) s += dj[o] * wt[o];
                    pj[i] = s * sj[i];
                }
            }
            delta = std::move(prev);
        }
    }

    if (!std::isfinite(loss)) {
        throw NonFiniteError("mse_loss_and_grad: loss is non-finite", -1);
    }
    for (std::size_t k = 0; k < grad.size(); ++k) {
        if (!std::isfinite(grad[k])) {
            throw NonFiniteError("mse_loss_and_grad: gradient component " + std::to_string(k) +
                                     " is non-finite",
                                 static_cast<long>(k));
        }
    }
    return LossAndGrad{loss, std::move(grad)};
}

}  // namespace padam
