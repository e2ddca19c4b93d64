#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "padam/errors.hpp"
#include "padam/nn.hpp"
#include "padam/objective.hpp"
#include "padam/rng.hpp"

namespace padam {

inline constexpr double kPi = 3.14159265358979323846;

/// Solution of du/dt = Laplace(u), u(0,x) = ||x||^2: u(t,x) = ||x||^2 + 2dt.
inline double exact_heat_solution(std::span<const double> x, double t, int d) {
    if (static_cast<int>(x.size()) != d) {
        throw ShapeError("exact_heat_solution: point dimension does not match d");
    }
    double norm2 = 0.0;
    for (double v : x) norm2 += v * v;
    return norm2 + 2.0 * d * t;
}

/// 2 * (theta - batch mean of X); the exact gradient of the batch-mean
/// quadratic loss. Targets are unused.
inline ParamVector quadratic_grad(const ParamVector& params, const Batch& batch) {
    const int d = static_cast<int>(params.size());
    if (batch.inputs.cols != d) throw ShapeError("quadratic_grad: sample dimension mismatch");
    if (batch.inputs.rows < 1) throw ShapeError("quadratic_grad: empty batch");
    ParamVector grad(params.size(), 0.0);
    for (int j = 0; j < batch.inputs.rows; ++j) {
        const double* xj = batch.inputs.row(j);
        for (int i = 0; i < d; ++i) grad[i] += xj[i];
    }
    const double inv_j = 1.0 / batch.inputs.rows;
    for (int i = 0; i < d; ++i) grad[i] = 2.0 * (params[i] - grad[i] * inv_j);
    return grad;
}

/// Horner evaluation of sum_k theta_k x^k.
inline double polyreg_model(const ParamVector& theta, double x) {
    double acc = 0.0;
    for (std::size_t k = theta.size(); k-- > 0;) {
        acc = acc * x + theta[k];
    }
    return acc;
}

/// Inputs x_j ~ U(-1,1), targets sin(pi x_j) + sqrt(noise_var) * Z_j.
/// All inputs are drawn first, then the noise.
inline Batch polyreg_sample(RngStream& stream, int batch_size, double noise_var = 0.2) {
    if (batch_size < 1) throw std::invalid_argument("polyreg_sample: batch_size must be >= 1");
    Batch b{Matrix(batch_size, 1), Matrix(batch_size, 1)};
    for (int j = 0; j < batch_size; ++j) {
        b.inputs(j, 0) = stream.uniform(-1.0, 1.0);
    }
    const double scale = std::sqrt(noise_var);
    for (int j = 0; j < batch_size; ++j) {
        b.targets(j, 0) = std::sin(kPi * b.inputs(j, 0)) + scale * stream.standard_normal();
    }
    return b;
}

/// Base points xi_j ~ U([-1,1]^d) first, then the diffusion endpoints
/// xi_j + sqrt(2T) Z_j with Z_j standard normal; targets are the squared
/// endpoint norms.
inline Batch heat_dkm_sample(RngStream& stream, int batch_size, int d, double terminal_time) {
    if (batch_size < 1) throw std::invalid_argument("heat_dkm_sample: batch_size must be >= 1");
    if (d < 1) throw std::invalid_argument("heat_dkm_sample: d must be >= 1");
    Batch b{Matrix(batch_size, d), Matrix(batch_size, 1)};
    for (int j = 0; j < batch_size; ++j) {
        for (int i = 0; i < d; ++i) b.inputs(j, i) = stream.uniform(-1.0, 1.0);
    }
    const double diffusion = std::sqrt(2.0 * terminal_time);
    for (int j = 0; j < batch_size; ++j) {
        const double* xi = b.inputs.row(j);
        double norm2 = 0.0;
        for (int i = 0; i < d; ++i) {
            const double endpoint = xi[i] + diffusion * stream.standard_normal();
            norm2 += endpoint * endpoint;
        }
        b.targets(j, 0) = norm2;
    }
    return b;
}

/// Monte Carlo estimate of sqrt(sum (model - exact)^2 / sum exact^2) over
/// mc_samples domain points. model is evaluated in chunks:
///   model(const Matrix& points, std::span<double> out)
///   exact(std::span<const double> point) -> double
///   sample(RngStream&, std::span<double> point)
template <typename ModelFn, typename ExactFn, typename SampleFn>
double relative_l2_error(int dim, int mc_samples, RngStream& stream, ModelFn&& model,
                         ExactFn&& exact, SampleFn&& sample) {
    if (mc_samples < 1) throw std::invalid_argument("relative_l2_error: mc_samples must be >= 1");
    if (dim < 1) throw std::invalid_argument("relative_l2_error: dim must be >= 1");
    constexpr int kChunk = 1024;
    std::vector<double> values;
    double num = 0.0;
    double den = 0.0;
    int done = 0;
    while (done < mc_samples) {
        const int m = std::min(kChunk, mc_samples - done);
        Matrix points(m, dim);
        for (int j = 0; j < m; ++j) {
            sample(stream, std::span<double>(points.row(j), static_cast<std::size_t>(dim)));
        }
        values.assign(m, 0.0);
        model(points, std::span<double>(values));
        for (int j = 0; j < m; ++j) {
            const double e = exact(std::span<const double>(points.row(j), static_cast<std::size_t>(dim)));
            const double diff = values[j] - e;
            num += diff * diff;
            den += e * e;
        }
        done += m;
    }
    if (den == 0.0) {
        throw DegenerateReferenceError("relative_l2_error: reference is zero at every sample");
    }
    return std::sqrt(num / den);
}

/// Overload evaluating a scalar-output network as the model.
template <typename ExactFn, typename SampleFn>
double relative_l2_error(const MlpSpec& spec, const ParamVector& params, int mc_samples,
                         RngStream& stream, ExactFn&& exact, SampleFn&& sample) {
    if (spec.output_dim() != 1) {
        throw ShapeError("relative_l2_error: network must have a single output");
    }
    auto model = [&](const Matrix& points, std::span<double> out) {
        const Matrix y = forward(spec, params, points);
        for (int j = 0; j < y.rows; ++j) out[j] = y(j, 0);
    };
    return relative_l2_error(spec.input_dim(), mc_samples, stream, model,
                             std::forward<ExactFn>(exact), std::forward<SampleFn>(sample));
}

/// minimize E||theta - X||^2 with X d-dimensional standard normal; the
/// unique minimum sits at theta = 0 and the test error (1/d)||theta||^2 is
/// closed-form.
class QuadraticProblem final : public StochasticObjective {
public:
    explicit QuadraticProblem(int dim = 10) : dim_(dim) {
        if (dim < 1) throw std::invalid_argument("QuadraticProblem: dim must be >= 1");
    }

    int dim() const { return dim_; }
    int param_dim() const override { return dim_; }

    ParamVector initial_params(RngStream& stream) const override {
        ParamVector p(dim_);
        for (double& v : p) v = stream.standard_normal();
        return p;
    }

    Batch sample_batch(RngStream& stream, int batch_size) const override {
        if (batch_size < 1) throw std::invalid_argument("sample_batch: batch_size must be >= 1");
        Batch b{Matrix(batch_size, dim_), Matrix(batch_size, 0)};
        for (double& v : b.inputs.data) v = stream.standard_normal();
        return b;
    }

    double loss(const ParamVector& params, const Batch& batch) const override {
        if (batch.inputs.cols != dim_) throw ShapeError("QuadraticProblem::loss: dimension mismatch");
        double total = 0.0;
        for (int j = 0; j < batch.inputs.rows; ++j) {
            const double* xj = batch.inputs.row(j);
            for (int i = 0; i < dim_; ++i) {
                const double diff = params[i] - xj[i];
                total += diff * diff;
            }
        }
        return total / batch.inputs.rows;
    }

    ParamVector grad(const ParamVector& params, const Batch& batch) const override {
        return quadratic_grad(params, batch);
    }

    // closed form, consumes no randomness
    double test_error(const ParamVector& params, RngStream&, int) const override {
        double norm2 = 0.0;
        for (double v : params) norm2 += v * v;
        return norm2 / dim_;
    }

private:
    int dim_;
};

/// Fit sin(pi x) on [-1,1] with a degree-25 polynomial in the raw monomial
/// basis; training targets carry centered Gaussian noise.
class PolyRegProblem final : public StochasticObjective {
public:
    explicit PolyRegProblem(int degree = 25, double noise_var = 0.2)
        : degree_(degree), noise_var_(noise_var) {
        if (degree < 0) throw std::invalid_argument("PolyRegProblem: degree must be >= 0");
        if (noise_var < 0.0) throw std::invalid_argument("PolyRegProblem: noise_var must be >= 0");
    }

    int degree() const { return degree_; }
    int param_dim() const override { return degree_ + 1; }

    ParamVector initial_params(RngStream&) const override {
        return ParamVector(static_cast<std::size_t>(degree_) + 1, 0.0);
    }

    Batch sample_batch(RngStream& stream, int batch_size) const override {
        return polyreg_sample(stream, batch_size, noise_var_);
    }

    double loss(const ParamVector& params, const Batch& batch) const override {
        double total = 0.0;
        for (int j = 0; j < batch.inputs.rows; ++j) {
            const double diff = polyreg_model(params, batch.inputs(j, 0)) - batch.targets(j, 0);
            total += diff * diff;
        }
        return total / batch.inputs.rows;
    }

    ParamVector grad(const ParamVector& params, const Batch& batch) const override {
        ParamVector g(params.size(), 0.0);
        const double scale = 2.0 / batch.inputs.rows;
        for (int j = 0; j < batch.inputs.rows; ++j) {
            const double x = batch.inputs(j, 0);
            const double resid = scale * (polyreg_model(params, x) - batch.targets(j, 0));
            double power = 1.0;
            for (std::size_t k = 0; k < g.size(); ++k) {
                g[k] += resid * power;
                power *= x;
            }
        }
        return g;
    }

    /// Noiseless relative L2 error against sin(pi x) on U(-1,1).
    double test_error(const ParamVector& params, RngStream& stream, int mc_samples) const override {
        auto model = [&](const Matrix& points, std::span<double> out) {
            for (int j = 0; j < points.rows; ++j) out[j] = polyreg_model(params, points(j, 0));
        };
        auto exact = [](std::span<const double> x) { return std::sin(kPi * x[0]); };
        auto sample = [](RngStream& s, std::span<double> x) { x[0] = s.uniform(-1.0, 1.0); };
        return relative_l2_error(1, mc_samples, stream, model, exact, sample);
    }

private:
    int degree_;
    double noise_var_;
};

/// Supervised fit of the Gaussian density exp(-||x||^2 / (2 sigma^2)) on
/// U([-2,2]^d) with a ReLU network.
class GaussianDensityProblem final : public StochasticObjective {
public:
    explicit GaussianDensityProblem(int dim = 5, std::vector<int> hidden = {32, 32},
                                    double sigma2 = 3.0)
        : dim_(dim), sigma2_(sigma2) {
        if (dim < 1) throw std::invalid_argument("GaussianDensityProblem: dim must be >= 1");
        if (!(sigma2 > 0.0)) throw std::invalid_argument("GaussianDensityProblem: sigma2 must be > 0");
        net_.layer_widths.push_back(dim);
        for (int h : hidden) net_.layer_widths.push_back(h);
        net_.layer_widths.push_back(1);
        net_.activation = Activation::ReLU;
        net_.validate();
    }

    const MlpSpec& net() const { return net_; }
    double target(std::span<const double> x) const {
        double norm2 = 0.0;
        for (double v : x) norm2 += v * v;
        return std::exp(-norm2 / (2.0 * sigma2_));
    }

    int param_dim() const override { return static_cast<int>(net_.param_count()); }

    ParamVector initial_params(RngStream& stream) const override { return init_params(net_, stream); }

    Batch sample_batch(RngStream& stream, int batch_size) const override {
        if (batch_size < 1) throw std::invalid_argument("sample_batch: batch_size must be >= 1");
        Batch b{Matrix(batch_size, dim_), Matrix(batch_size, 1)};
        for (int j = 0; j < batch_size; ++j) {
            for (int i = 0; i < dim_; ++i) b.inputs(j, i) = stream.uniform(-2.0, 2.0);
        }
        for (int j = 0; j < batch_size; ++j) {
            b.targets(j, 0) = target(std::span<const double>(b.inputs.row(j), dim_));
        }
        return b;
    }

    double loss(const ParamVector& params, const Batch& batch) const override {
        return mse_loss(net_, params, batch);
    }

    ParamVector grad(const ParamVector& params, const Batch& batch) const override {
        return mse_loss_and_grad(net_, params, batch).grad;
    }

    double test_error(const ParamVector& params, RngStream& stream, int mc_samples) const override {
        auto exact = [&](std::span<const double> x) { return target(x); };
        auto sample = [&](RngStream& s, std::span<double> x) {
            for (double& v : x) v = s.uniform(-2.0, 2.0);
        };
        return relative_l2_error(net_, params, mc_samples, stream, exact, sample);
    }

private:
    int dim_;
    double sigma2_;
    MlpSpec net_;
};

/// Deep Kolmogorov reformulation of the heat equation du/dt = Laplace(u),
/// u(0,x) = ||x||^2: regress terminal payoffs ||xi + sqrt(2T) Z||^2 on the
/// base point xi with a GELU network; the exact solution ||x||^2 + 2dT is
/// the error reference.
class HeatDkmProblem final : public StochasticObjective {
public:
    explicit HeatDkmProblem(int dim = 5, std::vector<int> hidden = {32, 32},
                            double terminal_time = 2.0)
        : dim_(dim), terminal_time_(terminal_time) {
        if (dim < 1) throw std::invalid_argument("HeatDkmProblem: dim must be >= 1");
        if (terminal_time < 0.0) throw std::invalid_argument("HeatDkmProblem: T must be >= 0");
        net_.layer_widths.push_back(dim);
        for (int h : hidden) net_.layer_widths.push_back(h);
        net_.layer_widths.push_back(1);
        net_.activation = Activation::GELU;
        net_.validate();
    }

    const MlpSpec& net() const { return net_; }
    double terminal_time() const { return terminal_time_; }

    int param_dim() const override { return static_cast<int>(net_.param_count()); }

    ParamVector initial_params(RngStream& stream) const override { return init_params(net_, stream); }

    Batch sample_batch(RngStream& stream, int batch_size) const override {
        return heat_dkm_sample(stream, batch_size, dim_, terminal_time_);
    }

    double loss(const ParamVector& params, const Batch& batch) const override {
        return mse_loss(net_, params, batch);
    }

    ParamVector grad(const ParamVector& params, const Batch& batch) const override {
        return mse_loss_and_grad(net_, params, batch).grad;
    }

    double test_error(const ParamVector& params, RngStream& stream, int mc_samples) const override {
        auto exact = [&](std::span<const double> x) {
            return exact_heat_solution(x, terminal_time_, dim_);
        };
        auto sample = [&](RngStream& s, std::span<double> x) {
            for (double& v : x) v = s.uniform(-1.0, 1.0);
        };
        return relative_l2_error(net_, params, mc_samples, stream, exact, sample);
    }

private:
    int dim_;
    double terminal_time_;
    MlpSpec net_;
};

}  // namespace padam
