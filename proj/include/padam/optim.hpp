#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "padam/errors.hpp"
#include "padam/nn.hpp"
#include "padam/objective.hpp"
#include "padam/rng.hpp"

namespace padam {

struct HyperParams {
    double lr = 0.01;           // constant learning rate
    double alpha = 0.9;         // first-moment decay
    double beta = 0.999;        // second-moment decay
    double eps = 1e-8;
    double momentum = 0.9;      // momentum SGD only
    double weight_decay = 0.01; // AdamW only

    void validate() const {
        if (!(lr > 0.0)) throw std::invalid_argument("lr must be > 0");
        if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0,1)");
        if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0,1)");
        if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
        if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0,1)");
        if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight_decay must be >= 0");
    }
};

namespace detail {

inline void check_lengths(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw ShapeError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
    }
}

inline void check_finite(const ParamVector& v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw NonFiniteError(std::string(what) + ": component " + std::to_string(i) +
                                     " is non-finite",
                                 static_cast<long>(i));
        }
    }
}

}  // namespace detail

inline void sgd_step(ParamVector& params, const ParamVector& grad, const HyperParams& hp) {
    detail::check_lengths(params.size(), grad.size(), "sgd_step");
    detail::check_finite(grad, "sgd_step: gradient");
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] -= hp.lr * grad[i];
    }
    detail::check_finite(params, "sgd_step: parameters");
}

inline void momentum_sgd_step(ParamVector& velocity, ParamVector& params, const ParamVector& grad,
                              const HyperParams& hp) {
    detail::check_lengths(params.size(), grad.size(), "momentum_sgd_step");
    detail::check_lengths(params.size(), velocity.size(), "momentum_sgd_step");
    detail::check_finite(grad, "momentum_sgd_step: gradient");
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = hp.momentum * velocity[i] + grad[i];
        params[i] -= hp.lr * velocity[i];
    }
    detail::check_finite(params, "momentum_sgd_step: parameters");
}

struct AdamState {
    ParamVector m;           // first moment
    ParamVector v;           // second moment, componentwise >= 0
    long n = 0;              // completed steps
    double prod_alpha = 1.0; // running product of alpha over steps 1..n
    double prod_beta = 1.0;

    AdamState() = default;
    explicit AdamState(std::size_t dim) : m(dim, 0.0), v(dim, 0.0) {}
};

/// One Adam step on the batch-averaged gradient. The stability constant is
/// added next to the root: params -= lr * m_hat / (eps + sqrt(v_hat)).
inline void adam_step(AdamState& state, ParamVector& params, const ParamVector& grad,
                      const HyperParams& hp) {
    detail::check_lengths(params.size(), grad.size(), "adam_step");
    detail::check_lengths(params.size(), state.m.size(), "adam_step: state");
    if (!(hp.alpha >= 0.0 && hp.alpha < 1.0) || !(hp.beta >= 0.0 && hp.beta < 1.0)) {
        throw std::invalid_argument("adam_step: alpha and beta must lie in [0,1)");
    }
    if (!(hp.eps > 0.0)) throw std::invalid_argument("adam_step: eps must be > 0");
    detail::check_finite(grad, "adam_step: gradient");

    state.n += 1;
    state.prod_alpha *= hp.alpha;
    state.prod_beta *= hp.beta;
    const double m_corr = 1.0 - state.prod_alpha;
    const double v_corr = 1.0 - state.prod_beta;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        state.m[i] = hp.alpha * state.m[i] + (1.0 - hp.alpha) * g;
        state.v[i] = hp.beta * state.v[i] + (1.0 - hp.beta) * g * g;
        const double m_hat = state.m[i] / m_corr;
        const double v_hat = state.v[i] / v_corr;
        params[i] -= hp.lr * m_hat / (hp.eps + std::sqrt(v_hat));
    }
    detail::check_finite(params, "adam_step: parameters");
}

/// Adam step followed by decoupled weight decay on the pre-update parameters.
inline void adamw_step(AdamState& state, ParamVector& params, const ParamVector& grad,
                       const HyperParams& hp) {
    detail::check_lengths(params.size(), grad.size(), "adamw_step");
    detail::check_lengths(params.size(), state.m.size(), "adamw_step: state");
    if (!(hp.alpha >= 0.0 && hp.alpha < 1.0) || !(hp.beta >= 0.0 && hp.beta < 1.0)) {
        throw std::invalid_argument("adamw_step: alpha and beta must lie in [0,1)");
    }
    if (!(hp.eps > 0.0)) throw std::invalid_argument("adamw_step: eps must be > 0");
    if (!(hp.weight_decay >= 0.0)) throw std::invalid_argument("adamw_step: weight_decay must be >= 0");
    detail::check_finite(grad, "adamw_step: gradient");

    state.n += 1;
    state.prod_alpha *= hp.alpha;
    state.prod_beta *= hp.beta;
    const double m_corr = 1.0 - state.prod_alpha;
    const double v_corr = 1.0 - state.prod_beta;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i];
        const double p_before = params[i];
        state.m[i] = hp.alpha * state.m[i] + (1.0 - hp.alpha) * g;
        state.v[i] = hp.beta * state.v[i] + (1.0 - hp.beta) * g * g;
        const double m_hat = state.m[i] / m_corr;
        const double v_hat = state.v[i] / v_corr;
        params[i] = p_before - hp.lr * m_hat / (hp.eps + std::sqrt(v_hat)) -
                    hp.lr * hp.weight_decay * p_before;
    }
    detail::check_finite(params, "adamw_step: parameters");
}

/// Averaging-weight schedule for one channel:
///   Constant       delta_n = c
///   PolynomialGap  delta_n = 1 - c * n^(-p)
///   ExpDecayGap    delta_n = 1 - c * exp(-r * n * ln(10) / N)
/// clamp_to_unit forces the produced value into [0,1) instead of failing
/// validation; used only for auditing the growing-exponent reading of the
/// PADAM10 channel-6 weight.
struct ChannelSpec {
    enum class Kind { Constant, PolynomialGap, ExpDecayGap };

    Kind kind = Kind::Constant;
    double c = 0.0;
    double p = 0.0;  // PolynomialGap exponent
    double r = 0.0;  // ExpDecayGap rate
    bool clamp_to_unit = false;

    static ChannelSpec constant(double value) {
        ChannelSpec s;
        s.kind = Kind::Constant;
        s.c = value;
        return s;
    }
    static ChannelSpec polynomial_gap(double c, double p) {
        ChannelSpec s;
        s.kind = Kind::PolynomialGap;
        s.c = c;
        s.p = p;
        return s;
    }
    static ChannelSpec exp_decay_gap(double c, double r) {
        ChannelSpec s;
        s.kind = Kind::ExpDecayGap;
        s.c = c;
        s.r = r;
        return s;
    }
};

/// delta_n for step n in 1..total_steps. Domain validity is enforced by
/// validate_channel at construction, not here.
inline double schedule_delta(const ChannelSpec& spec, long n, long total_steps) {
    if (n < 1 || n > total_steps) {
        throw std::invalid_argument("schedule_delta: n must lie in [1, total_steps]");
    }
    double delta = 0.0;
    switch (spec.kind) {
        case ChannelSpec::Kind::Constant:
            delta = spec.c;
            break;
        case ChannelSpec::Kind::PolynomialGap:
            delta = 1.0 - spec.c * std::pow(static_cast<double>(n), -spec.p);
            break;
        case ChannelSpec::Kind::ExpDecayGap:
            delta = 1.0 - spec.c * std::exp(-spec.r * static_cast<double>(n) *
                                            2.30258509299404568402 / static_cast<double>(total_steps));
            break;
    }
    if (spec.clamp_to_unit) {
        delta = std::clamp(delta, 0.0, 0x1.fffffffffffffp-1);
    }
    return delta;
}

/// Every schedule form is monotone in n, so checking both endpoints covers
/// the whole range 1..total_steps.
inline void validate_channel(const ChannelSpec& spec, long total_steps) {
    if (total_steps < 1) throw std::invalid_argument("validate_channel: total_steps must be >= 1");
    for (long n : {1L, total_steps}) {
        const double delta = schedule_delta(spec, n, total_steps);
        if (!(delta >= 0.0 && delta < 1.0)) {
            throw ScheduleDomainError("channel schedule produces delta " + std::to_string(delta) +
                                      " outside [0,1) at n=" + std::to_string(n));
        }
    }
}

/// channel <- delta * channel + (1 - delta) * current, componentwise.
inline void ema_update(ParamVector& channel, const ParamVector& current, double delta) {
    detail::check_lengths(channel.size(), current.size(), "ema_update");
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw std::invalid_argument("ema_update: delta must lie in [0,1]");
    }
    const double keep = delta;
    const double take = 1.0 - delta;
    for (std::size_t i = 0; i < channel.size(); ++i) {
        channel[i] = keep * channel[i] + take * current[i];
    }
}

/// 1-based index of the smallest finite loss; ties break to the lowest
/// index, non-finite entries are excluded.
inline int select_channel(const std::vector<double>& channel_losses) {
    if (channel_losses.empty()) {
        throw SelectionError("select_channel: no channels to select from");
    }
    int best = -1;
    double best_loss = 0.0;
    for (std::size_t k = 0; k < channel_losses.size(); ++k) {
        const double l = channel_losses[k];
        if (!std::isfinite(l)) continue;
        if (best < 0 || l < best_loss) {
            best = static_cast<int>(k);
            best_loss = l;
        }
    }
    if (best < 0) {
        throw SelectionError("select_channel: every channel loss is non-finite");
    }
    return best + 1;
}

/// Parallel averaged Adam: one underlying Adam iterate plus K averaging
/// channels. The channels never feed back into the raw trajectory, so raw
/// stays bitwise identical to a standalone Adam run on the same stream.
struct PadamState {
    AdamState adam;
    ParamVector raw;                    // underlying Adam iterate
    std::vector<ParamVector> channels;  // K averaged iterates
    std::vector<ChannelSpec> specs;
    long total_steps = 0;
    int best_index = 1;  // 1-based, result of the last selection

    PadamState(ParamVector initial, std::vector<ChannelSpec> channel_specs, long planned_steps)
        : adam(initial.size()),
          raw(std::move(initial)),
          specs(std::move(channel_specs)),
          total_steps(planned_steps) {
        if (specs.empty()) throw std::invalid_argument("PadamState: need at least one channel");
        for (const ChannelSpec& s : specs) validate_channel(s, total_steps);
        channels.assign(specs.size(), raw);
    }

    int channel_count() const { return static_cast<int>(channels.size()); }
    const ParamVector& selected() const { return channels[best_index - 1]; }
};

/// Advances the underlying Adam iterate, then folds it into every channel.
/// grad must be evaluated at state.raw. Selection is not performed here;
/// the driver triggers evaluate_and_select on its own cadence.
inline void padam_step(PadamState& state, const ParamVector& grad, const HyperParams& hp) {
    adam_step(state.adam, state.raw, grad, hp);
    const long n = state.adam.n;
    for (std::size_t k = 0; k < state.channels.size(); ++k) {
        ema_update(state.channels[k], state.raw, schedule_delta(state.specs[k], n, state.total_steps));
    }
}

/// Scores every channel on its own fresh batch (drawn back to back from the
/// stream, so the sample ranges are disjoint) and stores the winner.
inline void evaluate_and_select(PadamState& state, const StochasticObjective& objective,
                                RngStream& stream, int batch_size) {
    if (batch_size < 1) throw std::invalid_argument("evaluate_and_select: batch_size must be >= 1");
    std::vector<double> losses(state.channels.size());
    for (std::size_t k = 0; k < state.channels.size(); ++k) {
        const Batch batch = objective.sample_batch(stream, batch_size);
        losses[k] = objective.loss(state.channels[k], batch);
    }
    state.best_index = select_channel(losses);
}

inline std::vector<ChannelSpec> padam3_channels() {
    return {
        ChannelSpec::constant(0.999),
        ChannelSpec::polynomial_gap(1.0, 0.7),
        ChannelSpec::exp_decay_gap(0.1, 2.0),
    };
}

/// channel6_literal switches channel 6 to the growing-exponent form
/// 1 - 0.5*n^0.7 clamped into [0,1); the default uses the decaying
/// exponent that matches the rest of the family.
inline std::vector<ChannelSpec> padam10_channels(bool channel6_literal = false) {
    ChannelSpec sixth = ChannelSpec::polynomial_gap(0.5, 0.7);
    if (channel6_literal) {
        sixth = ChannelSpec::polynomial_gap(0.5, -0.7);
        sixth.clamp_to_unit = true;
    }
    return {
        ChannelSpec::constant(0.99),
        ChannelSpec::constant(0.999),
        ChannelSpec::polynomial_gap(1.0, 0.6),
        ChannelSpec::polynomial_gap(1.0, 0.7),
        ChannelSpec::polynomial_gap(1.0, 0.8),
        sixth,
        ChannelSpec::exp_decay_gap(0.1, 2.0),
        ChannelSpec::exp_decay_gap(0.01, 1.0),
        ChannelSpec::exp_decay_gap(0.1, 3.0),
        ChannelSpec::exp_decay_gap(0.1, 5.0),
    };
}

/// Single fixed-weight EMA channel; the Adam+EMA baseline.
inline std::vector<ChannelSpec> adam_ema_channels() {
    return {ChannelSpec::constant(0.999)};
}

}  // namespace padam
