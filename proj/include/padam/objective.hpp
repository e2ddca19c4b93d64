#pragma once

#include "padam/nn.hpp"
#include "padam/rng.hpp"

namespace padam {

/// A stochastic objective: minimize theta -> E[loss(theta, X)].
/// Implementations are immutable after construction; sampling needs an
/// exclusive stream per caller.
class StochasticObjective {
public:
    virtual ~StochasticObjective() = default;

    virtual int param_dim() const = 0;

    virtual ParamVector initial_params(RngStream& stream) const = 0;

    /// Draws a fresh mini-batch. Consumption order per batch is fixed:
    /// inputs first, then any noise, so replays are exact.
    virtual Batch sample_batch(RngStream& stream, int batch_size) const = 0;

    /// Mean per-sample loss over the batch.
    virtual double loss(const ParamVector& params, const Batch& batch) const = 0;

    /// Exact gradient of loss() w.r.t. params.
    virtual ParamVector grad(const ParamVector& params, const Batch& batch) const = 0;

    /// Test-error oracle, Monte Carlo with mc_samples draws unless the
    /// problem has a closed form.
    virtual double test_error(const ParamVector& params, RngStream& stream, int mc_samples) const = 0;
};

}  // namespace padam
