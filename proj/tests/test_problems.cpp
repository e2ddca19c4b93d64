#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "padam/problems.hpp"
#include "padam/rng.hpp"
#include "test_support.hpp"

using namespace padam;

TEST_CASE("quadratic_grad: stationarity at the batch mean") {
    Batch b{Matrix(1, 2), Matrix(1, 0)};
    b.inputs(0, 0) = 0.7;
    b.inputs(0, 1) = -0.3;
    const ParamVector g = quadratic_grad({0.7, -0.3}, b);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
}

TEST_CASE("quadratic_grad: hand case and finite differences") {
    Batch b{Matrix(1, 2), Matrix(1, 0)};
    const ParamVector g = quadratic_grad({1.0, 0.0}, b);
    CHECK(g[0] == 2.0);
    CHECK(g[1] == 0.0);

    QuadraticProblem problem(4);
    RngStream s = derive_stream(60, 0);
    const Batch batch = problem.sample_batch(s, 7);
    ParamVector theta(4);
    for (double& v : theta) v = s.standard_normal();
    const ParamVector analytic = problem.grad(theta, batch);
    auto loss_fn = [&](const ParamVector& q) { return problem.loss(q, batch); };
    CHECK(testsupport::gradient_matches_fd(loss_fn, theta, analytic, 1e-5, 1e-8, 1.0));
}

TEST_CASE("quadratic test error is the exact closed form") {
    QuadraticProblem problem(5);
    RngStream unused = derive_stream(0, 0);
    CHECK(problem.test_error(ParamVector{1, 2, 0, 0, 0}, unused, 1) == doctest::Approx(1.0));
    CHECK(problem.test_error(ParamVector(5, 0.0), unused, 1) == 0.0);
}

TEST_CASE("quadratic: noiseless gradient descent contracts monotonically to 0") {
    QuadraticProblem problem(3);
    // planted batch at the population mean removes all noise
    Batch b{Matrix(1, 3), Matrix(1, 0)};
    ParamVector theta{2.0, -1.0, 0.5};
    RngStream unused = derive_stream(0, 0);
    double prev = problem.test_error(theta, unused, 1);
    for (int i = 0; i < 50; ++i) {
        const ParamVector g = problem.grad(theta, b);
        for (int k = 0; k < 3; ++k) theta[k] -= 0.1 * g[k];
        const double err = problem.test_error(theta, unused, 1);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("polyreg_model: Horner evaluation") {
    CHECK(polyreg_model(ParamVector(26, 0.0), 0.37) == 0.0);
    ParamVector affine(26, 0.0);
    affine[0] = 1.0;
    affine[1] = 1.0;
    CHECK(polyreg_model(affine, 0.5) == 1.5);
    ParamVector square(26, 0.0);
    square[2] = 1.0;
    CHECK(polyreg_model(square, -1.0) == 1.0);
}

TEST_CASE("polyreg_sample: ranges and noise variance") {
    RngStream s = derive_stream(61, 0);
    const Batch b = polyreg_sample(s, 1000000, 0.2);
    double sum = 0.0, sq = 0.0;
    for (int j = 0; j < b.size(); ++j) {
        const double x = b.inputs(j, 0);
        CHECK(x >= -1.0);
        CHECK(x < 1.0);
        const double noise = b.targets(j, 0) - std::sin(kPi * x);
        sum += noise;
        sq += noise * noise;
    }
    const double mean = sum / b.size();
    const double var = sq / b.size() - mean * mean;
    CHECK(std::fabs(var - 0.2) < 0.005);
}

TEST_CASE("polyreg_sample: zero noise reproduces sin(pi x) exactly") {
    RngStream s = derive_stream(62, 0);
    const Batch b = polyreg_sample(s, 100, 0.0);
    for (int j = 0; j < b.size(); ++j) {
        CHECK(b.targets(j, 0) == std::sin(kPi * b.inputs(j, 0)));
    }
    CHECK(std::sin(kPi * 0.5) == doctest::Approx(1.0));
}

TEST_CASE("polyreg gradient matches finite differences") {
    PolyRegProblem problem(6, 0.1);
    RngStream s = derive_stream(63, 0);
    const Batch batch = problem.sample_batch(s, 5);
    ParamVector theta(7);
    for (double& v : theta) v = 0.3 * s.standard_normal();
    const ParamVector analytic = problem.grad(theta, batch);
    auto loss_fn = [&](const ParamVector& q) { return problem.loss(q, batch); };
    CHECK(testsupport::gradient_matches_fd(loss_fn, theta, analytic, 1e-5, 1e-6, 1.0));
}

TEST_CASE("heat_dkm_sample: T = 0 gives the squared base point, targets nonnegative") {
    RngStream s = derive_stream(64, 0);
    const Batch b = heat_dkm_sample(s, 200, 4, 0.0);
    for (int j = 0; j < b.size(); ++j) {
        double norm2 = 0.0;
        for (int i = 0; i < 4; ++i) {
            CHECK(b.inputs(j, i) >= -1.0);
            CHECK(b.inputs(j, i) < 1.0);
            norm2 += b.inputs(j, i) * b.inputs(j, i);
        }
        CHECK(b.targets(j, 0) == norm2);
        CHECK(b.targets(j, 0) >= 0.0);
    }
    const Batch c = heat_dkm_sample(s, 200, 4, 2.0);
    for (int j = 0; j < c.size(); ++j) CHECK(c.targets(j, 0) >= 0.0);
}

TEST_CASE("heat_dkm_sample: unconditional target mean matches d/3 + 2dT") {
    const int d = 5;
    const double T = 2.0;
    RngStream s = derive_stream(65, 0);
    const int n = 400000;
    double sum = 0.0;
    int left = n;
    while (left > 0) {
        const int chunk = std::min(left, 8192);
        const Batch b = heat_dkm_sample(s, chunk, d, T);
        for (int j = 0; j < chunk; ++j) sum += b.targets(j, 0);
        left -= chunk;
    }
    const double expected = d / 3.0 + 2.0 * d * T;  // E||xi||^2 + 2dT
    CHECK(std::fabs(sum / n - expected) < 0.01 * expected);
}

TEST_CASE("heat diffusion endpoints reproduce the closed-form solution at fixed points") {
    const int d = 5;
    const double T = 2.0;
    const double diffusion = std::sqrt(2.0 * T);
    const std::vector<std::vector<double>> points = {
        {0, 0, 0, 0, 0}, {1, 1, 1, 1, 1}, {-1, 0.5, 0, -0.5, 1}, {0.2, 0.2, 0.2, 0.2, 0.2},
        {-0.9, 0.9, -0.9, 0.9, 0.0}};
    RngStream s = derive_stream(66, 0);
    for (const auto& xi : points) {
        const int n = 200000;
        double sum = 0.0;
        for (int rep = 0; rep < n; ++rep) {
            double norm2 = 0.0;
            for (int i = 0; i < d; ++i) {
                const double e = xi[i] + diffusion * s.standard_normal();
                norm2 += e * e;
            }
            sum += norm2;
        }
        const double exact = exact_heat_solution(std::span<const double>(xi.data(), d), T, d);
        CHECK(std::fabs(sum / n - exact) < 0.01 * exact);
    }
}

TEST_CASE("exact_heat_solution") {
    const std::vector<double> zero10(10, 0.0);
    CHECK(exact_heat_solution(zero10, 2.0, 10) == 40.0);
    const std::vector<double> x{0.3, -0.4};
    CHECK(exact_heat_solution(x, 0.0, 2) == doctest::Approx(0.25));
    const std::vector<double> ones5(5, 1.0);
    CHECK(exact_heat_solution(ones5, 2.0, 5) == 25.0);
    CHECK_THROWS_AS(exact_heat_solution(ones5, 1.0, 4), ShapeError);
}

TEST_CASE("relative_l2_error") {
    RngStream s = derive_stream(67, 0);
    auto sample = [](RngStream& st, std::span<double> x) { x[0] = st.uniform(-1.0, 1.0); };
    auto exact = [](std::span<const double> x) { return std::sin(kPi * x[0]); };

    SUBCASE("perfect model scores zero") {
        auto model = [&](const Matrix& pts, std::span<double> out) {
            for (int j = 0; j < pts.rows; ++j) out[j] = std::sin(kPi * pts(j, 0));
        };
        CHECK(relative_l2_error(1, 10000, s, model, exact, sample) == 0.0);
    }
    SUBCASE("zero polynomial against sin(pi x) scores exactly 1") {
        const ParamVector theta(26, 0.0);
        auto model = [&](const Matrix& pts, std::span<double> out) {
            for (int j = 0; j < pts.rows; ++j) out[j] = polyreg_model(theta, pts(j, 0));
        };
        const double err = relative_l2_error(1, 50000, s, model, exact, sample);
        CHECK(std::fabs(err - 1.0) <= 0.01);
        CHECK(err == 1.0);  // numerator and denominator are the same sums
    }
    SUBCASE("doubled reference scores exactly 1") {
        auto model = [&](const Matrix& pts, std::span<double> out) {
            for (int j = 0; j < pts.rows; ++j) out[j] = 2.0 * std::sin(kPi * pts(j, 0));
        };
        CHECK(relative_l2_error(1, 3000, s, model, exact, sample) == 1.0);
    }
    SUBCASE("identically zero reference is an error") {
        auto model = [&](const Matrix&, std::span<double> out) {
            for (double& v : out) v = 1.0;
        };
        auto zero_exact = [](std::span<const double>) { return 0.0; };
        CHECK_THROWS_AS(relative_l2_error(1, 100, s, model, zero_exact, sample),
                        DegenerateReferenceError);
    }
}

TEST_CASE("gaussian density problem: target anchor and gradient check") {
    GaussianDensityProblem problem(3, {4, 4}, 3.0);
    const std::vector<double> origin(3, 0.0);
    CHECK(problem.target(origin) == 1.0);

    RngStream s = derive_stream(68, 0);
    const Batch batch = problem.sample_batch(s, 4);
    for (int j = 0; j < batch.size(); ++j) {
        for (int i = 0; i < 3; ++i) {
            CHECK(batch.inputs(j, i) >= -2.0);
            CHECK(batch.inputs(j, i) < 2.0);
        }
        CHECK(batch.targets(j, 0) > 0.0);
        CHECK(batch.targets(j, 0) <= 1.0);
    }

    ParamVector params = problem.initial_params(s);
    if (!testsupport::has_relu_kink_near(problem.net(), params, batch, 1e-3)) {
        const ParamVector analytic = problem.grad(params, batch);
        auto loss_fn = [&](const ParamVector& q) { return problem.loss(q, batch); };
        CHECK(testsupport::gradient_matches_fd(loss_fn, params, analytic, 1e-4, 1e-5));
    }
}

TEST_CASE("heat problem: gradient check and test error of the exact net is small") {
    HeatDkmProblem problem(2, {6}, 1.5);
    RngStream s = derive_stream(69, 0);
    const Batch batch = problem.sample_batch(s, 4);
    ParamVector params = problem.initial_params(s);
    const ParamVector analytic = problem.grad(params, batch);
    auto loss_fn = [&](const ParamVector& q) { return problem.loss(q, batch); };
    CHECK(testsupport::gradient_matches_fd(loss_fn, params, analytic, 1e-4, 1e-5));
}

TEST_CASE("sampling consumes the stream in a fixed documented order") {
    // replaying the stream reproduces the batch bit for bit
    RngStream a = derive_stream(70, 0);
    RngStream b = derive_stream(70, 0);
    const Batch ba = heat_dkm_sample(a, 17, 3, 2.0);
    const Batch bb = heat_dkm_sample(b, 17, 3, 2.0);
    CHECK(ba.inputs.data == bb.inputs.data);
    CHECK(ba.targets.data == bb.targets.data);

    const Batch pa = polyreg_sample(a, 9, 0.2);
    const Batch pb = polyreg_sample(b, 9, 0.2);
    CHECK(pa.inputs.data == pb.inputs.data);
    CHECK(pa.targets.data == pb.targets.data);
}
