#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "varpro/datagen.hpp"
#include "varpro/fit.hpp"
#include "varpro/model.hpp"

using namespace varpro;

TEST_CASE("make_point: noiseless path needs an explicit dy") {
    GaussianRng rng(1);
    const DataPoint p = make_point(2.5, 7.0, NoiseSpec{0.0, 0}, rng, 0.01);
    CHECK(p.x == 2.5);
    CHECK(p.y == 7.0);
    CHECK(p.dy == 0.01);

    CHECK_THROWS_AS(make_point(2.5, 7.0, NoiseSpec{0.0, 0}, rng), ZeroUncertaintyError);
    CHECK_THROWS_AS(make_point(2.5, 7.0, NoiseSpec{0.0, 0}, rng, -0.1), ValueError);
}

TEST_CASE("make_point: dy is exactly |true_y| * relative_sigma") {
    GaussianRng rng(2);
    const DataPoint p = make_point(0.0, 100.0, NoiseSpec{0.01, 0}, rng);
    CHECK(p.dy == 1.0);
    GaussianRng rng2(3);
    const DataPoint q = make_point(0.0, -50.0, NoiseSpec{0.02, 0}, rng2);
    CHECK(q.dy == Catch::Approx(1.0).epsilon(0.0));
    CHECK(q.dy == std::abs(-50.0) * 0.02);
}

TEST_CASE("make_point: fixed seed reproduces the draw bitwise") {
    GaussianRng a(12345), b(12345);
    const DataPoint pa = make_point(1.0, 124.0, NoiseSpec{0.02, 0}, a);
    const DataPoint pb = make_point(1.0, 124.0, NoiseSpec{0.02, 0}, b);
    CHECK(pa.y == pb.y);
    CHECK(pa.dy == pb.dy);
}

TEST_CASE("generate_experiment covers the documented grids") {
    const Dataset ex1 = generate_experiment(example1_basis(), Vector{1.0, 2.0, 300.0},
                                            Vector{10.0}, GridSpec{0.1, 0.1, 100},
                                            NoiseSpec{0.0, 0}, 0.01);
    CHECK(ex1.size() == 100);
    CHECK(ex1[0].x == Catch::Approx(0.1).epsilon(1e-15));
    CHECK(ex1[99].x == Catch::Approx(10.0).epsilon(1e-12));

    const Dataset ex2 = generate_experiment(exp_sum_basis(3), Vector{100.0, 20.0, 4.0},
                                            Vector{-0.10, -0.04, -0.02},
                                            GridSpec{0.0, 0.3, 100}, NoiseSpec{0.02, 5});
    CHECK(ex2.size() == 100);
    CHECK(ex2[0].x == 0.0);
    CHECK(ex2[99].x == Catch::Approx(29.7).epsilon(1e-12));
}

TEST_CASE("zero-noise generation round-trips through fit") {
    const Dataset data = generate_experiment(exp_sum_basis(2), Vector{10.0, 2.0},
                                             Vector{-0.3, -0.05}, GridSpec{0.0, 0.25, 80},
                                             NoiseSpec{0.0, 0}, 0.01);
    FitProblem problem{data, exp_sum_basis(2), Vector{-0.35, -0.04}, std::nullopt};
    const FitResult r = fit(problem);
    CHECK(std::abs(r.b[0] + 0.3) <= 1e-5);
    CHECK(std::abs(r.b[1] + 0.05) <= 1e-5);
    CHECK(std::abs(r.a[0] - 10.0) <= 1e-4);
    CHECK(std::abs(r.a[1] - 2.0) <= 1e-4);
}

TEST_CASE("equal seeds give bitwise-equal datasets; different seeds differ") {
    const GridSpec grid{0.0, 0.3, 50};
    const Vector a{100.0, 20.0, 4.0};
    const Vector b{-0.10, -0.04, -0.02};
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const Dataset d1 =
            generate_experiment(exp_sum_basis(3), a, b, grid, NoiseSpec{0.02, seed});
        const Dataset d2 =
            generate_experiment(exp_sum_basis(3), a, b, grid, NoiseSpec{0.02, seed});
        const Dataset d3 =
            generate_experiment(exp_sum_basis(3), a, b, grid, NoiseSpec{0.02, seed + 1});
        bool identical = true, any_diff = false;
        for (std::size_t i = 0; i < d1.size(); ++i) {
            identical &= (d1[i].y == d2[i].y) && (d1[i].dy == d2[i].dy);
            any_diff |= (d1[i].y != d3[i].y);
        }
        CHECK(identical);
        CHECK(any_diff);
    }
}

TEST_CASE("noise stream is centered (5-sigma sanity)") {
    const double rel = 0.01;
    GaussianRng rng(777);
    const std::size_t n = 100000;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const DataPoint p = make_point(0.0, 10.0, NoiseSpec{rel, 0}, rng);
        sum += p.y / 10.0 - 1.0;
    }
    const double mean = sum / static_cast<double>(n);
    CHECK(std::abs(mean) <= 5.0 * rel / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("configuration validation") {
    GaussianRng rng(1);
    CHECK_THROWS_AS(make_point(0.0, 1.0, NoiseSpec{-0.1, 0}, rng), ConfigError);
    const GridSpec zero_step{0.0, 0.0, 10};
    const GridSpec zero_count{0.0, 0.1, 0};
    CHECK_THROWS_AS(zero_step.validate(), ConfigError);
    CHECK_THROWS_AS(zero_count.validate(), ConfigError);
    CHECK_THROWS_AS(generate_experiment(example1_basis(), Vector{1.0, 2.0, 300.0},
                                        Vector{10.0}, GridSpec{0.1, 0.1, 10},
                                        NoiseSpec{0.0, 0}, -0.01),
                    ConfigError);
}

TEST_CASE("generation stops at a pole in the truth") {
    // 1/(x+b0) with b0 = -0.5 has a pole at x = 0.5, on the grid
    CHECK_THROWS_AS(generate_experiment(example1_basis(), Vector{1.0, 1.0, 1.0},
                                        Vector{-0.5}, GridSpec{0.1, 0.1, 10},
                                        NoiseSpec{0.01, 1}),
                    EvaluationError);
}
