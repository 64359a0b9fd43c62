#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "coxsat/rng.hpp"

#include "support/stats.hpp"

using namespace coxsat;

TEST_CASE("identical seeds reproduce the stream, different seeds do not") {
    RandomStream a(42), b(42), c(43);
    bool all_equal = true, any_equal_c = false;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t x = a.next_u64();
        all_equal = all_equal && (x == b.next_u64());
        any_equal_c = any_equal_c || (x == c.next_u64());
    }
    REQUIRE(all_equal);
    REQUIRE_FALSE(any_equal_c);
}

TEST_CASE("keyed streams with distinct tags or replicates are distinct") {
    RandomStream a = RandomStream::keyed(7, 0, stream_tag::constellation);
    RandomStream b = RandomStream::keyed(7, 0, stream_tag::fading);
    RandomStream c = RandomStream::keyed(7, 1, stream_tag::constellation);
    RandomStream a2 = RandomStream::keyed(7, 0, stream_tag::constellation);
    REQUIRE(a.next_u64() != b.next_u64());
    REQUIRE(a.next_u64() != c.next_u64());
    RandomStream a3 = RandomStream::keyed(7, 0, stream_tag::constellation);
    REQUIRE(a3.next_u64() == a2.next_u64());
}

TEST_CASE("replicate seeds do not collide over a large index range") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 100000; ++r)
        seen.insert(replicate_seed(1, r));
    REQUIRE(seen.size() == 100000);
    REQUIRE(replicate_seed(1, 5) == replicate_seed(1, 5));
    REQUIRE(replicate_seed(1, 5) != replicate_seed(2, 5));
}

TEST_CASE("uniform doubles have the right range and first two moments") {
    RandomStream rng(2024);
    const long n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (long i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum_sq += u * u;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    REQUIRE(std::abs(mean - 0.5) <= 3.0 / std::sqrt(12.0 * n));
    REQUIRE(var == Catch::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("poisson draws match mean and variance in both regimes") {
    RandomStream rng(8);
    const long n = 100000;
    for (double mean : {0.7, 30.0, 150.0}) {  // 150 exercises the splitting path
        double sum = 0.0, sum_sq = 0.0;
        for (long i = 0; i < n; ++i) {
            const double k = static_cast<double>(rng.poisson(mean));
            sum += k;
            sum_sq += k * k;
        }
        const double m_hat = sum / n;
        const double v_hat = sum_sq / n - m_hat * m_hat;
        CAPTURE(mean, m_hat, v_hat);
        REQUIRE(std::abs(m_hat - mean) <= 3.0 * std::sqrt(mean / n));
        REQUIRE(v_hat == Catch::Approx(mean).epsilon(0.05));
    }
    REQUIRE(rng.poisson(0.0) == 0);
}

TEST_CASE("exponential draws follow their distribution") {
    RandomStream rng(5);
    const long n = 50000;
    std::vector<double> xs(n);
    for (long i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = rng.exponential(2.0);
    const double d = testsupport::ks_statistic(
        xs, [](double x) { return 1.0 - std::exp(-x / 2.0); });
    // 1% critical value of the one-sample statistic.
    REQUIRE(d < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("unit-mean gamma draws have mean one and variance 1/shape") {
    RandomStream rng(6);
    const long n = 200000;
    for (int shape : {1, 3, 8}) {
        double sum = 0.0, sum_sq = 0.0;
        for (long i = 0; i < n; ++i) {
            const double g = rng.gamma_unit_mean(shape);
            sum += g;
            sum_sq += g * g;
        }
        const double mean = sum / n;
        const double var = sum_sq / n - mean * mean;
        CAPTURE(shape, mean, var);
        REQUIRE(std::abs(mean - 1.0) <=
                3.0 / std::sqrt(static_cast<double>(shape) * n));
        REQUIRE(var == Catch::Approx(1.0 / shape).epsilon(0.05));
    }
}
