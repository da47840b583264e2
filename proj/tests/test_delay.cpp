#include <doctest.h>

#include <cmath>
#include <numeric>

#include "epifamily/delay.hpp"
#include "epifamily/error.hpp"

using namespace epifamily;

TEST_CASE("delta family is a point mass at integer scales")
{
    const auto d = discretize_delay(KernelFamily::delta, 3.0, 10);
    REQUIRE(d.size() == 10);
    for (std::size_t k = 0; k < 10; ++k) {
        CHECK(d[k] == (k == 3 ? 1.0 : 0.0));
    }
    CHECK(d.min_lag() == 3);
    CHECK(d.max_lag() == 3);
}

TEST_CASE("delta family interpolates non-integer scales to keep the mean")
{
    const auto d = discretize_delay(KernelFamily::delta, 3.25, 10);
    CHECK(d[3] == doctest::Approx(0.75));
    CHECK(d[4] == doctest::Approx(0.25));
    CHECK(d.mean() == doctest::Approx(3.25));
    CHECK_THROWS_AS(discretize_delay(KernelFamily::delta, 9.5, 10), InputError);
}

TEST_CASE("gamma family mean lag increases with scale")
{
    const auto m4 = discretize_delay(KernelFamily::gamma, 4.0, 60).mean();
    const auto m8 = discretize_delay(KernelFamily::gamma, 8.0, 60).mean();
    CHECK(m4 < m8);
    double prev = 0.0;
    for (double scale = 0.5; scale < 30.0; scale += 0.37) {
        const double m = discretize_delay(KernelFamily::gamma, scale, 60).mean();
        CHECK(m > prev);
        prev = m;
    }
}

TEST_CASE("geometric family mean lag increases with scale")
{
    double prev = -1.0;
    for (double scale = 0.2; scale < 40.0; scale += 0.5) {
        const double m = discretize_delay(KernelFamily::geometric, scale, 30).mean();
        CHECK(m > prev);
        prev = m;
    }
}

TEST_CASE("gamma family mu=5 on 60 days has mean lag close to 5")
{
    // Oracle: independently binned gamma(shape 3, scale 5/3) CDF, computed with scipy.
    const auto d = discretize_delay(KernelFamily::gamma, 5.0, 60);
    CHECK(d.mean() == doctest::Approx(5.000247892196033).epsilon(1e-9));
    CHECK(std::abs(d.mean() - 5.0) < 0.02 * 5.0);
}

TEST_CASE("every discretized kernel is normalized")
{
    for (auto family : {KernelFamily::delta, KernelFamily::geometric, KernelFamily::gamma}) {
        for (double scale : {0.5, 1.0, 2.7, 9.0, 25.0}) {
            const auto d = discretize_delay(family, scale, 40);
            const double total = std::accumulate(d.mass().begin(), d.mass().end(), 0.0);
            CHECK(std::abs(total - 1.0) < 1e-12);
            for (double m : d.mass()) {
                CHECK(m >= 0.0);
            }
        }
    }
}

TEST_CASE("invalid kernel requests")
{
    CHECK_THROWS_AS(discretize_delay(KernelFamily::gamma, 0.0, 10), InputError);
    CHECK_THROWS_AS(discretize_delay(KernelFamily::gamma, -1.0, 10), InputError);
    CHECK_THROWS_AS(discretize_delay(KernelFamily::gamma, 3.0, 0), InputError);
    CHECK_THROWS_AS(parse_kernel_family("lognormal"), InputError);
    CHECK(parse_kernel_family("geometric") == KernelFamily::geometric);
}

TEST_CASE("explicit mass vectors are validated and normalized")
{
    CHECK_THROWS_AS(DelayDistribution({}), InputError);
    CHECK_THROWS_AS(DelayDistribution({0.5, -0.1}), InputError);
    CHECK_THROWS_AS(DelayDistribution({0.0, 0.0}), InputError);
    const DelayDistribution d({1.0, 3.0});
    CHECK(d[0] == doctest::Approx(0.25));
    CHECK(d[1] == doctest::Approx(0.75));
    CHECK(d[5] == 0.0);
}

TEST_CASE("sampling follows the mass")
{
    const DelayDistribution d({0.0, 0.2, 0.0, 0.8});
    auto rng = make_rng(11);
    std::array<int, 4> counts{};
    for (int i = 0; i < 20000; ++i) {
        ++counts[d.sample(rng)];
    }
    CHECK(counts[0] == 0);
    CHECK(counts[2] == 0);
    CHECK(std::abs(counts[1] / 20000.0 - 0.2) < 0.015);
}
