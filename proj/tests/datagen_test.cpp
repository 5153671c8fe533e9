#include "rtk/datagen.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>
#include <numeric>

#include "rtk/oracle.hpp"

using namespace rtk;

TEST_CASE("uniform f32 mean and bounds") {
    DistributionSpec spec;
    spec.kind = DistKind::Uniform;
    spec.n = 1000000;
    spec.seed = 1;
    auto data = generate<float>(spec);
    REQUIRE(data.size() == spec.n);

    double sum = 0.0;
    for (float v : data) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);  // double draws just below 1 can round up in float
        sum += v;
    }
    CHECK(std::abs(sum / static_cast<double>(spec.n) - 0.5) < 0.005);
}

TEST_CASE("generation is deterministic per seed") {
    for (auto kind : {DistKind::Uniform, DistKind::Normal, DistKind::Zipf, DistKind::Peaked}) {
        DistributionSpec spec;
        spec.kind = kind;
        spec.b = 1.0;
        spec.n = 4096;
        spec.seed = 9;
        if (kind == DistKind::Peaked) spec.modes = 3;
        auto a = generate<float>(spec);
        auto b = generate<float>(spec);
        CHECK(a == b);
        spec.seed = 10;
        CHECK(generate<float>(spec) != a);
    }
}

TEST_CASE("zipf masses follow a rank-law slope") {
    DistributionSpec spec;
    spec.kind = DistKind::Zipf;
    spec.s = 1.1;
    spec.n = 100000;
    spec.seed = 2;
    auto data = generate<float>(spec);

    double total = std::accumulate(data.begin(), data.end(), 0.0);
    CHECK(std::abs(total - 1.0) < 1e-3);

    // log-log regression of mass against rank over the top decade
    std::sort(data.begin(), data.end(), std::greater<float>());
    std::vector<double> xs, ys;
    for (std::size_t r = 1; r <= spec.n / 10; ++r) {
        xs.push_back(std::log(static_cast<double>(r)));
        ys.push_back(std::log(static_cast<double>(data[r - 1])));
    }
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    double slope = num / den;
    CHECK(std::abs(slope - (-1.1)) < 0.1);
}

TEST_CASE("narrow uniform band shares one exponent") {
    DistributionSpec spec;
    spec.kind = DistKind::Uniform;
    spec.a = 128.6;
    spec.b = 128.7;
    spec.n = 100000;
    spec.seed = 3;
    auto data = generate<float>(spec);
    for (float v : data) {
        std::uint32_t raw = std::bit_cast<std::uint32_t>(v);
        CHECK(((raw >> 23) & 0xFFu) == 0x86u);
    }
}

TEST_CASE("peaked distribution places its modes") {
    DistributionSpec spec;
    spec.kind = DistKind::Peaked;
    spec.mass = 0.8;
    spec.modes = 4;
    spec.n = 10000;
    spec.seed = 4;
    auto data = generate<float>(spec);

    float mode_value = 0.8f / 4;
    std::size_t at_mode = 0;
    for (float v : data) {
        if (v == mode_value)
            ++at_mode;
        else
            CHECK(v < mode_value / 100);
    }
    CHECK(at_mode == 4);
}

TEST_CASE("u32 generation") {
    DistributionSpec spec;
    spec.kind = DistKind::Uniform;
    spec.n = 100000;
    spec.seed = 5;
    auto data = generate<std::uint32_t>(spec);
    REQUIRE(data.size() == spec.n);
    CHECK(data == generate<std::uint32_t>(spec));

    double mean = std::accumulate(data.begin(), data.end(), 0.0) / spec.n;
    CHECK(std::abs(mean / 4294967296.0 - 0.5) < 0.01);

    spec.kind = DistKind::Peaked;
    CHECK_THROWS_AS(generate<std::uint32_t>(spec), std::invalid_argument);
}

TEST_CASE("invalid specs are rejected") {
    DistributionSpec spec;
    spec.n = 0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec.n = 10;
    spec.kind = DistKind::Uniform;
    spec.a = 1.0;
    spec.b = 1.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec.kind = DistKind::Normal;
    spec.b = 0.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec.kind = DistKind::Zipf;
    spec.s = 1.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec.kind = DistKind::Peaked;
    spec.s = 1.1;
    spec.mass = 1.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.mass = 0.5;
    spec.modes = 10;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("oracle agrees with repeated max extraction") {
    DistributionSpec spec;
    spec.kind = DistKind::Normal;
    spec.b = 1.0;
    spec.n = 1000;
    spec.seed = 6;
    auto data = generate<float>(spec);

    const std::uint64_t k = 25;
    auto oracle = oracle_topk(std::span<const float>(data), k, SelectionOrder::Largest);

    // independent reference: pluck the maximum k times
    std::vector<float> pool = data;
    std::vector<float> expected;
    for (std::uint64_t i = 0; i < k; ++i) {
        auto it = std::max_element(pool.begin(), pool.end());
        expected.push_back(*it);
        pool.erase(it);
    }
    CHECK(oracle.values == expected);
}
