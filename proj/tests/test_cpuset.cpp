#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rtlat/cpuset.hpp"

using namespace rtlat;

TEST_CASE("list parsing") {
    CHECK(CpuSet::parse("0-3,5").cpus() == std::vector<int>{0, 1, 2, 3, 5});
    CHECK(CpuSet::parse("").empty());
    CHECK(CpuSet::parse("7").cpus() == std::vector<int>{7});
    CHECK_THROWS_AS(CpuSet::parse("3-1"), ValidationError);
    CHECK_THROWS_AS(CpuSet::parse("abc"), ValidationError);
}

TEST_CASE("list rendering compresses ranges") {
    CHECK(CpuSet({0, 1, 2, 3, 5}).to_list_string() == "0-3,5");
    CHECK(CpuSet({4}).to_list_string() == "4");
    CHECK(CpuSet().to_list_string().empty());
}

TEST_CASE("hex mask round trip") {
    CHECK(CpuSet({0, 1}).to_hex_mask(4) == "3");
    CHECK(CpuSet({2, 3}).to_hex_mask(4) == "c");
    CHECK(CpuSet({32}).to_hex_mask(33) == "1,00000000");
    CHECK(CpuSet::from_hex_mask("c") == CpuSet({2, 3}));
    CHECK(CpuSet::from_hex_mask("1,00000000") == CpuSet({32}));

    std::mt19937 rng(11);
    for (int i = 0; i < 200; ++i) {
        std::vector<int> cpus;
        for (int c = 0; c < 72; ++c) {
            if (rng() % 3 == 0) cpus.push_back(c);
        }
        const CpuSet set(cpus);
        CHECK(CpuSet::from_hex_mask(set.to_hex_mask(72)) == set);
        CHECK(CpuSet::parse(set.to_list_string()) == set);
    }
}

TEST_CASE("intersection") {
    const auto a = CpuSet::parse("0-3");
    const auto b = CpuSet::parse("2-5");
    CHECK(a.intersect(b) == CpuSet::parse("2-3"));
    CHECK(a.intersects(b));
    CHECK_FALSE(a.intersects(CpuSet::parse("6-7")));
}
