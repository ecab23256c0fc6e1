#include <cmath>
#include <set>

#include "doctest.h"
#include "imdev/rng.hpp"

using namespace imdev;

TEST_CASE("philox4x32-10 known-answer vectors") {
    using C = std::array<std::uint32_t, 4>;
    using K = std::array<std::uint32_t, 2>;
    CHECK(philox4x32(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are pure functions of their address") {
    CounterStream a(7, StreamPurpose::simulation, 3, 11);
    CounterStream b(7, StreamPurpose::simulation, 3, 11);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct addresses give distinct streams") {
    std::set<std::uint64_t> first;
    for (std::uint64_t s = 0; s < 4; ++s)
        for (auto p : {StreamPurpose::simulation, StreamPurpose::bootstrap, StreamPurpose::dominating})
            for (std::uint64_t i = 0; i < 4; ++i)
                for (std::uint64_t j = 0; j < 4; ++j) first.insert(CounterStream(s, p, i, j).next_u64());
    CHECK(first.size() == 4 * 3 * 4 * 4);
}

TEST_CASE("uniform, normal and below have the right moments") {
    CounterStream r(1, StreamPurpose::generic, 0, 0);
    const int N = 200000;
    double su = 0, sn = 0, sn2 = 0;
    std::array<int, 5> hist{};
    for (int i = 0; i < N; ++i) {
        const double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = r.normal();
        sn += z;
        sn2 += z * z;
        hist[r.below(5)]++;
    }
    CHECK(std::abs(su / N - 0.5) < 5 * std::sqrt(1.0 / 12 / N));
    CHECK(std::abs(sn / N) < 5 / std::sqrt(double(N)));
    CHECK(std::abs(sn2 / N - 1.0) < 5 * std::sqrt(2.0 / N));
    for (int h : hist) CHECK(std::abs(h - N / 5.0) < 5 * std::sqrt(N * 0.2 * 0.8));
}

TEST_CASE("mix64 is a bijection on a sample") {
    std::set<std::uint64_t> out;
    for (std::uint64_t i = 0; i < 10000; ++i) out.insert(mix64(i));
    CHECK(out.size() == 10000);
}
