#include "handcontact/util.hpp"

#include <doctest.h>

#include <random>

using namespace handcontact;

TEST_SUITE("util") {

TEST_CASE("base64 round trip") {
    std::mt19937_64 rng(7);
    for (int len : {0, 1, 2, 3, 4, 5, 63, 64, 65, 1000}) {
        std::vector<std::uint8_t> data;
        for (int i = 0; i < len; ++i) data.push_back(static_cast<std::uint8_t>(rng() & 0xff));
        const std::string encoded = util::base64_encode(data.data(), data.size());
        CHECK(util::base64_decode(encoded) == data);
        CHECK(encoded.size() % 4 == 0);
    }
}

TEST_CASE("base64 known vector") {
    CHECK(util::base64_encode(std::string("Man")) == "TWFu");
    CHECK(util::base64_encode(std::string("Ma")) == "TWE=");
    CHECK(util::base64_encode(std::string("M")) == "TQ==");
}

TEST_CASE("usd formatting rounds at 3 decimals") {
    CHECK(util::format_usd(0.10764) == "$0.108");
    CHECK(util::format_usd(0.023505) == "$0.024");
    CHECK(util::format_usd(0.0) == "$0.000");
    CHECK(util::format_usd(1.9996) == "$2.000");
}

TEST_CASE("fnv1a64 is stable") {
    CHECK(util::fnv1a64("") == 14695981039346656037ULL);
    CHECK(util::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(util::hex_u64(0xaf63dc4c8601ec8cULL) == "af63dc4c8601ec8c");
}

} // TEST_SUITE
