#include "termgraph/util.hpp"

#include <doctest.h>

#include <cmath>

using namespace termgraph;

TEST_CASE("rng is deterministic and produces sane normals") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng r(7);
    double sum = 0.0, sumsq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double x = r.next_normal();
        sum += x;
        sumsq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sumsq / n - 1.0) < 0.05);
}

TEST_CASE("mix_seed varies with both arguments") {
    CHECK(mix_seed(1, 2, 3) != mix_seed(1, 3, 2));
    CHECK(mix_seed(1, 2) != mix_seed(2, 2));
    CHECK(mix_seed(5, 9, 9) == mix_seed(5, 9, 9));
}

TEST_CASE("sha256 matches known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // multi-block input (> 64 bytes)
    std::string longmsg = "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq";
    CHECK(sha256_hex(longmsg) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("format/parse double round-trips exactly") {
    Rng r(42);
    for (int i = 0; i < 500; ++i) {
        double v = (r.next_double() - 0.5) * std::pow(10.0, static_cast<double>(i % 40) - 20.0);
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.0) == "0");
    CHECK(parse_double("1e-3") == 0.001);
    CHECK_THROWS(parse_double("abc"));
    CHECK_THROWS(parse_double("1.5x"));
}

TEST_CASE("string helpers") {
    CHECK(to_lower("AbC") == "abc");
    CHECK(trim("  x y\t\n") == "x y");
    CHECK(split("a,b,,c", ',').size() == 4);
    CHECK(fold_key("Reversal Learning") == "reversallearning");
    CHECK(fold_key(" ReversalLearning ") == "reversallearning");
    CHECK(edit_distance("kitten", "sitting") == 3);
    CHECK(edit_distance("", "abc") == 3);
    CHECK(edit_distance("same", "same") == 0);
}
