#include <doctest.h>

#include "stars/text.hpp"

using namespace stars;

TEST_CASE("surface form normalization") {
    CHECK(text::normalize_surface_form("  Blockchain ") == "blockchain");
    CHECK(text::normalize_surface_form("Deep   Learning") == "deep learning");
    CHECK(text::normalize_surface_form("\"AI.\"") == "ai");
    // token-internal punctuation survives, boundary punctuation goes
    CHECK(text::normalize_surface_form("state-of-the-art,") == "state-of-the-art");
    CHECK(text::normalize_surface_form("!!!") == "");
    CHECK(text::normalize_surface_form("") == "");
}

TEST_CASE("tokenizer drops short tokens and splits on non-alphanumerics") {
    CHECK(text::tokenize("AI-driven R2D2 kit") ==
          std::vector<std::string>{"ai", "driven", "r2d2", "kit"});
    CHECK(text::tokenize("a b c") == std::vector<std::string>{});
    CHECK(text::tokenize("machine_learning") ==
          std::vector<std::string>{"machine", "learning"});
    CHECK(text::tokenize("") == std::vector<std::string>{});
}

TEST_CASE("fnv1a64 is stable and seed-sensitive") {
    const auto h1 = text::fnv1a64("blockchain");
    CHECK(h1 == text::fnv1a64("blockchain"));
    CHECK(h1 != text::fnv1a64("blockchain", 1));
    CHECK(h1 != text::fnv1a64("blockchains"));
    CHECK(text::hex64(h1).size() == 16);
}

TEST_CASE("fixed formatting is deterministic") {
    CHECK(text::format_fixed(0.5, 6) == "0.500000");
    CHECK(text::format_fixed(2.0 / 3.0, 6) == "0.666667");
    CHECK(text::format_fixed(0.762, 3) == "0.762");
    CHECK(text::format_fixed(1.0, 6) == "1.000000");
}

TEST_CASE("edit distance") {
    CHECK(text::edit_distance("c01", "c01") == 0);
    CHECK(text::edit_distance("c01", "c02") == 1);
    CHECK(text::edit_distance("", "abc") == 3);
    CHECK(text::edit_distance("kitten", "sitting") == 3);
}
