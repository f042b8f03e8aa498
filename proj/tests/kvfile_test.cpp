#include "doctest.h"

#include "smokegram/errors.hpp"
#include "smokegram/kvfile.hpp"

using namespace smokegram;

TEST_CASE("kv files round-trip and keep insertion order") {
    kv::File f;
    f.set("alpha", "one two three");
    f.set_int("beta", -42);
    f.set_double("gamma", 0.1);
    f.set_uint("delta", 18446744073709551615ull);
    f.set("alpha", "replaced"); // overwrite keeps position

    const std::string text = f.serialize();
    CHECK(text.rfind("smokegram-kv v1\n", 0) == 0);

    const kv::File back = kv::File::parse(text, "mem");
    CHECK(back.get("alpha") == "replaced");
    CHECK(back.get_int("beta") == -42);
    CHECK(back.get_double("gamma") == 0.1);
    CHECK(back.get_uint("delta") == 18446744073709551615ull);
    CHECK(back.serialize() == text);
    CHECK(back.entries()[0].first == "alpha");
}

TEST_CASE("kv parse failures") {
    CHECK_THROWS_AS(kv::File::parse("", "mem"), ParseError);
    CHECK_THROWS_AS(kv::File::parse("not-a-header\nx 1\n", "mem"), ParseError);
    CHECK_THROWS_AS(kv::File::parse("smokegram-kv v99\n", "mem"), CompatibilityError);
    CHECK_THROWS_AS(kv::File::parse("smokegram-kv v1\nlonelykey\n", "mem"), ParseError);
    const kv::File f = kv::File::parse("smokegram-kv v1\n# comment\nkey value\n", "mem");
    CHECK(f.get("key") == "value");
    CHECK_THROWS_AS(f.get("absent"), ParseError);
    CHECK(!f.find("absent").has_value());
}
