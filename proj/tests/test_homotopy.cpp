#include <random>

#include "doctest.h"

#include "crsf/homotopy.hpp"

using namespace crsf;

namespace {

std::vector<int> reduce_by_stack(const std::vector<int>& raw) {
    std::vector<int> out;
    for (int x : raw) {
        if (!out.empty() && out.back() == -x)
            out.pop_back();
        else
            out.push_back(x);
    }
    return out;
}

}  // namespace

TEST_CASE("free words reduce like a stack and compose consistently") {
    std::mt19937 gen(7);
    std::uniform_int_distribution<int> letter(-2, 1);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<int> a, b;
        for (int i = 0; i < 12; ++i) {
            int x = letter(gen);
            a.push_back(x >= 0 ? x + 1 : x);
            int y = letter(gen);
            b.push_back(y >= 0 ? y + 1 : y);
        }
        Word wa = Word::free_word(a), wb = Word::free_word(b);
        CHECK(wa.letters == reduce_by_stack(a));
        std::vector<int> ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        CHECK(compose(wa, wb).letters == reduce_by_stack(ab));
        CHECK(compose(wa, wa.inverse()).is_identity());
        Word acc = wa;
        compose_into(acc, wb);
        CHECK(acc == compose(wa, wb));
        CHECK(parse_word(GroupKind::free, to_string(wa)) == wa);
    }
}

TEST_CASE("cyclic normal form and primitivity") {
    auto w = [](const std::string& s) { return parse_word(GroupKind::free, s); };
    CHECK(cyclic_normal_form(w("baB")) == w("a"));
    CHECK(cyclic_normal_form(w("ba")) == cyclic_normal_form(w("ab")));
    CHECK(same_class_up_to_sign(w("ab"), w("BA")));
    CHECK_FALSE(same_class_up_to_sign(w("ab"), w("aB")));
    CHECK(is_primitive(w("ab")));
    CHECK_FALSE(is_primitive(w("abab")));
    CHECK_FALSE(is_primitive(w("baaB")));
    CHECK_FALSE(is_primitive(w(".")));
    CHECK(is_primitive(Word::z2(2, 3)));
    CHECK_FALSE(is_primitive(Word::z2(2, 4)));
    CHECK_FALSE(is_primitive(Word::z2(0, 0)));
    CHECK(same_class_up_to_sign(Word::z2(1, -1), Word::z2(-1, 1)));
}
