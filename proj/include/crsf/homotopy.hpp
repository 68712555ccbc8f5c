#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace crsf {

enum class GroupKind { torus_z2, free };

// Deck-group element. On the torus an integer pair, otherwise a freely
// reduced word; letters are +-(i+1) for generator i.
struct Word {
    GroupKind kind = GroupKind::free;
    std::array<long long, 2> shift{0, 0};
    std::vector<int> letters;

    static Word identity(GroupKind kind) {
        Word w;
        w.kind = kind;
        return w;
    }
    static Word z2(long long a, long long b) {
        Word w;
        w.kind = GroupKind::torus_z2;
        w.shift = {a, b};
        return w;
    }
    static Word free_word(const std::vector<int>& letters);

    bool is_identity() const { return kind == GroupKind::torus_z2 ? shift[0] == 0 && shift[1] == 0 : letters.empty(); }
    Word inverse() const;
    bool operator==(const Word& o) const {
        return kind == o.kind && shift == o.shift && letters == o.letters;
    }
    bool operator!=(const Word& o) const { return !(*this == o); }
    bool operator<(const Word& o) const;
};

Word compose(const Word& a, const Word& b);

// In-place a <- a*b, the hot path for walks.
void compose_into(Word& a, const Word& b);

// Free homotopy class of a closed curve: torus classes as is, free words
// cyclically reduced and rotated to their least form.
Word cyclic_normal_form(const Word& w);
// Same free homotopy class up to orientation.
bool same_class_up_to_sign(const Word& a, const Word& b);
// Not a proper power (and not the identity).
bool is_primitive(const Word& w);

// Torus: "a,b". Free: "." for the identity, else letters a..z, capitals inverse.
std::string to_string(const Word& w);
Word parse_word(GroupKind kind, const std::string& text);

}  // namespace crsf
