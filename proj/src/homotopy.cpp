#include "crsf/homotopy.hpp"

#include <cctype>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace crsf {

Word Word::free_word(const std::vector<int>& letters) {
    Word w;
    w.kind = GroupKind::free;
    for (int x : letters) {
        if (x == 0) throw std::invalid_argument("free word letter 0");
        if (!w.letters.empty() && w.letters.back() == -x)
            w.letters.pop_back();
        else
            w.letters.push_back(x);
    }
    return w;
}

Word Word::inverse() const {
    Word w;
    w.kind = kind;
    w.shift = {-shift[0], -shift[1]};
    w.letters.reserve(letters.size());
    for (auto it = letters.rbegin(); it != letters.rend(); ++it) w.letters.push_back(-*it);
    return w;
}

bool Word::operator<(const Word& o) const {
    if (kind != o.kind) return kind < o.kind;
    if (shift != o.shift) return shift < o.shift;
    return letters < o.letters;
}

void compose_into(Word& a, const Word& b) {
    if (a.kind != b.kind) throw std::invalid_argument("compose: group kind mismatch");
    if (a.kind == GroupKind::torus_z2) {
        a.shift[0] += b.shift[0];
        a.shift[1] += b.shift[1];
        return;
    }
    for (int x : b.letters) {
        if (!a.letters.empty() && a.letters.back() == -x)
            a.letters.pop_back();
        else
            a.letters.push_back(x);
    }
}

Word compose(const Word& a, const Word& b) {
    Word r = a;
    compose_into(r, b);
    return r;
}

std::string to_string(const Word& w) {
    if (w.kind == GroupKind::torus_z2) return std::to_string(w.shift[0]) + "," + std::to_string(w.shift[1]);
    if (w.letters.empty()) return ".";
    std::string s;
    for (int x : w.letters) {
        int g = (x > 0 ? x : -x) - 1;
        char c = static_cast<char>('a' + g);
        s.push_back(x > 0 ? c : static_cast<char>(std::toupper(c)));
    }
    return s;
}

Word parse_word(GroupKind kind, const std::string& text) {
    if (kind == GroupKind::torus_z2) {
        auto comma = text.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("bad torus word '" + text + "'");
        try {
            size_t p1 = 0, p2 = 0;
            long long a = std::stoll(text.substr(0, comma), &p1);
            long long b = std::stoll(text.substr(comma + 1), &p2);
            if (p1 != comma || p2 != text.size() - comma - 1) throw std::invalid_argument("trailing");
            return Word::z2(a, b);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad torus word '" + text + "'");
        }
    }
    if (text == ".") return Word::identity(GroupKind::free);
    std::vector<int> letters;
    for (char c : text) {
        if (!std::isalpha(static_cast<unsigned char>(c))) throw std::invalid_argument("bad free word '" + text + "'");
        int g = std::tolower(static_cast<unsigned char>(c)) - 'a' + 1;
        letters.push_back(std::isupper(static_cast<unsigned char>(c)) ? -g : g);
    }
    return Word::free_word(letters);
}

Word cyclic_normal_form(const Word& w) {
    if (w.kind == GroupKind::torus_z2) return w;
    std::vector<int> l = w.letters;
    size_t a = 0, b = l.size();
    while (b - a >= 2 && l[a] == -l[b - 1]) ++a, --b;
    std::vector<int> core(l.begin() + static_cast<long>(a), l.begin() + static_cast<long>(b));
    std::vector<int> best = core;
    for (size_t r = 1; r < core.size(); ++r) {
        std::vector<int> rot(core.begin() + static_cast<long>(r), core.end());
        rot.insert(rot.end(), core.begin(), core.begin() + static_cast<long>(r));
        if (rot < best) best = rot;
    }
    Word out;
    out.kind = GroupKind::free;
    out.letters = best;
    return out;
}

bool same_class_up_to_sign(const Word& a, const Word& b) {
    Word na = cyclic_normal_form(a);
    return na == cyclic_normal_form(b) || na == cyclic_normal_form(b.inverse());
}

bool is_primitive(const Word& w) {
    if (w.is_identity()) return false;
    if (w.kind == GroupKind::torus_z2) return std::gcd(std::llabs(w.shift[0]), std::llabs(w.shift[1])) == 1;
    const auto& c = cyclic_normal_form(w).letters;
    const size_t n = c.size();
    for (size_t p = 1; p < n; ++p) {
        if (n % p) continue;
        bool periodic = true;
        for (size_t i = p; i < n && periodic; ++i) periodic = c[i] == c[i - p];
        if (periodic) return false;
    }
    return true;
}

}  // namespace crsf
