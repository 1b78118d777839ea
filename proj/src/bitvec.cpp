#include "emcc/bitvec.hpp"

namespace emcc {

BitVector BitVector::from_string(std::string_view bits) {
    std::size_t n = 0;
    for (char ch : bits) n += (ch == '0' || ch == '1');
    BitVector out(n);
    std::size_t i = 0;
    for (char ch : bits) {
        if (ch == '0' || ch == '1') out.set(i++, ch == '1');
    }
    return out;
}

std::string BitVector::to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i) {
        if (get(i)) s[i] = '1';
    }
    return s;
}

}  // namespace emcc
