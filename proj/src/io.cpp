#include "ctcsim/io.hpp"

#include <fstream>
#include <stdexcept>

namespace ctc {

std::string bits_to_hex(const Bits& bits) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve((bits.size() + 3) / 4);
    unsigned nib = 0;
    int n = 0;
    for (uint8_t b : bits) {
        nib = (nib << 1) | (b & 1u);
        if (++n == 4) {
            out.push_back(digits[nib]);
            nib = 0;
            n = 0;
        }
    }
    if (n > 0) out.push_back(digits[nib << (4 - n)]);
    return out;
}

Bits hex_to_bits(const std::string& hex, size_t bit_count) {
    Bits bits;
    bits.reserve(bit_count);
    for (char c : hex) {
        unsigned v = 0;
        if (c >= '0' && c <= '9')
            v = unsigned(c - '0');
        else if (c >= 'a' && c <= 'f')
            v = unsigned(c - 'a') + 10;
        else if (c >= 'A' && c <= 'F')
            v = unsigned(c - 'A') + 10;
        else
            throw std::runtime_error("bad hex digit in bit file");
        for (int i = 3; i >= 0; --i) {
            if (bits.size() >= bit_count) break;
            bits.push_back(uint8_t((v >> i) & 1u));
        }
    }
    if (bits.size() != bit_count) throw std::runtime_error("hex bit file shorter than header");
    return bits;
}

void write_hexbits(const Bits& bits, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write hex bits: " + path);
    out << bits.size() << "\n" << bits_to_hex(bits) << "\n";
}

Bits read_hexbits(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read hex bits: " + path);
    size_t count = 0;
    std::string hex;
    in >> count >> hex;
    return hex_to_bits(hex, count);
}

}  // namespace ctc
