// io.hpp - hex-bit files and small text helpers
#pragma once

#include "ctcsim/types.hpp"

#include <string>

namespace ctc {

// Hex-bit file: first line bit count, second line hex digits MSB-first.
void write_hexbits(const Bits& bits, const std::string& path);
Bits read_hexbits(const std::string& path);

std::string bits_to_hex(const Bits& bits);
Bits hex_to_bits(const std::string& hex, size_t bit_count);

}  // namespace ctc
