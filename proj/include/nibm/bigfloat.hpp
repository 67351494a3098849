#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace nibm {

namespace mp = boost::multiprecision;

template <unsigned Bits>
using big_float =
    mp::number<mp::cpp_bin_float<Bits, mp::backends::digit_base_2>, mp::et_off>;

using Big128 = big_float<128>;
using Big256 = big_float<256>;
using Big512 = big_float<512>;

/// Round a requested mantissa size up to a compiled precision.
inline int effective_precision_bits(int requested) {
    if (requested <= 128) return 128;
    if (requested <= 256) return 256;
    return 512;
}

} // namespace nibm
