#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

namespace fog {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt big_pow(const BigInt& base, std::uint64_t exp) {
    BigInt result = 1;
    BigInt b = base;
    while (exp > 0) {
        if (exp & 1U) result *= b;
        exp >>= 1U;
        if (exp > 0) b *= b;
    }
    return result;
}

inline std::string to_string(const BigInt& v) { return v.str(); }

}  // namespace fog
