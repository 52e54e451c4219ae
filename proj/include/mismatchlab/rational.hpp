#pragma once
// Exact rational arithmetic used wherever probabilities must be compared
// without rounding. Backed by boost::multiprecision (header-only).

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mismatchlab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// ceil(num / den) for den > 0.
inline BigInt ceil_div(const BigInt& num, const BigInt& den) {
    if (den <= 0) throw std::invalid_argument("ceil_div: denominator must be positive");
    BigInt q = num / den;
    if (q * den < num) ++q;
    return q;
}

// Smallest integer >= r.
inline BigInt ceil_rational(const Rational& r) {
    return ceil_div(numerator(r), denominator(r));
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string rational_to_string(const Rational& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

// Accepts "n", "n/d", and plain decimals like "0.125" (parsed exactly).
inline Rational parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("parse_rational: empty string");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        BigInt num(text.substr(0, slash));
        BigInt den(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("parse_rational: zero denominator");
        return Rational(num, den);
    }
    auto dot = text.find('.');
    if (dot != std::string::npos) {
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        std::size_t frac_len = text.size() - dot - 1;
        if (digits.empty() || digits == "-" || digits == "+")
            throw std::invalid_argument("parse_rational: malformed decimal");
        BigInt num(digits);
        BigInt den = 1;
        for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
        return Rational(num, den);
    }
    return Rational(BigInt(text));
}

}  // namespace mismatchlab
