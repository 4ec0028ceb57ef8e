#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <type_traits>

#include "errors.hpp"

namespace partdecomp {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Scalar types a numeric backend may run on: exact rationals or doubles.
template <typename T>
concept Scalar = std::is_same_v<T, Rational> || std::is_same_v<T, double>;

template <Scalar T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

template <Scalar T>
T from_integer(const Integer& v) {
    if constexpr (is_exact_v<T>) {
        return Rational(v);
    } else {
        return v.template convert_to<double>();
    }
}

template <Scalar To>
To convert(const Rational& v) {
    if constexpr (is_exact_v<To>) {
        return v;
    } else {
        return v.convert_to<double>();
    }
}

inline std::string to_string(const Rational& v) {
    return v.str();
}

inline std::string to_string(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string to_string(const Integer& v) {
    return v.str();
}

/// Parses "p/q", an integer, or a decimal literal with optional exponent
/// ("0.25", "-1.5e-3") into an exact rational.
inline Rational parse_rational(std::string_view text) {
    auto fail = [&](std::size_t pos) -> Rational {
        throw ParseError("malformed number '" + std::string(text) + "'", pos);
    };
    if (text.empty()) {
        return fail(0);
    }
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        Rational num = parse_rational(text.substr(0, slash));
        Rational den = parse_rational(text.substr(slash + 1));
        if (den == 0) {
            return fail(slash + 1);
        }
        return num / den;
    }
    std::size_t i = 0;
    bool negative = false;
    if (text[i] == '+' || text[i] == '-') {
        negative = text[i] == '-';
        ++i;
    }
    Integer digits = 0;
    int scale = 0;
    bool any_digit = false;
    bool seen_dot = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c >= '0' && c <= '9') {
            digits = digits * 10 + (c - '0');
            any_digit = true;
            if (seen_dot) {
                --scale;
            }
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else {
            break;
        }
    }
    if (!any_digit) {
        return fail(i);
    }
    if (i < text.size()) {
        if (text[i] != 'e' && text[i] != 'E') {
            return fail(i);
        }
        ++i;
        int exp = 0;
        auto res = std::from_chars(text.data() + i + (i < text.size() && text[i] == '+'),
                                   text.data() + text.size(), exp);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
            return fail(i);
        }
        scale += exp;
    }
    Rational value(digits);
    Integer ten_pow = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(std::abs(scale)));
    if (scale > 0) {
        value *= Rational(ten_pow);
    } else if (scale < 0) {
        value /= Rational(ten_pow);
    }
    return negative ? Rational(-value) : value;
}

/// Exact rational for a double via its shortest round-trip decimal form,
/// so 0.1 becomes 1/10 instead of the binary expansion.
inline Rational rational_from_double(double v) {
    if (!std::isfinite(v)) {
        throw DomainError("non-finite value cannot be made exact");
    }
    return parse_rational(to_string(v));
}

}  // namespace partdecomp
