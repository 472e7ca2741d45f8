#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace qbell {

using Rational = mpq_class;

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

// mpq_class(num, den) does not canonicalize, and GMP arithmetic requires canonical operands.
inline Rational make_rational(long num, long den) {
    if (den == 0) throw std::invalid_argument("zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

// Parses "p/q", an integer, or a plain decimal such as "0.125" exactly.
inline Rational parse_rational(const std::string& text) {
    std::string s = text;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
    s = s.substr(start);
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    Rational r;
    auto dot = s.find('.');
    bool has_exp = s.find_first_of("eE") != std::string::npos;
    if (has_exp) throw std::invalid_argument("exponent notation not accepted as exact rational: " + text);
    if (dot == std::string::npos) {
        if (r.set_str(s, 10) != 0) throw std::invalid_argument("bad rational literal: " + text);
        if (r.get_den() == 0) throw std::invalid_argument("zero denominator: " + text);
        r.canonicalize();
        return r;
    }
    if (s.find('/') != std::string::npos) throw std::invalid_argument("bad rational literal: " + text);
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    std::size_t frac_len = s.size() - dot - 1;
    if (digits.empty() || digits == "-" || digits == "+") throw std::invalid_argument("bad rational literal: " + text);
    mpz_class num;
    if (digits[0] == '+') digits.erase(0, 1);
    if (num.set_str(digits, 10) != 0) throw std::invalid_argument("bad rational literal: " + text);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(frac_len));
    r = Rational(num, den);
    r.canonicalize();
    return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

inline std::string to_string(double d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

inline double to_double(const Rational& r) { return r.get_d(); }
inline double to_double(double d) { return d; }

inline Rational to_rational(const Rational& r) { return r; }
inline Rational to_rational(double d) {
    if (!std::isfinite(d)) throw std::invalid_argument("non-finite value");
    return Rational(d);
}

template <class T>
T from_double(double d) {
    if constexpr (is_exact_v<T>) {
        if (!std::isfinite(d)) throw std::invalid_argument("non-finite value");
        return Rational(d);
    } else {
        return d;
    }
}

template <class T>
T from_rational(const Rational& r) {
    if constexpr (is_exact_v<T>)
        return r;
    else
        return r.get_d();
}

template <class T>
T from_int(long v) {
    return T(v);
}

// Exact comparisons in rational mode; tol only matters for double.
template <class T>
bool is_zero(const T& x, double tol) {
    if constexpr (is_exact_v<T>) {
        (void)tol;
        return sgn(x) == 0;
    } else {
        return std::abs(x) <= tol;
    }
}

template <class T>
bool is_positive(const T& x, double tol) {
    if constexpr (is_exact_v<T>) {
        (void)tol;
        return sgn(x) > 0;
    } else {
        return x > tol;
    }
}

template <class T>
bool is_negative(const T& x, double tol) {
    if constexpr (is_exact_v<T>) {
        (void)tol;
        return sgn(x) < 0;
    } else {
        return x < -tol;
    }
}

template <class T>
bool approx_equal(const T& x, const T& y, double tol) {
    T d = x - y;
    return is_zero<T>(d, tol);
}

template <class T>
T abs_value(const T& x) {
    if constexpr (is_exact_v<T>) {
        return abs(x);
    } else {
        return std::abs(x);
    }
}

template <class T>
std::string mode_name() {
    return is_exact_v<T> ? "rational" : "float";
}

}  // namespace qbell
