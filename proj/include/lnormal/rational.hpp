#pragma once

// Exact rational arithmetic shared by every module. Backed by GMP's C++
// interface; nothing in the library touches floating point except the
// decimal rendering helpers at the bottom of this file.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lnormal {

using Rational = mpq_class;
using Integer = mpz_class;

/// A single symbol of the alphabet {1, 2, 3, ...}.
using Digit = std::uint32_t;

/// Raised when a request would materialize more data than the configured caps allow.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses "p/q" or "p". The result is canonicalized; a zero denominator throws.
inline Rational parse_rational(std::string_view text)
{
    auto is_int = [](std::string_view s) {
        if (s.empty()) return false;
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (s[i] < '0' || s[i] > '9') return false;
        return true;
    };
    auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view{"1"} : text.substr(slash + 1);
    if (!is_int(num) || !is_int(den) || den[0] == '-' || den[0] == '+')
        throw std::invalid_argument("malformed rational '" + std::string(text) + "', expected p/q");
    Integer n(std::string(num[0] == '+' ? num.substr(1) : num));
    Integer d{std::string(den)};
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    Rational r(n, d);
    r.canonicalize();
    return r;
}

/// "p/q" in lowest terms, or "p" for integers.
inline std::string to_string(const Rational& r) { return r.get_str(); }

inline Integer factorial(unsigned n)
{
    Integer f;
    mpz_fac_ui(f.get_mpz_t(), n);
    return f;
}

inline Integer floor_of(const Rational& r)
{
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return q;
}

inline Rational pow(const Rational& base, unsigned long exponent)
{
    Integer num, den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), exponent);
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), exponent);
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline Rational abs_of(const Rational& r) { return r < 0 ? Rational(-r) : r; }

inline std::uint64_t to_u64(const Integer& z)
{
    if (z < 0 || mpz_sizeinbase(z.get_mpz_t(), 2) > 64)
        throw std::overflow_error("integer does not fit in 64 bits");
    std::uint64_t out = 0;
    mpz_export(&out, nullptr, -1, sizeof(out), 0, 0, z.get_mpz_t());
    return out;
}

inline Integer from_u64(std::uint64_t v)
{
    Integer z;
    mpz_import(z.get_mpz_t(), 1, -1, sizeof(v), 0, 0, &v);
    return z;
}

inline Rational from_u64(std::uint64_t num, std::uint64_t den)
{
    Rational r(from_u64(num), from_u64(den));
    r.canonicalize();
    return r;
}

/// Decimal expansion of |r| truncated (not rounded) to `places` fractional digits.
inline std::string decimal_truncated(const Rational& r, unsigned places)
{
    Rational a = abs_of(r);
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, places);
    Integer scaled = floor_of(Rational(a * scale));
    std::string digits = scaled.get_str();
    if (digits.size() <= places) digits.insert(0, places + 1 - digits.size(), '0');
    std::string out = (r < 0 ? "-" : "") + digits.substr(0, digits.size() - places);
    if (places > 0) out += "." + digits.substr(digits.size() - places);
    return out;
}

/// Render-only conversion; never feed the result back into exact computations.
inline double to_double(const Rational& r) { return r.get_d(); }

}  // namespace lnormal
