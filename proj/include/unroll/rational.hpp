#pragma once

#include <gmpxx.h>

#include <iosfwd>
#include <string>

namespace unroll {

// Arbitrary-precision rational. Always canonical: lowest terms, denominator
// strictly positive, sign on the numerator. Equality is exact value equality;
// there is no epsilon anywhere in this codebase.
class Rational {
public:
    Rational() : v_(0) {}
    Rational(long n) : v_(n) {}              // NOLINT: implicit on purpose
    Rational(long n, long d);
    explicit Rational(const mpq_class& v);

    // Parses "p/q" or "p", sign on the numerator ("-3/4"). Rejects zero or
    // negative denominators and malformed text; reduces to lowest terms.
    static Rational from_string(const std::string& text);

    // "p/q", or just "p" when the denominator is 1.
    std::string str() const;

    bool is_zero() const { return sgn(v_) == 0; }
    bool is_integer() const { return v_.get_den() == 1; }
    Rational abs() const;

    Rational operator-() const;
    Rational& operator+=(const Rational& o);
    Rational& operator-=(const Rational& o);
    Rational& operator*=(const Rational& o);
    Rational& operator/=(const Rational& o); // throws on division by zero

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) == 0; }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) < 0; }
    friend bool operator<=(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) <= 0; }
    friend bool operator>(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) > 0; }
    friend bool operator>=(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) >= 0; }

private:
    mpq_class v_;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }

} // namespace unroll
