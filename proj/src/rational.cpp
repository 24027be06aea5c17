#include "unroll/rational.hpp"

#include "unroll/errors.hpp"

#include <ostream>

namespace unroll {

Rational::Rational(long n, long d) {
    if (d == 0)
        throw ValidationError("zero_denominator", "rational " + std::to_string(n) + "/0");
    v_ = mpq_class(n, d);
    v_.canonicalize();
}

Rational::Rational(const mpq_class& v) : v_(v) {
    v_.canonicalize();
}

Rational Rational::from_string(const std::string& text) {
    if (text.empty())
        throw ValidationError("bad_rational", "empty rational literal");
    // mpq_class accepts forms like "1/-2" or stray whitespace; be stricter.
    auto digits = [](const std::string& s) {
        if (s.empty() || (s.size() == 1 && (s[0] == '+' || s[0] == '-')))
            return false;
        for (size_t i = 0; i < s.size(); ++i) {
            if (i == 0 && (s[i] == '+' || s[i] == '-'))
                continue;
            if (s[i] < '0' || s[i] > '9')
                return false;
        }
        return true;
    };
    const auto slash = text.find('/');
    const std::string num = text.substr(0, slash);
    if (!digits(num))
        throw ValidationError("bad_rational", "malformed numerator in '" + text + "'");
    if (slash != std::string::npos) {
        const std::string den = text.substr(slash + 1);
        if (!digits(den) || den[0] == '+' || den[0] == '-')
            throw ValidationError("bad_rational",
                                  "denominator must be a positive integer in '" + text + "'");
        if (mpz_class(den, 10) == 0)
            throw ValidationError("zero_denominator", "rational '" + text + "'");
    }
    mpq_class v(text, 10);
    v.canonicalize();
    return Rational(v);
}

std::string Rational::str() const {
    return v_.get_str();
}

Rational Rational::abs() const {
    return sgn(v_) < 0 ? -*this : *this;
}

Rational Rational::operator-() const {
    Rational r;
    r.v_ = -v_;
    return r;
}

Rational& Rational::operator+=(const Rational& o) {
    v_ += o.v_;
    return *this;
}

Rational& Rational::operator-=(const Rational& o) {
    v_ -= o.v_;
    return *this;
}

Rational& Rational::operator*=(const Rational& o) {
    v_ *= o.v_;
    return *this;
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.is_zero())
        throw ValidationError("zero_denominator", "division of " + str() + " by zero");
    v_ /= o.v_;
    return *this;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.str();
}

} // namespace unroll
