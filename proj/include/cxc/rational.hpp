#pragma once

#include <cstdint>
#include <string>

namespace cxc {

/// Exact rational on 64-bit numerator/denominator with 128-bit intermediates.
/// Always normalized: gcd(num, den) = 1 and den > 0. Overflow throws.
class Rational {
public:
    Rational() = default;
    Rational(int64_t n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)
    Rational(int64_t n, int64_t d);

    static Rational parse(const std::string& text);

    int64_t num() const { return num_; }
    int64_t den() const { return den_; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string str() const;

    /// Largest integer not exceeding the value.
    int64_t floor() const;
    /// Fractional part in [0, 1).
    Rational frac() const { return *this - Rational(floor()); }

    Rational operator-() const { return Rational(-num_, den_); }
    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b);
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

private:
    static Rational from_wide(__int128 n, __int128 d);

    int64_t num_ = 0;
    int64_t den_ = 1;
};

inline Rational min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace cxc
