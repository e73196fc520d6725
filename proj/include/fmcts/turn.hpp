#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmcts {

/// Fraction of a full clockwise turn, kept as an exact reduced rational in [0, 1).
class Turn {
public:
    constexpr Turn() = default;

    Turn(std::int64_t num, std::int64_t den) {
        if (den <= 0)
            throw std::invalid_argument("turn denominator must be positive");
        num %= den;
        if (num < 0)
            num += den;
        const std::int64_t g = std::gcd(num, den);
        num_ = num / g;
        den_ = den / g;
    }

    constexpr std::int64_t num() const { return num_; }
    constexpr std::int64_t den() const { return den_; }
    constexpr bool is_zero() const { return num_ == 0; }

    /// (1 - t) mod 1: the mirror image of this turn.
    Turn negated() const { return Turn(-num_, den_); }

    friend Turn operator+(Turn a, Turn b) { return Turn(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_); }
    friend Turn operator-(Turn a, Turn b) { return Turn(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_); }

    friend constexpr bool operator==(Turn a, Turn b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend constexpr std::strong_ordering operator<=>(Turn a, Turn b) {
        return a.num_ * b.den_ <=> b.num_ * a.den_;
    }

    std::string to_string() const {
        if (num_ == 0)
            return "0";
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// Sequence of relative turns; the empty walk denotes the anchor itself.
using Walk = std::vector<Turn>;

std::string walk_to_string(const Walk& w);

/// Walks order by length first, then lexicographically by turn.
inline bool walk_less(const Walk& a, const Walk& b) {
    if (a.size() != b.size())
        return a.size() < b.size();
    return a < b;
}

} // namespace fmcts
