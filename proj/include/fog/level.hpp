#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace fog {

// Element of N ∪ {ω}; ω absorbs addition and subtraction and exceeds every k.
class Level {
public:
    constexpr Level() = default;
    static constexpr Level finite(std::uint64_t k) { return Level(k, false); }
    static constexpr Level omega() { return Level(0, true); }

    constexpr bool is_omega() const { return omega_; }
    constexpr std::uint64_t value() const { return value_; }

    constexpr Level operator+(std::uint64_t n) const { return omega_ ? *this : finite(value_ + n); }
    // Saturates at 0 for finite levels.
    constexpr Level operator-(std::uint64_t n) const {
        return omega_ ? *this : finite(value_ >= n ? value_ - n : 0);
    }

    friend constexpr bool operator==(const Level&, const Level&) = default;
    friend constexpr std::strong_ordering operator<=>(const Level& a, const Level& b) {
        if (a.omega_ || b.omega_) return a.omega_ <=> b.omega_;
        return a.value_ <=> b.value_;
    }

    std::string str() const { return omega_ ? "omega" : std::to_string(value_); }

private:
    constexpr Level(std::uint64_t v, bool w) : value_(v), omega_(w) {}
    std::uint64_t value_ = 0;
    bool omega_ = false;
};

// What a cutoff-K oracle can say about an eq-level: exactly e < K, or at least K.
class EqLevel {
public:
    constexpr EqLevel() = default;
    static constexpr EqLevel finite(unsigned e) { return EqLevel(e, false); }
    static constexpr EqLevel at_least(unsigned k) { return EqLevel(k, true); }

    constexpr bool is_finite() const { return !at_least_; }
    constexpr bool is_at_least() const { return at_least_; }
    // The exact level when finite, the cutoff otherwise.
    constexpr unsigned value() const { return value_; }

    friend constexpr bool operator==(const EqLevel&, const EqLevel&) = default;
    // AtLeast(K) sorts above every Finite(e) with e < K; two AtLeast compare by K.
    friend constexpr std::strong_ordering operator<=>(const EqLevel& a, const EqLevel& b) {
        if (a.value_ != b.value_) return a.value_ <=> b.value_;
        return a.at_least_ <=> b.at_least_;
    }

    std::string str() const {
        return at_least_ ? "at-least " + std::to_string(value_) : "finite " + std::to_string(value_);
    }

private:
    constexpr EqLevel(unsigned v, bool a) : value_(v), at_least_(a) {}
    unsigned value_ = 0;
    bool at_least_ = false;
};

}  // namespace fog
