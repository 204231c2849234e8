#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace econsim {

/// Signed fixed-point quantity stored as an integer count of 1/Scale.
///
/// All bookkeeping that must balance exactly (money, physiological levels,
/// in-game time) uses this type; doubles appear only at the edges (quotes,
/// ratios, reports).
template <class Tag, std::int64_t Scale>
class FixedPoint {
public:
    static constexpr std::int64_t scale = Scale;

    constexpr FixedPoint() = default;

    static constexpr FixedPoint from_raw(std::int64_t raw) {
        FixedPoint v;
        v.raw_ = raw;
        return v;
    }
    static FixedPoint from_double(double value) {
        const double scaled = std::round(value * static_cast<double>(Scale));
        if (!std::isfinite(scaled) ||
            std::fabs(scaled) > static_cast<double>(std::numeric_limits<std::int64_t>::max() / 2)) {
            throw std::out_of_range("fixed-point value out of range");
        }
        return from_raw(static_cast<std::int64_t>(scaled));
    }
    static constexpr FixedPoint whole(std::int64_t units) { return from_raw(units * Scale); }
    static constexpr FixedPoint zero() { return {}; }

    [[nodiscard]] constexpr std::int64_t raw() const { return raw_; }
    [[nodiscard]] constexpr double to_double() const {
        return static_cast<double>(raw_) / static_cast<double>(Scale);
    }

    constexpr FixedPoint& operator+=(FixedPoint o) {
        raw_ += o.raw_;
        return *this;
    }
    constexpr FixedPoint& operator-=(FixedPoint o) {
        raw_ -= o.raw_;
        return *this;
    }
    friend constexpr FixedPoint operator+(FixedPoint a, FixedPoint b) { return a += b; }
    friend constexpr FixedPoint operator-(FixedPoint a, FixedPoint b) { return a -= b; }
    friend constexpr FixedPoint operator-(FixedPoint a) { return from_raw(-a.raw_); }
    friend constexpr FixedPoint operator*(FixedPoint a, std::int64_t k) { return from_raw(a.raw_ * k); }
    friend constexpr FixedPoint operator*(std::int64_t k, FixedPoint a) { return from_raw(a.raw_ * k); }

    friend constexpr auto operator<=>(FixedPoint, FixedPoint) = default;
    friend constexpr bool operator==(FixedPoint, FixedPoint) = default;

private:
    std::int64_t raw_ = 0;
};

struct CurrencyTag {};
struct LevelTag {};
struct DurationTag {};

/// Money, exact to 1e-9 currency units.
using Currency = FixedPoint<CurrencyTag, 1'000'000'000>;
/// Satiety / energy / health, exact to 1e-3 state units.
using Level = FixedPoint<LevelTag, 1'000>;
/// In-game duration, exact to the millisecond.
using Duration = FixedPoint<DurationTag, 1'000>;

inline constexpr std::int64_t kMillisPerHour = 3'600'000;

inline Duration seconds(double s) { return Duration::from_double(s); }
inline Duration hours(double h) { return Duration::from_double(h * 3600.0); }
inline double to_hours(Duration d) { return static_cast<double>(d.raw()) / kMillisPerHour; }

/// Whole-unit commodity quantity.
using Units = std::int64_t;

/// Dense index into the commodity catalog.
struct CommodityId {
    std::uint16_t index = 0;
    friend constexpr auto operator<=>(CommodityId, CommodityId) = default;
};

/// Dense index into the occupation catalog.
struct OccupationId {
    std::uint16_t index = 0;
    friend constexpr auto operator<=>(OccupationId, OccupationId) = default;
};

using AgentId = std::uint32_t;

/// Cost of `rate_per_hour` applied for `d`, floored to the level resolution.
inline Level per_hour_cost(Level rate_per_hour, Duration d) {
    const __int128 v = static_cast<__int128>(rate_per_hour.raw()) * d.raw() / kMillisPerHour;
    return Level::from_raw(static_cast<std::int64_t>(v));
}

}  // namespace econsim
