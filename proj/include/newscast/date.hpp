#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace newscast {

/// Proleptic Gregorian calendar date stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    static constexpr Date from_days(std::int32_t days) {
        Date d;
        d.days_ = days;
        return d;
    }
    static Date from_ymd(int year, unsigned month, unsigned day);
    /// Strict `YYYY-MM-DD`; returns nullopt on any malformed or impossible date.
    static std::optional<Date> parse(std::string_view text);

    constexpr std::int32_t days() const noexcept { return days_; }
    std::string to_string() const;
    /// 0 = Monday ... 6 = Sunday.
    int weekday() const noexcept;
    bool is_weekend() const noexcept { return weekday() >= 5; }

    Date plus_days(std::int32_t n) const noexcept { return from_days(days_ + n); }

    friend constexpr auto operator<=>(Date, Date) = default;

private:
    std::int32_t days_ = 0;
};

}  // namespace newscast
