#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace eventcast {

/// Calendar date at day granularity, stored as days since 1970-01-01.
/// Parsing is strict ISO-8601 (YYYY-MM-DD) with real calendar validation.
class Date {
 public:
  Date() = default;

  static std::optional<Date> parse(std::string_view iso);
  static std::optional<Date> from_ymd(int year, int month, int day);
  static Date from_serial(std::int32_t days) {
    Date d;
    d.days_ = days;
    return d;
  }

  std::int32_t serial() const noexcept { return days_; }
  int year() const noexcept;
  int month() const noexcept;
  int day() const noexcept;
  std::string to_string() const;

  auto operator<=>(const Date&) const = default;

 private:
  std::int32_t days_ = 0;
};

inline Date add_days(Date date, int delta) {
  return Date::from_serial(date.serial() + delta);
}

/// Absolute distance in days.
inline int day_distance(Date a, Date b) {
  std::int64_t d = static_cast<std::int64_t>(a.serial()) - b.serial();
  return static_cast<int>(d < 0 ? -d : d);
}

}  // namespace eventcast
