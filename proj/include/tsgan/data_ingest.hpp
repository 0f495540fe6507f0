// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tsgan {

using Timestamp = std::chrono::sys_seconds;

// One minute bar. Files without OHLC columns carry open = high = low = close.
struct Bar {
  Timestamp timestamp{};
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
};

enum class TimestampFormat { rfc3339, epoch_seconds };

struct TimeSeries {
  std::string asset_id;
  std::string period_label;
  std::vector<Bar> bars;
  bool has_ohlc = false;
  TimestampFormat timestamp_format = TimestampFormat::rfc3339;

  std::vector<double> closes() const;
};

struct CalendarFeatures {
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;
};

/// Training unit: `condition` holds the d normalized closes preceding `target`.
struct ConditionedPair {
  std::vector<double> condition;
  double target = 0.0;
};

struct CsvSchema {
  std::string timestamp = "timestamp";
  std::string close = "close";
  std::string open = "open";
  std::string high = "high";
  std::string low = "low";
};

/// A rejected or dropped input row. `row` is the 1-based line number in the
/// source file (the header is line 1), or the bar index for in-memory series.
struct Reject {
  std::size_t row = 0;
  std::string reason;
};

struct LoadResult {
  TimeSeries series;
  std::vector<Reject> rejects;
  std::size_t rows_read = 0;
  std::vector<std::size_t> source_rows;  // file line of each bar in `series`
};

struct CleanResult {
  TimeSeries series;
  std::size_t dropped_duplicates = 0;
  std::size_t dropped_invalid = 0;
  std::vector<Reject> dropped;
};

std::optional<Timestamp> parse_rfc3339(std::string_view text);
std::string format_rfc3339(Timestamp ts);
/// RFC 3339 text or decimal epoch seconds, matching how the series was read.
std::string format_timestamp(Timestamp ts, TimestampFormat format);
/// 17 significant digits, so the text reloads to the identical double.
std::string format_price(double value);

/// Returns the reason a bar breaks the price invariants, if any.
std::optional<std::string> bar_violation(const Bar& bar);

// Throws DataError when a required column is missing or the file is unreadable.
// Unparseable rows land in LoadResult::rejects. Bars come back sorted
// ascending by timestamp; equal timestamps keep file order.
LoadResult load_csv(std::istream& in, const CsvSchema& schema = {});
LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

// Writes the series back in the same timestamp format it was read with.
// Prices use 17 significant digits so a reload is bit-identical.
void write_csv(std::ostream& out, const TimeSeries& series);
void write_rejects_csv(std::ostream& out, std::span<const Reject> rejects);

/// Sorts, drops duplicate timestamps (keeping the first) and bars that break
/// the Bar invariants. Throws DataError("no usable data") if nothing survives.
CleanResult clean(const TimeSeries& series);

std::vector<CalendarFeatures> extract_calendar(const TimeSeries& series);
void write_calendar_csv(std::ostream& out, const TimeSeries& series);

/// Sliding windows of length `window` over `closes`; one pair per index
/// t >= window. Throws DataError if closes.size() <= window or window == 0.
std::vector<ConditionedPair> make_pairs(std::span<const double> closes, std::size_t window);

}  // namespace tsgan
