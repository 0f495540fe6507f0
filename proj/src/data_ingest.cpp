// SPDX-License-Identifier: Apache-2.0
#include "tsgan/data_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "tsgan/error.hpp"

namespace tsgan {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename Int>
bool parse_int(std::string_view s, Int& value) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

bool looks_like_epoch(std::string_view s) {
  if (!s.empty() && s.front() == '-') s.remove_prefix(1);
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::optional<Timestamp> parse_epoch(std::string_view s) {
  long long secs = 0;
  if (!parse_int(s, secs)) return std::nullopt;
  return Timestamp{std::chrono::seconds{secs}};
}

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::optional<std::size_t> find_column(const std::vector<std::string_view>& header, std::string_view name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

}  // namespace

std::vector<double> TimeSeries::closes() const {
  std::vector<double> out;
  out.reserve(bars.size());
  for (const auto& b : bars) out.push_back(b.close);
  return out;
}

std::optional<Timestamp> parse_rfc3339(std::string_view s) {
  // YYYY-MM-DD[T ]HH:MM[:SS](Z|+hh:mm|-hh:mm)
  if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
      s[13] != ':') {
    return std::nullopt;
  }
  int year = 0;
  unsigned month = 0, day = 0;
  int hour = 0, minute = 0, second = 0;
  if (!parse_int(s.substr(0, 4), year) || !parse_int(s.substr(5, 2), month) || !parse_int(s.substr(8, 2), day) ||
      !parse_int(s.substr(11, 2), hour) || !parse_int(s.substr(14, 2), minute)) {
    return std::nullopt;
  }
  std::size_t pos = 16;
  if (pos < s.size() && s[pos] == ':') {
    if (s.size() < pos + 3 || !parse_int(s.substr(pos + 1, 2), second)) return std::nullopt;
    pos += 3;
  }
  std::chrono::seconds offset{0};
  const std::string_view zone = s.substr(pos);
  if (zone == "Z" || zone == "z") {
    // UTC
  } else if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':') {
    int oh = 0, om = 0;
    if (!parse_int(zone.substr(1, 2), oh) || !parse_int(zone.substr(4, 2), om) || oh > 23 || om > 59) {
      return std::nullopt;
    }
    offset = std::chrono::hours{oh} + std::chrono::minutes{om};
    if (zone[0] == '-') offset = -offset;
  } else {
    return std::nullopt;
  }
  if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) return std::nullopt;
  const auto local = std::chrono::sys_days{ymd} + std::chrono::hours{hour} + std::chrono::minutes{minute} +
                     std::chrono::seconds{second};
  return Timestamp{local - offset};
}

std::string format_rfc3339(Timestamp ts) {
  const auto day = std::chrono::floor<std::chrono::days>(ts);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{ts - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::optional<std::string> bar_violation(const Bar& b) {
  for (double p : {b.open, b.high, b.low, b.close}) {
    if (!std::isfinite(p)) return "non-finite price";
    if (p <= 0.0) return "non-positive price";
  }
  if (b.low > b.high) return "low above high";
  if (b.open < b.low || b.open > b.high) return "open outside [low, high]";
  if (b.close < b.low || b.close > b.high) return "close outside [low, high]";
  return std::nullopt;
}

LoadResult load_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty input: missing header row");
  const std::string header_line = line;
  const auto header = split_fields(header_line);

  const auto ts_col = find_column(header, schema.timestamp);
  const auto close_col = find_column(header, schema.close);
  if (!ts_col) throw DataError("schema error: missing column '" + schema.timestamp + "'");
  if (!close_col) throw DataError("schema error: missing column '" + schema.close + "'");
  const auto open_col = find_column(header, schema.open);
  const auto high_col = find_column(header, schema.high);
  const auto low_col = find_column(header, schema.low);
  const int ohlc_present = int(open_col.has_value()) + int(high_col.has_value()) + int(low_col.has_value());
  if (ohlc_present != 0 && ohlc_present != 3) {
    throw DataError("schema error: open, high and low must be supplied together");
  }

  LoadResult result;
  result.series.has_ohlc = ohlc_present == 3;
  std::optional<TimestampFormat> format;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++result.rows_read;
    const auto fields = split_fields(line);
    auto reject = [&](std::string reason) { result.rejects.push_back({line_no, std::move(reason)}); };
    if (fields.size() != header.size()) {
      reject("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
      continue;
    }

    const std::string_view ts_text = fields[*ts_col];
    const TimestampFormat row_format = looks_like_epoch(ts_text) ? TimestampFormat::epoch_seconds
                                                                 : TimestampFormat::rfc3339;
    if (!format) format = row_format;
    if (row_format != *format) {
      reject("timestamp format differs from the rest of the file");
      continue;
    }
    const auto ts = row_format == TimestampFormat::epoch_seconds ? parse_epoch(ts_text) : parse_rfc3339(ts_text);
    if (!ts) {
      reject("unparseable timestamp '" + std::string(ts_text) + "'");
      continue;
    }

    Bar bar;
    bar.timestamp = *ts;
    auto read_price = [&](std::size_t col, double& dst) {
      const auto v = parse_double(fields[col]);
      if (!v) {
        reject("unparseable " + std::string(header[col]) + " '" + std::string(fields[col]) + "'");
        return false;
      }
      if (!std::isfinite(*v)) {
        reject("non-finite " + std::string(header[col]));
        return false;
      }
      dst = *v;
      return true;
    };
    if (!read_price(*close_col, bar.close)) continue;
    if (result.series.has_ohlc) {
      if (!read_price(*open_col, bar.open) || !read_price(*high_col, bar.high) || !read_price(*low_col, bar.low)) {
        continue;
      }
    } else {
      bar.open = bar.high = bar.low = bar.close;
    }
    result.series.bars.push_back(bar);
    result.source_rows.push_back(line_no);
  }
  result.series.timestamp_format = format.value_or(TimestampFormat::rfc3339);
  std::vector<std::size_t> order(result.series.bars.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.series.bars[a].timestamp < result.series.bars[b].timestamp;
  });
  std::vector<Bar> bars;
  std::vector<std::size_t> rows;
  bars.reserve(order.size());
  rows.reserve(order.size());
  for (const std::size_t i : order) {
    bars.push_back(result.series.bars[i]);
    rows.push_back(result.source_rows[i]);
  }
  result.series.bars = std::move(bars);
  result.source_rows = std::move(rows);
  return result;
}

LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return load_csv(in, schema);
}

std::string format_timestamp(Timestamp ts, TimestampFormat format) {
  return format == TimestampFormat::epoch_seconds ? std::to_string(ts.time_since_epoch().count())
                                                  : format_rfc3339(ts);
}

std::string format_price(double value) { return format_double(value); }

void write_csv(std::ostream& out, const TimeSeries& series) {
  out << (series.has_ohlc ? "timestamp,open,high,low,close\n" : "timestamp,close\n");
  for (const auto& b : series.bars) {
    out << format_timestamp(b.timestamp, series.timestamp_format);
    if (series.has_ohlc) {
      out << ',' << format_double(b.open) << ',' << format_double(b.high) << ',' << format_double(b.low);
    }
    out << ',' << format_double(b.close) << '\n';
  }
}

void write_rejects_csv(std::ostream& out, std::span<const Reject> rejects) {
  out << "row,reason\n";
  for (const auto& r : rejects) {
    std::string reason = r.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    out << r.row << ',' << reason << '\n';
  }
}

CleanResult clean(const TimeSeries& series) {
  std::vector<std::size_t> order(series.bars.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return series.bars[a].timestamp < series.bars[b].timestamp;
  });

  CleanResult result;
  result.series = series;
  result.series.bars.clear();
  result.series.bars.reserve(series.bars.size());
  for (const std::size_t idx : order) {
    const Bar& bar = series.bars[idx];
    if (auto why = bar_violation(bar)) {
      ++result.dropped_invalid;
      result.dropped.push_back({idx, *why});
      continue;
    }
    if (!result.series.bars.empty() && result.series.bars.back().timestamp == bar.timestamp) {
      ++result.dropped_duplicates;
      result.dropped.push_back({idx, "duplicate timestamp " + format_rfc3339(bar.timestamp)});
      continue;
    }
    result.series.bars.push_back(bar);
  }
  if (result.series.bars.empty()) throw DataError("no usable data");
  return result;
}

std::vector<CalendarFeatures> extract_calendar(const TimeSeries& series) {
  std::vector<CalendarFeatures> out;
  out.reserve(series.bars.size());
  for (const auto& b : series.bars) {
    const auto day = std::chrono::floor<std::chrono::days>(b.timestamp);
    const std::chrono::year_month_day ymd{day};
    const std::chrono::hh_mm_ss hms{b.timestamp - day};
    out.push_back({static_cast<int>(static_cast<unsigned>(ymd.month())),
                   static_cast<int>(static_cast<unsigned>(ymd.day())), static_cast<int>(hms.hours().count()),
                   static_cast<int>(hms.minutes().count())});
  }
  return out;
}

void write_calendar_csv(std::ostream& out, const TimeSeries& series) {
  const auto features = extract_calendar(series);
  out << "timestamp,month,day,hour,minute\n";
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    out << format_rfc3339(series.bars[i].timestamp) << ',' << f.month << ',' << f.day << ',' << f.hour << ','
        << f.minute << '\n';
  }
}

std::vector<ConditionedPair> make_pairs(std::span<const double> closes, std::size_t window) {
  if (window == 0) throw DataError("condition window must be at least 1");
  if (closes.size() <= window) {
    throw DataError("series of length " + std::to_string(closes.size()) + " is too short for window " +
                    std::to_string(window) + " (need at least " + std::to_string(window + 1) + ")");
  }
  for (std::size_t i = 0; i < closes.size(); ++i) {
    if (!std::isfinite(closes[i])) throw DataError("non-finite close at index " + std::to_string(i));
  }
  std::vector<ConditionedPair> pairs;
  pairs.reserve(closes.size() - window);
  for (std::size_t t = window; t < closes.size(); ++t) {
    pairs.push_back({std::vector<double>(closes.begin() + static_cast<std::ptrdiff_t>(t - window),
                                         closes.begin() + static_cast<std::ptrdiff_t>(t)),
                     closes[t]});
  }
  return pairs;
}

}  // namespace tsgan
