#include "lagdtw/panel.hpp"

#include <charconv>

#include "lagdtw/csv.hpp"
#include "lagdtw/error.hpp"

namespace lagdtw {
namespace {

bool as_integer(const std::string& text, long long& value) {
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  return result.ec == std::errc{} && result.ptr == text.data() + text.size();
}

}  // namespace

Panel Panel::slice(std::size_t first, std::size_t count) const {
  if (first + count > length()) throw Error(ErrorCode::InvalidArgument, "panel slice out of range");
  Panel out;
  out.asset_ids = asset_ids;
  out.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(first),
                   dates.begin() + static_cast<std::ptrdiff_t>(first + count));
  out.values = Matrix(assets(), count);
  for (std::size_t i = 0; i < assets(); ++i)
    for (std::size_t t = 0; t < count; ++t) out.values(i, t) = values(i, first + t);
  return out;
}

bool date_less(const std::string& a, const std::string& b) {
  long long x = 0;
  long long y = 0;
  if (as_integer(a, x) && as_integer(b, y)) return x < y;
  return a < b;
}

std::vector<std::string> default_asset_ids(std::size_t n) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back("x" + std::to_string(i + 1));
  return ids;
}

std::vector<std::string> default_dates(std::size_t length) {
  std::vector<std::string> dates;
  dates.reserve(length);
  for (std::size_t t = 0; t < length; ++t) dates.push_back(std::to_string(t + 1));
  return dates;
}

void write_panel_csv(const std::filesystem::path& path, const Panel& panel) {
  if (panel.asset_ids.size() != panel.assets() || panel.dates.size() != panel.length())
    throw Error(ErrorCode::ShapeMismatch, "panel labels do not match its values");
  auto out = csv::open_output(path);
  std::vector<std::string> fields{"date"};
  fields.insert(fields.end(), panel.asset_ids.begin(), panel.asset_ids.end());
  csv::write_row(out, fields);
  for (std::size_t t = 0; t < panel.length(); ++t) {
    fields.assign(1, panel.dates[t]);
    for (std::size_t i = 0; i < panel.assets(); ++i)
      fields.push_back(csv::format_number(panel.values(i, t)));
    csv::write_row(out, fields);
  }
}

}  // namespace lagdtw
