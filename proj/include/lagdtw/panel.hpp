#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "lagdtw/matrix.hpp"

namespace lagdtw {

/// n assets observed on T dates. values(i, t) is asset i on date t.
/// Raw panels may carry NaN for missing cells; cleaned panels never do.
struct Panel {
  std::vector<std::string> asset_ids;
  std::vector<std::string> dates;
  Matrix values;

  std::size_t assets() const noexcept { return values.rows(); }
  std::size_t length() const noexcept { return values.cols(); }

  /// Columns [first, first + count) as a new panel.
  Panel slice(std::size_t first, std::size_t count) const;
};

/// Orders date stamps: numerically when both are integers, lexicographically
/// otherwise (ISO dates sort correctly as text).
bool date_less(const std::string& a, const std::string& b);

/// Labels generated panels "x1".."xn" over dates "1".."T".
std::vector<std::string> default_asset_ids(std::size_t n);
std::vector<std::string> default_dates(std::size_t length);

/// Wide layout: a "date" header cell followed by asset ids; one row per date.
void write_panel_csv(const std::filesystem::path& path, const Panel& panel);

}  // namespace lagdtw
