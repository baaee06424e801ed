#include "lagdtw/leadlag.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "json.hpp"

#include "lagdtw/csv.hpp"
#include "lagdtw/error.hpp"
#include "lagdtw/parallel.hpp"

namespace lagdtw {
namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::ShapeMismatch, std::string(what) + " must be square");
}

}  // namespace

std::string_view to_string(LagEstimator estimator) noexcept {
  switch (estimator) {
    case LagEstimator::mode: return "mode";
    case LagEstimator::median: return "median";
    case LagEstimator::ccf_auc: return "ccf_auc";
  }
  return "mode";
}

std::string_view to_string(Detector detector) noexcept {
  switch (detector) {
    case Detector::dtw_mode: return "dtw_mode";
    case Detector::dtw_median: return "dtw_median";
    case Detector::ccf_auc: return "ccf_auc";
  }
  return "dtw_mode";
}

Detector parse_detector(std::string_view text) {
  if (text == "dtw_mode") return Detector::dtw_mode;
  if (text == "dtw_median") return Detector::dtw_median;
  if (text == "ccf_auc") return Detector::ccf_auc;
  throw Error(ErrorCode::InvalidArgument, "unknown detector '" + std::string(text) + "'");
}

std::vector<int> path_offsets(const WarpingPath& path) {
  std::vector<int> offsets;
  offsets.reserve(path.steps.size());
  for (const auto& s : path.steps) offsets.push_back(static_cast<int>(s.i) - static_cast<int>(s.j));
  return offsets;
}

double lag_estimate(std::span<const int> offsets, LagEstimator estimator) {
  if (offsets.empty()) throw Error(ErrorCode::InvalidArgument, "no offsets to estimate a lag from");
  if (estimator == LagEstimator::mode) {
    std::map<int, std::size_t> counts;
    for (const int v : offsets) ++counts[v];
    int best = 0;
    std::size_t best_count = 0;
    for (const auto& [value, count] : counts) {
      const bool better = count > best_count ||
                          (count == best_count && (std::abs(value) < std::abs(best) ||
                                                   (std::abs(value) == std::abs(best) && value < best)));
      if (better) {
        best = value;
        best_count = count;
      }
    }
    return best;
  }
  if (estimator == LagEstimator::median) {
    std::vector<int> sorted(offsets.begin(), offsets.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return 0.5 * (static_cast<double>(sorted[n / 2 - 1]) + static_cast<double>(sorted[n / 2]));
  }
  throw Error(ErrorCode::InvalidArgument, "path lags use the mode or median estimator");
}

LeadLagMatrix leadlag_matrix_dtw(const Matrix& series, const ClusterAssignment& assignment,
                                 const Window& window, LagEstimator estimator) {
  const std::size_t n = series.rows();
  if (assignment.labels.size() != n)
    throw Error(ErrorCode::ShapeMismatch, "assignment does not cover every series");
  if (estimator == LagEstimator::ccf_auc)
    throw Error(ErrorCode::InvalidArgument, "ccf_auc is not a path estimator");
  LeadLagMatrix out{Matrix(n, n, 0.0), estimator};
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!assignment.same_cluster(i, j)) continue;
      const auto offsets = path_offsets(dtw(series.row(i), series.row(j), window));
      out.values(i, j) = lag_estimate(offsets, estimator);
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.values(j, i) = -out.values(i, j);
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "correlation of unequal lengths");
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorCode::DegenerateOverlap, "correlation needs at least two samples");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::DegenerateOverlap, "zero variance in correlation");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double ccf(std::span<const double> xi, std::span<const double> xj, int lag, const CorrelationKernel& kernel) {
  if (xi.size() != xj.size()) throw Error(ErrorCode::LengthMismatch, "CCF needs equal-length series");
  const std::size_t t = xi.size();
  const std::size_t shift = static_cast<std::size_t>(std::abs(lag));
  if (shift + 2 > t) throw Error(ErrorCode::DegenerateOverlap, "overlap shorter than two samples");
  const std::size_t overlap = t - shift;
  // Pairs (X_i^{t - lag}, X_j^t)
  if (lag >= 0) return kernel(xi.subspan(0, overlap), xj.subspan(shift, overlap));
  return kernel(xi.subspan(shift, overlap), xj.subspan(0, overlap));
}

LeadLagMatrix ccf_auc_leadlag(const Matrix& series, int max_lag, const CorrelationKernel& kernel) {
  if (max_lag < 1) throw Error(ErrorCode::InvalidArgument, "maximum CCF lag must be at least 1");
  const std::size_t n = series.rows();
  if (static_cast<std::size_t>(max_lag) + 2 > series.cols())
    throw Error(ErrorCode::DegenerateOverlap, "series too short for the maximum lag");
  LeadLagMatrix out{Matrix(n, n, 0.0), LagEstimator::ccf_auc};
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double forward = 0.0;   // I(i, j)
      double backward = 0.0;  // I(j, i)
      for (int m = 1; m <= max_lag; ++m) {
        forward += std::abs(ccf(series.row(i), series.row(j), m, kernel));
        backward += std::abs(ccf(series.row(j), series.row(i), m, kernel));
      }
      const double total = forward + backward;
      if (total == 0.0) continue;
      // Positive when i leads j in the raw score; reorient to kLeadSign.
      const double raw = std::max(forward, backward) * sign(forward - backward) / total;
      out.values(i, j) = kLeadSign * raw;
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.values(j, i) = -out.values(i, j);
  return out;
}

ErrorReport error_matrix(const Matrix& gamma, const Matrix& psi) {
  if (gamma.rows() != psi.rows() || gamma.cols() != psi.cols())
    throw Error(ErrorCode::ShapeMismatch, "Gamma and Psi shapes differ");
  ErrorReport out{Matrix(gamma.rows(), gamma.cols()), 0.0};
  double sum = 0.0;
  for (std::size_t r = 0; r < gamma.rows(); ++r) {
    for (std::size_t c = 0; c < gamma.cols(); ++c) {
      const double e = gamma(r, c) - psi(r, c);
      out.error(r, c) = e;
      sum += e * e;
    }
  }
  const double cells = static_cast<double>(gamma.rows() * gamma.cols());
  out.mse = cells > 0 ? sum / cells : 0.0;
  return out;
}

std::vector<int> factor_membership(const Matrix& loadings) {
  std::vector<int> membership(loadings.rows(), -1);
  for (std::size_t i = 0; i < loadings.rows(); ++i) {
    int nonzero = 0;
    for (std::size_t f = 0; f < loadings.cols(); ++f) {
      if (loadings(i, f) != 0.0) {
        ++nonzero;
        membership[i] = static_cast<int>(f);
      }
    }
    if (nonzero != 1)
      throw Error(ErrorCode::NotSingleMembership,
                  "row " + std::to_string(i) + " loads on " + std::to_string(nonzero) + " factors");
  }
  return membership;
}

Matrix ground_truth_psi(const Matrix& lags, const Matrix& loadings) {
  if (lags.rows() != loadings.rows() || lags.cols() != loadings.cols())
    throw Error(ErrorCode::ShapeMismatch, "lag and loading matrices differ in shape");
  const auto membership = factor_membership(loadings);
  const std::size_t n = lags.rows();
  Matrix psi(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || membership[i] != membership[j]) continue;
      const auto f = static_cast<std::size_t>(membership[i]);
      psi(i, j) = kLeadSign * (lags(j, f) - lags(i, f));
    }
  }
  return psi;
}

PairwiseDtw pairwise_dtw(const Matrix& series, const Window& window, bool root_distance) {
  const std::size_t n = series.rows();
  PairwiseDtw out{Matrix(n, n, 0.0), Matrix(n, n, 0.0), Matrix(n, n, 0.0)};
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const WarpingPath path = dtw(series.row(i), series.row(j), window);
      const auto offsets = path_offsets(path);
      out.distance(i, j) = root_distance ? std::sqrt(path.cost) : path.cost;
      out.mode_lag(i, j) = lag_estimate(offsets, LagEstimator::mode);
      out.median_lag(i, j) = lag_estimate(offsets, LagEstimator::median);
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      out.distance(j, i) = out.distance(i, j);
      out.mode_lag(j, i) = -out.mode_lag(i, j);
      out.median_lag(j, i) = -out.median_lag(i, j);
    }
  }
  return out;
}

Matrix mask_to_clusters(const Matrix& dense, const ClusterAssignment& assignment) {
  check_square(dense, "lag matrix");
  if (assignment.labels.size() != dense.rows())
    throw Error(ErrorCode::ShapeMismatch, "assignment does not cover every series");
  Matrix out(dense.rows(), dense.cols(), 0.0);
  for (std::size_t i = 0; i < dense.rows(); ++i)
    for (std::size_t j = 0; j < dense.cols(); ++j)
      if (i != j && assignment.same_cluster(i, j)) out(i, j) = dense(i, j);
  return out;
}

Detection detect(const Matrix& series, const DetectorConfig& config) {
  if (series.rows() < 2) throw Error(ErrorCode::InvalidArgument, "detection needs at least two series");
  if (config.detector == Detector::ccf_auc) return {ccf_auc_leadlag(series, config.max_lag), std::nullopt};

  const PairwiseDtw pw = pairwise_dtw(series, config.window, config.root_distance);
  ClusterAssignment assignment =
      kmedoids(pw.distance, config.clusters, config.seed, KMedoidsOptions{config.init});
  const bool use_mode = config.detector == Detector::dtw_mode;
  LeadLagMatrix gamma{mask_to_clusters(use_mode ? pw.mode_lag : pw.median_lag, assignment),
                      use_mode ? LagEstimator::mode : LagEstimator::median};
  return {std::move(gamma), std::move(assignment)};
}

void write_leadlag_csv(const std::filesystem::path& path, const Matrix& values,
                       const std::vector<std::string>& asset_ids) {
  check_square(values, "lead-lag matrix");
  if (asset_ids.size() != values.rows()) throw Error(ErrorCode::ShapeMismatch, "asset ids do not match matrix");
  auto out = csv::open_output(path);
  std::vector<std::string> fields{"asset"};
  fields.insert(fields.end(), asset_ids.begin(), asset_ids.end());
  csv::write_row(out, fields);
  for (std::size_t i = 0; i < values.rows(); ++i) {
    fields.assign(1, asset_ids[i]);
    for (std::size_t j = 0; j < values.cols(); ++j) fields.push_back(csv::format_number(values(i, j)));
    csv::write_row(out, fields);
  }
}

Matrix read_leadlag_csv(const std::filesystem::path& path, std::vector<std::string>* asset_ids) {
  auto in = csv::open_input(path);
  std::string line;
  if (!csv::read_line(in, line)) throw Error(ErrorCode::ParseError, path.string() + ": empty file");
  auto header = csv::split_line(line);
  const std::size_t n = header.size() - 1;
  Matrix values(n, n, 0.0);
  std::vector<std::string> ids(header.begin() + 1, header.end());
  std::size_t row = 0;
  while (csv::read_line(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    if (row >= n || fields.size() != n + 1)
      throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(row + 2) + " has wrong shape");
    for (std::size_t j = 0; j < n; ++j) {
      const auto v = csv::parse_number(fields[j + 1]);
      if (!v)
        throw Error(ErrorCode::ParseError, path.string() + ": row " + std::to_string(row + 2) + ", column " +
                                               std::to_string(j + 2) + ": '" + fields[j + 1] + "'");
      values(row, j) = *v;
    }
    ++row;
  }
  if (row != n) throw Error(ErrorCode::ParseError, path.string() + ": expected " + std::to_string(n) + " rows");
  if (asset_ids) *asset_ids = std::move(ids);
  return values;
}

void write_leadlag_json(const std::filesystem::path& path, const LeadLagMatrix& gamma,
                        const std::vector<std::string>& asset_ids) {
  nlohmann::json doc;
  doc["estimator"] = std::string(to_string(gamma.estimator));
  doc["asset_ids"] = asset_ids;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < gamma.values.rows(); ++i) {
    const auto r = gamma.values.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  doc["values"] = std::move(rows);
  auto out = csv::open_output(path);
  out << doc.dump(2) << '\n';
}

LeadLagMatrix read_leadlag_json(const std::filesystem::path& path, std::vector<std::string>* asset_ids) {
  auto in = csv::open_input(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  LeadLagMatrix out;
  const std::string est = doc.at("estimator").get<std::string>();
  out.estimator = est == "median" ? LagEstimator::median : est == "ccf_auc" ? LagEstimator::ccf_auc : LagEstimator::mode;
  const auto& rows = doc.at("values");
  const std::size_t n = rows.size();
  out.values = Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw Error(ErrorCode::ParseError, path.string() + ": ragged matrix");
    for (std::size_t j = 0; j < n; ++j) out.values(i, j) = rows[i][j].get<double>();
  }
  if (asset_ids) *asset_ids = doc.at("asset_ids").get<std::vector<std::string>>();
  return out;
}

}  // namespace lagdtw
