#include "lagdtw/synthgen.hpp"

#include <cmath>
#include <limits>

#include "lagdtw/csv.hpp"
#include "lagdtw/error.hpp"
#include "lagdtw/parallel.hpp"
#include "lagdtw/rng.hpp"

namespace lagdtw {
namespace {

constexpr std::size_t kTemplateRows = 6;
constexpr double kZ95 = 1.96;

struct Band {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
};

Band confidence_band(const std::vector<double>& values) {
  Band b;
  if (values.empty()) return b;
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double n = static_cast<double>(values.size());
  b.mean = sum / n;
  double half = 0.0;
  if (values.size() > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - b.mean) * (v - b.mean);
    half = kZ95 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  b.lo = b.mean - half;
  b.hi = b.mean + half;
  return b;
}

bool uses_dtw(SweepMethod m) { return m == SweepMethod::dtw_kmed_mode || m == SweepMethod::dtw_kmed_median; }

struct MethodOutcome {
  double ari = 0.0;
  double mse = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace

void FactorModelSpec::validate() const {
  const std::size_t n = loadings.rows();
  const std::size_t k = loadings.cols();
  if (n == 0 || k == 0) throw Error(ErrorCode::InvalidSpec, "loading matrix is empty");
  if (lags.rows() != n || lags.cols() != k) throw Error(ErrorCode::InvalidSpec, "lag matrix shape differs from B");
  if (length == 0) throw Error(ErrorCode::InvalidSpec, "series length must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidSpec, "sigma must be finite and >= 0");
  if (max_lag < 0) throw Error(ErrorCode::InvalidSpec, "max_lag must be >= 0");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      const double l = lags(i, f);
      if (!std::isfinite(loadings(i, f))) throw Error(ErrorCode::InvalidSpec, "non-finite loading");
      if (l != std::floor(l) || l < 0.0 || l > max_lag)
        throw Error(ErrorCode::InvalidSpec, "lag L(" + std::to_string(i) + "," + std::to_string(f) +
                                                ") must be an integer in [0, " + std::to_string(max_lag) + "]");
    }
  }
  factor_membership(loadings);
}

int default_template_lag(int factors) {
  switch (factors) {
    case 1: return 5;
    case 2: return 4;
    case 3: return 3;
    default: throw Error(ErrorCode::InvalidSpec, "templates exist for 1, 2 or 3 factors");
  }
}

FactorModelSpec lagged_template(int factors, int block_max_lag) {
  default_template_lag(factors);
  if (block_max_lag < 0) throw Error(ErrorCode::InvalidSpec, "template lag must be >= 0");
  const auto k = static_cast<std::size_t>(factors);
  const std::size_t block = kTemplateRows / k;
  FactorModelSpec spec;
  spec.loadings = Matrix(kTemplateRows, k, 0.0);
  spec.lags = Matrix(kTemplateRows, k, 0.0);
  spec.max_lag = std::max(5, block_max_lag);
  for (std::size_t r = 0; r < kTemplateRows; ++r) {
    const std::size_t f = r / block;
    const std::size_t q = r % block;
    spec.loadings(r, f) = 1.0;
    spec.lags(r, f) = block > 1 ? std::round(static_cast<double>(q) * block_max_lag / static_cast<double>(block - 1)) : 0.0;
  }
  return spec;
}

SyntheticPanel generate(const FactorModelSpec& spec) {
  spec.validate();
  const std::size_t n = spec.series();
  const std::size_t k = spec.factors();
  const std::size_t t_len = spec.length;
  const auto burn = static_cast<std::size_t>(spec.max_lag);

  Rng rng(spec.seed);
  // factor j at time t lives at column t + burn
  Matrix factors(k, t_len + burn);
  for (std::size_t f = 0; f < k; ++f)
    for (std::size_t s = 0; s < t_len + burn; ++s) factors(f, s) = rng.normal();

  SyntheticPanel out;
  out.spec = spec;
  out.panel.asset_ids = default_asset_ids(n);
  out.panel.dates = default_dates(t_len);
  out.panel.values = Matrix(n, t_len, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < t_len; ++t) {
      double x = 0.0;
      for (std::size_t f = 0; f < k; ++f) {
        const double b = spec.loadings(i, f);
        if (b == 0.0) continue;
        const auto lag = static_cast<std::size_t>(spec.lags(i, f));
        x += b * factors(f, t + burn - lag);
      }
      out.panel.values(i, t) = x + spec.sigma * rng.normal();
    }
  }
  out.membership = factor_membership(spec.loadings);
  out.psi = ground_truth_psi(spec.lags, spec.loadings);
  return out;
}

FactorModelSpec replicate_rows(const FactorModelSpec& spec, std::size_t n_total) {
  const std::size_t rows = spec.series();
  if (rows == 0 || n_total == 0 || n_total % rows != 0)
    throw Error(ErrorCode::NotDivisible,
                std::to_string(n_total) + " is not a multiple of the " + std::to_string(rows) + "-row template");
  FactorModelSpec out = spec;
  out.loadings = Matrix(n_total, spec.factors());
  out.lags = Matrix(n_total, spec.factors());
  for (std::size_t r = 0; r < n_total; ++r) {
    for (std::size_t f = 0; f < spec.factors(); ++f) {
      out.loadings(r, f) = spec.loadings(r % rows, f);
      out.lags(r, f) = spec.lags(r % rows, f);
    }
  }
  return out;
}

std::string_view to_string(SweepMethod method) noexcept {
  switch (method) {
    case SweepMethod::dtw_kmed_mode: return "dtw_kmed_mode";
    case SweepMethod::dtw_kmed_median: return "dtw_kmed_median";
    case SweepMethod::euc_kmed: return "euc_kmed";
    case SweepMethod::man_kmed: return "man_kmed";
    case SweepMethod::cos_kmed: return "cos_kmed";
    case SweepMethod::kmeans: return "km";
  }
  return "dtw_kmed_mode";
}

SweepMethod parse_sweep_method(std::string_view text) {
  for (const auto m : {SweepMethod::dtw_kmed_mode, SweepMethod::dtw_kmed_median, SweepMethod::euc_kmed,
                       SweepMethod::man_kmed, SweepMethod::cos_kmed, SweepMethod::kmeans})
    if (text == to_string(m)) return m;
  throw Error(ErrorCode::InvalidArgument, "unknown sweep estimator '" + std::string(text) + "'");
}

std::vector<SweepRow> sweep(const SweepConfig& config) {
  if (config.repetitions < 1) throw Error(ErrorCode::InvalidArgument, "repetitions must be >= 1");
  if (config.methods.empty()) throw Error(ErrorCode::InvalidArgument, "no sweep estimators selected");
  config.spec.validate();

  const std::size_t points = config.grid.size();
  const auto reps = static_cast<std::size_t>(config.repetitions);
  const std::size_t methods = config.methods.size();
  bool need_dtw = false;
  for (const auto m : config.methods) need_dtw = need_dtw || uses_dtw(m);

  // outcomes[(g * reps + r)] holds one entry per method, empty on failure
  std::vector<std::vector<MethodOutcome>> outcomes(points * reps);
  parallel_for(points * reps, [&](std::size_t job) {
    const std::size_t g = job / reps;
    const std::size_t r = job % reps;
    FactorModelSpec spec = config.spec;
    DetectorConfig detector = config.detector;
    if (config.axis == SweepAxis::sigma) {
      spec.sigma = config.grid[g];
    } else {
      const double s = config.grid[g];
      if (s < 0.0 || s != std::floor(s)) throw Error(ErrorCode::InvalidArgument, "window sizes must be integers");
      detector.window = Window::bounded(static_cast<std::size_t>(s));
    }
    spec.seed = derive_seed(config.seed, r);
    try {
      const SyntheticPanel synth = generate(spec);
      const Matrix& x = synth.panel.values;
      std::vector<MethodOutcome> result(methods);

      std::optional<PairwiseDtw> pw;
      std::optional<ClusterAssignment> dtw_clusters;
      if (need_dtw) {
        pw = pairwise_dtw(x, detector.window, detector.root_distance);
        dtw_clusters = kmedoids(pw->distance, detector.clusters, spec.seed, KMedoidsOptions{detector.init});
      }
      for (std::size_t mi = 0; mi < methods; ++mi) {
        const SweepMethod m = config.methods[mi];
        ClusterAssignment assignment;
        switch (m) {
          case SweepMethod::dtw_kmed_mode:
          case SweepMethod::dtw_kmed_median: {
            assignment = *dtw_clusters;
            const Matrix& dense = m == SweepMethod::dtw_kmed_mode ? pw->mode_lag : pw->median_lag;
            result[mi].mse = error_matrix(mask_to_clusters(dense, assignment), synth.psi).mse;
            break;
          }
          case SweepMethod::euc_kmed:
          case SweepMethod::man_kmed:
          case SweepMethod::cos_kmed: {
            const VectorMetric vm = m == SweepMethod::euc_kmed   ? VectorMetric::euclidean
                                    : m == SweepMethod::man_kmed ? VectorMetric::manhattan
                                                                 : VectorMetric::cosine;
            assignment = kmedoids(pairwise_distance_matrix(x, DistanceMetric::vector(vm)), detector.clusters,
                                  spec.seed, KMedoidsOptions{detector.init});
            break;
          }
          case SweepMethod::kmeans:
            assignment = kmeans(x, detector.clusters, derive_seed(spec.seed, 1));
            break;
        }
        result[mi].ari = adjusted_rand_index(assignment.labels, synth.membership);
      }
      outcomes[job] = std::move(result);
    } catch (const Error&) {
      outcomes[job].clear();
    }
  });

  std::vector<SweepRow> rows;
  for (std::size_t g = 0; g < points; ++g) {
    for (std::size_t mi = 0; mi < methods; ++mi) {
      std::vector<double> aris;
      std::vector<double> mses;
      int failures = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto& o = outcomes[g * reps + r];
        if (o.empty()) {
          ++failures;
          continue;
        }
        aris.push_back(o[mi].ari);
        if (!std::isnan(o[mi].mse)) mses.push_back(o[mi].mse);
      }
      const Band ari = confidence_band(aris);
      const Band mse = confidence_band(mses);
      rows.push_back(SweepRow{config.setting, config.grid[g], config.methods[mi], ari.mean, ari.lo, ari.hi,
                              mse.mean, mse.lo, mse.hi, static_cast<int>(aris.size()), failures});
    }
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  auto out = csv::open_output(path);
  csv::write_row(out, {"setting", "grid_value", "estimator", "mean_ari", "ari_lo", "ari_hi", "mean_mse", "mse_lo",
                       "mse_hi", "reps"});
  using csv::format_number;
  for (const auto& r : rows) {
    csv::write_row(out, {r.setting, format_number(r.grid_value), std::string(to_string(r.method)),
                         format_number(r.mean_ari), format_number(r.ari_lo), format_number(r.ari_hi),
                         format_number(r.mean_mse), format_number(r.mse_lo), format_number(r.mse_hi),
                         std::to_string(r.reps)});
  }
}

}  // namespace lagdtw
