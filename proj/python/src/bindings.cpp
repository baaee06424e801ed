#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "lagdtw/clustering.hpp"
#include "lagdtw/dtw.hpp"
#include "lagdtw/error.hpp"
#include "lagdtw/leadlag.hpp"
#include "lagdtw/strategy.hpp"
#include "lagdtw/synthgen.hpp"

namespace py = pybind11;
using namespace lagdtw;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw Error(ErrorCode::InvalidArgument, "expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::InvalidArgument, "expected a 2-D array");
  Matrix m(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

py::array_t<double> to_array(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Window window_of(std::optional<std::size_t> size) {
  return size ? Window::bounded(*size) : Window::unbounded();
}

MedoidInit init_of(const std::string& name) {
  if (name == "build") return MedoidInit::build;
  if (name == "random") return MedoidInit::random;
  throw Error(ErrorCode::InvalidArgument, "init must be build or random");
}

py::dict assignment_dict(const ClusterAssignment& a) {
  py::dict d;
  d["labels"] = a.labels;
  d["medoids"] = a.medoids;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lead-lag detection with DTW and K-Medoids";
  py::register_exception<Error>(m, "LagdtwError", PyExc_ValueError);
  m.attr("LEAD_SIGN") = kLeadSign;

  m.def(
      "dtw",
      [](const Array& a, const Array& b, std::optional<std::size_t> window) {
        const WarpingPath p = dtw(to_vector(a), to_vector(b), window_of(window));
        std::vector<std::pair<std::size_t, std::size_t>> steps;
        for (const auto& s : p.steps) steps.emplace_back(s.i, s.j);
        return py::make_tuple(p.cost, steps);
      },
      py::arg("a"), py::arg("b"), py::arg("window") = py::none(),
      "Optimal warping cost and zero-based path; window=None is unbounded.");
  m.def(
      "dtw_cost",
      [](const Array& a, const Array& b, std::optional<std::size_t> window) {
        return dtw_cost(to_vector(a), to_vector(b), window_of(window));
      },
      py::arg("a"), py::arg("b"), py::arg("window") = py::none());
  m.def(
      "dtw_distance_matrix",
      [](const Array& series, std::optional<std::size_t> window, bool root) {
        DistanceMetric metric;
        metric.window = window_of(window);
        metric.root = root;
        return to_array(pairwise_distance_matrix(to_matrix(series), metric));
      },
      py::arg("series"), py::arg("window") = py::none(), py::arg("root") = false);

  m.def(
      "kmedoids",
      [](const Array& distances, int k, std::uint64_t seed, const std::string& init) {
        KMedoidsOptions opts;
        opts.init = init_of(init);
        return assignment_dict(kmedoids(to_matrix(distances), k, seed, opts));
      },
      py::arg("distances"), py::arg("k"), py::arg("seed") = 0, py::arg("init") = "build");
  m.def(
      "kmeans",
      [](const Array& series, int k, std::uint64_t seed) { return assignment_dict(kmeans(to_matrix(series), k, seed)); },
      py::arg("series"), py::arg("k"), py::arg("seed") = 0);
  m.def(
      "adjusted_rand_index",
      [](const std::vector<int>& a, const std::vector<int>& b) { return adjusted_rand_index(a, b); }, py::arg("a"),
      py::arg("b"));

  m.def(
      "detect",
      [](const Array& series, const std::string& detector, int k, std::optional<std::size_t> window, int max_lag,
         bool root_distance, const std::string& init, std::uint64_t seed) {
        DetectorConfig cfg;
        cfg.detector = parse_detector(detector);
        cfg.clusters = k;
        cfg.window = window_of(window);
        cfg.max_lag = max_lag;
        cfg.root_distance = root_distance;
        cfg.init = init_of(init);
        cfg.seed = seed;
        const Detection det = detect(to_matrix(series), cfg);
        py::dict out;
        out["gamma"] = to_array(det.gamma.values);
        out["labels"] = det.assignment ? py::cast(det.assignment->labels) : py::none();
        return out;
      },
      py::arg("series"), py::arg("detector") = "dtw_mode", py::arg("k") = 1, py::arg("window") = 5,
      py::arg("max_lag") = 5, py::arg("root_distance") = true, py::arg("init") = "build", py::arg("seed") = 0,
      "Lead-lag matrix of the rows of `series`; negative entries mark the row asset as leader.");
  m.def(
      "ccf_auc", [](const Array& series, int max_lag) { return to_array(ccf_auc_leadlag(to_matrix(series), max_lag).values); },
      py::arg("series"), py::arg("max_lag") = 5);
  m.def(
      "error_matrix",
      [](const Array& gamma, const Array& psi) {
        const ErrorReport r = error_matrix(to_matrix(gamma), to_matrix(psi));
        return py::make_tuple(to_array(r.error), r.mse);
      },
      py::arg("gamma"), py::arg("psi"));

  m.def(
      "generate",
      [](int factors, std::size_t n, std::size_t length, double sigma, std::uint64_t seed,
         std::optional<int> template_lag) {
        FactorModelSpec spec =
            replicate_rows(lagged_template(factors, template_lag.value_or(default_template_lag(factors))), n);
        spec.length = length;
        spec.sigma = sigma;
        spec.seed = seed;
        const SyntheticPanel s = generate(spec);
        py::dict out;
        out["panel"] = to_array(s.panel.values);
        out["psi"] = to_array(s.psi);
        out["membership"] = s.membership;
        out["lags"] = to_array(s.spec.lags);
        return out;
      },
      py::arg("factors") = 1, py::arg("n") = 120, py::arg("length") = 100, py::arg("sigma") = 1.0,
      py::arg("seed") = 0, py::arg("template_lag") = py::none(),
      "Synthetic lagged factor panel built from the six-row template.");

  m.def(
      "rescale_pnl", [](const Array& pnl, double target) { return rescale_pnl(to_vector(pnl), target); },
      py::arg("pnl"), py::arg("sigma_target") = 0.15);
  m.def(
      "compute_metrics",
      [](const Array& pnl) {
        const MetricsReport r = compute_metrics(to_vector(pnl));
        py::dict d;
        d["cumulative_pnl"] = r.cumulative_pnl;
        d["e_returns"] = r.e_returns;
        d["volatility"] = r.volatility;
        d["downside_deviation"] = r.downside_deviation;
        d["max_drawdown"] = r.max_drawdown;
        d["sortino"] = r.sortino;
        d["calmar"] = r.calmar;
        d["hit_rate"] = r.hit_rate;
        d["avg_profit_over_avg_loss"] = r.avg_profit_over_avg_loss;
        d["pnl_per_trade"] = r.pnl_per_trade;
        d["sharpe"] = r.sharpe;
        d["p_value"] = r.p_value;
        d["observations"] = r.observations;
        return d;
      },
      py::arg("pnl"));
}
