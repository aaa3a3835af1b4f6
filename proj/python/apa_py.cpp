#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "apa/adherence.hpp"
#include "apa/aemb.hpp"
#include "apa/embedding.hpp"
#include "apa/harness.hpp"
#include "apa/metrics.hpp"
#include "apa/perturb.hpp"
#include "apa/projection.hpp"
#include "apa/rng.hpp"
#include "apa/stats.hpp"

namespace py = pybind11;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

apa::EmbeddingMatrix to_embeddings(const RowMatrix& m, const std::string& backend_id) {
  apa::EmbeddingMatrix e = apa::EmbeddingMatrix::from_double(m, backend_id);
  apa::validate(e);
  return e;
}

apa::AudioWindow to_window(const py::array_t<float, py::array::c_style | py::array::forcecast>& a,
                           int sample_rate) {
  if (a.ndim() != 1) throw apa::DataError("audio must be a 1-D array");
  apa::AudioWindow w;
  w.samples.assign(a.data(), a.data() + a.size());
  w.sample_rate = sample_rate;
  return w;
}

py::array_t<float> to_array(const std::vector<float>& v) {
  py::array_t<float> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Audio prompt adherence: embeddings, distances, scores and experiments";

  py::register_exception<apa::Error>(m, "Error");
  py::register_exception<apa::ConfigError>(m, "ConfigError", m.attr("Error"));
  py::register_exception<apa::DataError>(m, "DataError", m.attr("Error"));
  py::register_exception<apa::MathDomainError>(m, "MathDomainError", m.attr("Error"));

  m.def(
      "read_embeddings",
      [](const std::filesystem::path& path) {
        const apa::EmbeddingMatrix e = apa::read_embeddings(path);
        return py::make_tuple(RowMatrix(e.to_double()), e.backend_id);
      },
      py::arg("path"), "Read an AEMB file; returns (float64 matrix, backend_id).");
  m.def(
      "write_embeddings",
      [](const std::filesystem::path& path, const RowMatrix& data, const std::string& backend_id) {
        apa::write_embeddings(to_embeddings(data, backend_id), path);
      },
      py::arg("path"), py::arg("data"), py::arg("backend_id"),
      "Write an AEMB file. Values are stored as float32.");
  m.def(
      "known_backend_dim",
      [](const std::string& id) -> py::object {
        const auto spec = apa::known_backend(id);
        if (!spec) return py::none();
        return py::int_(spec->dim);
      },
      py::arg("backend_id"));

  m.def(
      "embed",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& audio, int sample_rate) {
        static const apa::LogMelEmbedder embedder;
        return Eigen::VectorXd(embedder.embed(to_window(audio, sample_rate)));
      },
      py::arg("audio"), py::arg("sample_rate") = apa::kPipelineSampleRate,
      "Builtin log-mel statistics embedding (192 values) of a mono window.");

  m.def(
      "frechet_distance",
      [](const RowMatrix& x, const RowMatrix& y) {
        return apa::frechet_distance(apa::gaussian_stats(Eigen::MatrixXd(x)),
                                     apa::gaussian_stats(Eigen::MatrixXd(y)));
      },
      py::arg("x"), py::arg("y"), "FAD between the Gaussian fits of two embedding sets.");
  m.def(
      "mmd2", [](const RowMatrix& x, const RowMatrix& y) { return apa::mmd2(Eigen::MatrixXd(x), Eigen::MatrixXd(y)); },
      py::arg("x"), py::arg("y"), "Biased squared MMD, cubic polynomial kernel.");

  m.def("adherence_value", &apa::adherence_value, py::arg("d_matching"), py::arg("d_nonmatching"));
  m.def(
      "adherence_score",
      [](const std::string& metric, const RowMatrix& x, const RowMatrix& x_nm, const RowMatrix& y) {
        const apa::AdherenceScore s = apa::adherence_score(apa::parse_metric(metric), to_embeddings(x, "py"),
                                                           to_embeddings(x_nm, "py"), to_embeddings(y, "py"));
        py::dict d;
        d["score"] = s.value;
        d["d_matching"] = s.d_matching;
        d["d_nonmatching"] = s.d_nonmatching;
        d["metric"] = apa::to_string(s.metric);
        return d;
      },
      py::arg("metric"), py::arg("reference"), py::arg("reference_nonmatching"), py::arg("candidate"));

  m.def(
      "random_derangement",
      [](std::size_t n, uint64_t seed) {
        apa::Rng rng(seed);
        return apa::random_derangement(n, rng);
      },
      py::arg("n"), py::arg("seed"));

  m.def(
      "fit_projection",
      [](const RowMatrix& x, std::size_t k) {
        const apa::Projection p = apa::fit_projection(to_embeddings(x, "py"), k);
        py::dict d;
        d["mean"] = Eigen::VectorXd(p.mean());
        d["basis"] = RowMatrix(p.basis());
        d["scale"] = Eigen::VectorXd(p.scale());
        d["explained_variance_ratio"] = p.explained_variance_ratio();
        d["transformed"] = RowMatrix(p.apply(Eigen::MatrixXd(x)));
        return d;
      },
      py::arg("x"), py::arg("k"), "Whitening PCA fit; also returns the transformed fit data.");

  m.def(
      "pitch_shift",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& audio, double semitones,
         int sample_rate) { return to_array(apa::pitch_shift(to_window(audio, sample_rate), semitones).samples); },
      py::arg("audio"), py::arg("semitones"), py::arg("sample_rate") = apa::kPipelineSampleRate);
  m.def(
      "time_shift",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& audio, double seconds,
         int sample_rate) { return to_array(apa::time_shift(to_window(audio, sample_rate), seconds).samples); },
      py::arg("audio"), py::arg("seconds"), py::arg("sample_rate") = apa::kPipelineSampleRate);

  m.def(
      "sign_test",
      [](const std::vector<double>& diffs, const std::string& alternative) {
        const apa::SignTestResult r = apa::sign_test(diffs, apa::parse_alternative(alternative));
        return py::make_tuple(r.p_value, r.n_effective, r.n_positive);
      },
      py::arg("diffs"), py::arg("alternative") = "greater", "Returns (p_value, n_effective, n_positive).");
  m.def(
      "cles", [](const std::vector<double>& p, const std::vector<double>& q) { return apa::cles(p, q); },
      py::arg("perturbed"), py::arg("matching"));
  m.def("significance_stars", &apa::significance_stars, py::arg("p_value"));

  m.def(
      "run_experiment",
      [](const std::string& config_json, int experiment, const std::string& base_dir) {
        const apa::RunConfig cfg =
            apa::RunConfig::from_json(nlohmann::json::parse(config_json), std::filesystem::path(base_dir));
        apa::EvalReport report;
        {
          py::gil_scoped_release release;
          report = apa::run_experiment(cfg, experiment);
        }
        return py::make_tuple(report.to_json().dump(), report.records_csv());
      },
      py::arg("config_json"), py::arg("experiment"), py::arg("base_dir") = "",
      "Runs an experiment; returns (report JSON text, records CSV text).");
}
