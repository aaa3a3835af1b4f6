// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: apa_acceptance [config_dir] [--only name]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "apa/adherence.hpp"
#include "apa/harness.hpp"
#include "apa/metrics.hpp"
#include "apa/perturb.hpp"
#include "apa/projection.hpp"
#include "apa/rng.hpp"
#include "apa/stats.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed conditions; the first few are kept for the report line.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  Outcome outcome() const {
    Outcome o{failures_ == 0, notes_};
    if (failures_ > 3) o.detail += "; +" + std::to_string(failures_ - 3) + " more";
    return o;
  }

 private:
  int failures_ = 0;
  std::string notes_;
};

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

Eigen::MatrixXd normal_rows(apa::Rng& rng, long n, long d) {
  Eigen::MatrixXd m(n, d);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < d; ++j) {
      const double u1 = 1.0 - rng.uniform01(), u2 = rng.uniform01();
      m(i, j) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
  }
  return m;
}

apa::GaussianStats gauss(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  apa::GaussianStats s;
  s.mean = std::move(mean);
  s.covariance = std::move(cov);
  s.n = 2;
  return s;
}

Outcome fad_suite() {
  Check c;
  apa::Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto s = apa::gaussian_stats(normal_rows(rng, 30, 1 + t % 8));
    c.expect(std::fabs(apa::frechet_distance(s, s)) <= 1e-9, "identical stats not 0");
  }
  const double one = apa::frechet_distance(gauss(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)),
                                           gauss(Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1)));
  c.expect(std::fabs(one - 1.0) <= 1e-9, "1-D case gave " + fmt(one, 17));
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const long d = 1 + static_cast<long>(rng.uniform_index(16));
    Eigen::VectorXd ma(d), mb(d), va(d), vb(d);
    double expected = 0.0;
    for (long i = 0; i < d; ++i) {
      ma(i) = rng.uniform(-2, 2);
      mb(i) = rng.uniform(-2, 2);
      va(i) = rng.uniform(0, 9);
      vb(i) = rng.uniform(0, 9);
      expected += std::pow(ma(i) - mb(i), 2) + std::pow(std::sqrt(va(i)) - std::sqrt(vb(i)), 2);
    }
    const double got = apa::frechet_distance(gauss(ma, va.asDiagonal().toDenseMatrix()),
                                             gauss(mb, vb.asDiagonal().toDenseMatrix()));
    worst = std::max(worst, std::fabs(got - expected));
  }
  Eigen::VectorXd d1(2), d2(2);
  d1 << 1, 4;
  d2 << 4, 1;
  const double two = apa::frechet_distance(gauss(Eigen::VectorXd::Zero(2), d1.asDiagonal().toDenseMatrix()),
                                           gauss(Eigen::VectorXd::Zero(2), d2.asDiagonal().toDenseMatrix()));
  worst = std::max(worst, std::fabs(two - 2.0));
  c.expect(worst <= 1e-8, "diagonal error " + fmt(worst));
  c.note("max diagonal error " + fmt(worst, 3));
  return c.outcome();
}

Outcome mmd_suite() {
  Check c;
  apa::Rng rng(2);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const long n = 1 + static_cast<long>(rng.uniform_index(200));
    const long m = 1 + static_cast<long>(rng.uniform_index(200));
    const long d = 1 + static_cast<long>(rng.uniform_index(64));
    const Eigen::MatrixXd x = normal_rows(rng, n, d);
    Eigen::MatrixXd y = normal_rows(rng, m, d);
    y.array() += rng.uniform(0.0, 1.0);
    const double gamma = 1.0 / static_cast<double>(d);
    auto k = [&](const Eigen::MatrixXd& a, long i, const Eigen::MatrixXd& b, long j) {
      double dot = 0.0;
      for (long q = 0; q < d; ++q) dot += a(i, q) * b(j, q);
      const double base = gamma * dot + 1.0;
      return base * base * base;
    };
    double kxx = 0, kyy = 0, kxy = 0;
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) kxx += k(x, i, x, j);
    for (long i = 0; i < m; ++i)
      for (long j = 0; j < m; ++j) kyy += k(y, i, y, j);
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < m; ++j) kxy += k(x, i, y, j);
    const double naive = std::max(0.0, kxx / double(n * n) + kyy / double(m * m) - 2.0 * kxy / double(n * m));
    const double got = apa::mmd2(x, y);
    const double rel = std::fabs(got - naive) / std::max(std::fabs(naive), 1e-300);
    worst = std::max(worst, naive == 0.0 ? std::fabs(got) : rel);
    c.expect(apa::mmd2(x, x) == 0.0, "mmd2(X, X) != 0");
  }
  c.expect(worst <= 1e-8, "relative error " + fmt(worst));
  c.note("max relative error " + fmt(worst, 3));
  return c.outcome();
}

Outcome score_contract() {
  Check c;
  apa::Rng rng(3);
  for (int t = 0; t < 1000; ++t) {
    const double s = apa::adherence_value(rng.uniform(0, 10), rng.uniform(0, 10));
    c.expect(s >= -1.0 && s <= 1.0, "score out of range");
  }
  const auto x = apa::EmbeddingMatrix::from_double(normal_rows(rng, 60, 4), "a");
  Eigen::MatrixXd shifted = normal_rows(rng, 60, 4);
  shifted.array() += 0.7;
  const auto xnm = apa::EmbeddingMatrix::from_double(shifted, "a");
  for (auto m : {apa::Metric::Fad, apa::Metric::Mmd}) {
    c.expect(apa::adherence_score(m, x, xnm, x).value == 1.0, "S(Y=X) != 1");
    c.expect(apa::adherence_score(m, x, xnm, xnm).value == -1.0, "S(Y=X') != -1");
  }
  bool threw = false;
  try {
    apa::adherence_value(0.0, 0.0);
  } catch (const apa::UndefinedScoreError&) {
    threw = true;
  }
  c.expect(threw, "both-zero case did not raise");

  // Integer rows are exact in float32; mean offsets give FADs 1 and 3.
  Eigen::MatrixXd base(40, 3);
  for (long i = 0; i < 40; ++i)
    for (long j = 0; j < 3; ++j) base(i, j) = static_cast<double>(rng.uniform_int(-4, 4));
  Eigen::MatrixXd y = base;
  y.col(0).array() += 1.0;
  const Eigen::MatrixXd nm = y.array() - 1.0;
  const double s = apa::adherence_score(apa::Metric::Fad, apa::EmbeddingMatrix::from_double(base, "a"),
                                        apa::EmbeddingMatrix::from_double(nm, "a"),
                                        apa::EmbeddingMatrix::from_double(y, "a"))
                       .value;
  c.expect(std::fabs(s - 0.5) <= 1e-9, "3-vs-1 fixture gave " + fmt(s, 17));
  return c.outcome();
}

Outcome derangement_suite() {
  Check c;
  apa::Rng rng(4);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 2 + rng.uniform_index(49);
    const auto p = apa::random_derangement(n, rng);
    for (std::size_t i = 0; i < n; ++i) c.expect(p[i] != i, "fixed point at size " + std::to_string(n));
  }
  std::set<std::vector<std::size_t>> s4;
  std::vector<std::size_t> perm{0, 1, 2, 3};
  do {
    if (perm[0] != 0 && perm[1] != 1 && perm[2] != 2 && perm[3] != 3) s4.insert(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  c.expect(s4.size() == 9, "enumeration is not 9");
  std::set<std::vector<std::size_t>> seen;
  for (uint64_t seed = 0; seed < 500; ++seed) {
    apa::Rng a(seed), b(seed);
    const auto p = apa::random_derangement(4, a);
    c.expect(s4.count(p) == 1, "size-4 output outside the derangement set");
    c.expect(apa::random_derangement(4, b) == p, "seed not deterministic");
    seen.insert(p);
  }
  c.note("size-4 outputs cover " + std::to_string(seen.size()) + "/9");
  return c.outcome();
}

Outcome whitening_suite() {
  Check c;
  apa::Rng rng(5);
  const long d = 24;
  const Eigen::MatrixXd data = (normal_rows(rng, 2000, d) * normal_rows(rng, d, d)).array() + 5.0;
  const auto x = apa::EmbeddingMatrix::from_double(data, "w");
  const Eigen::MatrixXd xd = x.to_double();
  double prev = 0.0, worst_mean = 0.0, worst_var = 0.0;
  for (std::size_t k = 1; k <= static_cast<std::size_t>(d); ++k) {
    const apa::Projection p = apa::fit_projection(x, k);
    const Eigen::MatrixXd y = p.apply(xd);
    const Eigen::RowVectorXd mean = y.colwise().mean();
    const Eigen::MatrixXd centred = y.rowwise() - mean;
    const Eigen::VectorXd var = centred.colwise().squaredNorm() / static_cast<double>(y.rows() - 1);
    worst_mean = std::max(worst_mean, mean.cwiseAbs().maxCoeff());
    worst_var = std::max(worst_var, (var.array() - 1.0).abs().maxCoeff());
    c.expect(p.explained_variance_ratio() >= prev, "ratio not monotone at k=" + std::to_string(k));
    prev = p.explained_variance_ratio();
  }
  c.expect(worst_mean < 1e-6, "mean " + fmt(worst_mean));
  c.expect(worst_var <= 1e-4, "variance error " + fmt(worst_var));
  c.expect(std::fabs(prev - 1.0) <= 1e-6, "k=D ratio " + fmt(prev, 17));
  c.note("max |mean| " + fmt(worst_mean, 3) + ", max |var-1| " + fmt(worst_var, 3));
  return c.outcome();
}

std::size_t peak_bin(const std::vector<float>& x, std::size_t start, std::size_t n) {
  std::size_t best = 0;
  double best_mag = -1;
  for (std::size_t k = 1; k < n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
      acc += w * x[start + i] * std::polar(1.0, -2.0 * std::numbers::pi * k * i / n);
    }
    if (std::abs(acc) > best_mag) {
      best_mag = std::abs(acc);
      best = k;
    }
  }
  return best;
}

Outcome dsp_suite() {
  Check c;
  apa::AudioWindow sine;
  sine.samples.resize(80000);
  for (std::size_t i = 0; i < sine.samples.size(); ++i) {
    sine.samples[i] = static_cast<float>(0.5 * std::sin(2.0 * std::numbers::pi * 440.0 * i / 16000));
  }
  const std::size_t n = 4096;
  const double bin_hz = 16000.0 / n;
  for (auto [semi, hz] : {std::pair{12.0, 880.0}, std::pair{-12.0, 220.0}}) {
    const auto out = apa::pitch_shift(sine, semi);
    c.expect(out.size() == sine.size(), "pitch shift changed the length");
    const double got = static_cast<double>(peak_bin(out.samples, 30000, n));
    c.expect(std::fabs(got - hz / bin_hz) <= 1.0, "peak at " + fmt(got * bin_hz) + " Hz, expected " + fmt(hz));
  }
  auto rms = [](const std::vector<float>& a, const std::vector<float>& b) {
    double acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc / static_cast<double>(a.size()));
  };
  c.expect(rms(apa::pitch_shift(sine, 0.0).samples, sine.samples) < 1e-6, "0 semitones not identity");
  c.expect(rms(apa::time_shift(sine, 0.0).samples, sine.samples) < 1e-6, "0 s not identity");
  apa::Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const double s = rng.uniform(-4.9, 4.9);
    c.expect(apa::time_shift(apa::time_shift(sine, s), -s).samples == sine.samples, "+t then -t not identity");
  }
  const apa::PerturbationRanges r;
  c.expect(r.min_semitones == 1 && r.max_semitones == 7, "semitone range");
  c.expect(r.min_shift_seconds == 0.2 && r.max_shift_seconds == 2.5, "shift range");

  // Drawn parameters over many pairs.
  std::vector<apa::AudioWindow> w(2000, apa::AudioWindow{std::vector<float>(8), 16000});
  auto bases = std::make_shared<std::vector<apa::BasePair>>(2000);
  std::vector<apa::PairEntry> entries(2000);
  for (std::size_t i = 0; i < 2000; ++i) entries[i] = {i, i, {}};
  const apa::PairSet x(std::make_shared<apa::MemoryWindowSource>(w, w), bases, entries, {});
  std::set<int> magnitudes;
  double lo = 1e9, hi = 0;
  for (const auto& e : apa::apply_condition(x, apa::Condition::PitchTime, 9).entries()) {
    const double m = std::fabs(e.perturbation.semitones);
    c.expect(m == std::round(m) && m >= 1 && m <= 7, "semitones " + fmt(e.perturbation.semitones));
    magnitudes.insert(static_cast<int>(m));
    const double s = std::fabs(e.perturbation.shift_seconds);
    c.expect(s >= 0.2 && s <= 2.5, "shift " + fmt(s));
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  c.expect(magnitudes.size() == 7, "not every semitone magnitude drawn");
  c.note("drawn |shift| in [" + fmt(lo, 4) + ", " + fmt(hi, 4) + "] s");
  return c.outcome();
}

Outcome stats_suite() {
  Check c;
  const double p5 = apa::sign_test(std::vector<double>(5, 1.0)).p_value;
  c.expect(p5 == 0.03125, "5/5 p = " + fmt(p5, 17));
  const double p20 = apa::sign_test(std::vector<double>(20, 1.0)).p_value;
  c.expect(p20 == std::ldexp(1.0, -20), "20/20 p = " + fmt(p20, 17));
  const std::vector<double> same{0.2, 0.5, 0.7};
  c.expect(apa::cles(same, same) == 0.5, "CLES identical");
  c.expect(apa::cles(std::vector<double>{0.1, 0.2}, std::vector<double>{0.3, 0.4}) == 1.0, "CLES separated");
  c.expect(apa::cles(std::vector<double>{1, 3}, std::vector<double>{2}) == 0.5, "CLES enumeration");
  c.note("p(5/5)=" + fmt(p5) + ", p(20/20)=" + fmt(p20));
  return c.outcome();
}

struct Experiments {
  fs::path config_dir;
};

apa::RunConfig load(const fs::path& p) {
  apa::RunConfig cfg = apa::load_run_config(p);
  cfg.output_dir = fs::temp_directory_path() / "apa_acceptance" / p.stem();
  return cfg;
}

Outcome experiment2(const Experiments& e) {
  Check c;
  const apa::EvalReport r = apa::run_experiment2(load(e.config_dir / "exp2.json"));
  apa::write_report(r, fs::temp_directory_path() / "apa_acceptance" / "exp2");
  std::map<std::string, std::pair<int, int>> wins;  // key -> (wins, total)
  for (const auto& rec : r.records) {
    const std::string key = rec.metric + "/" + rec.projection + "/" + rec.reference + "->" + rec.candidate;
    auto& w = wins[key];
    w.first += *rec.score_cand > *rec.score_pert;
    ++w.second;
  }
  c.expect(wins.size() == 2 * 2 * 4, "unexpected configuration count " + std::to_string(wins.size()));
  int min_wins = 1 << 30;
  for (const auto& [key, w] : wins) {
    c.expect(w.second == 20, key + " has " + std::to_string(w.second) + " repeats");
    c.expect(w.first >= 19, key + ": " + std::to_string(w.first) + "/20");
    min_wins = std::min(min_wins, w.first);
  }
  c.note("min S(B) > S(B') count " + std::to_string(min_wins) + "/20 over " + std::to_string(wins.size()) +
         " configurations");
  return c.outcome();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome experiment3(const Experiments& e) {
  Check c;
  const apa::EvalReport r = apa::run_experiment3(load(e.config_dir / "exp3.json"));
  apa::write_report(r, fs::temp_directory_path() / "apa_acceptance" / "exp3");
  std::map<std::string, std::vector<double>> by;
  for (const auto& x : r.cles) {
    c.expect(x.n_perturbed == 20 && x.n_matching == 20, "CLES cell without 20 seeds");
    by[x.condition].push_back(x.value);
  }
  const double rnd = median(by["random"]), pt = median(by["pitch_time"]);
  const double pitch = median(by["pitch"]), time = median(by["time"]);
  for (const auto& [name, v] : std::map<std::string, double>{{"random", rnd}, {"pitch_time", pt}, {"pitch", pitch}, {"time", time}}) {
    c.expect(v > 0.5, name + " median CLES " + fmt(v) + " <= 0.5");
  }
  c.expect(rnd >= pitch && rnd >= time, "random below a single-shift condition");
  c.expect(pt >= pitch && pt >= time, "pitch_time below a single-shift condition");
  c.note("median CLES random " + fmt(rnd, 4) + ", pitch_time " + fmt(pt, 4) + ", pitch " + fmt(pitch, 4) +
         ", time " + fmt(time, 4));
  return c.outcome();
}

Outcome experiment1(const Experiments& e) {
  Check c;
  const apa::EvalReport r = apa::run_experiment1(load(e.config_dir / "exp1.json"));
  apa::write_report(r, fs::temp_directory_path() / "apa_acceptance" / "exp1");
  std::string summary;
  for (const auto& t : r.sign_tests) {
    if (t.grouping != "within") continue;
    summary += (summary.empty() ? "" : ", ") + t.fusion + "/" + t.metric + " p=" + fmt(t.p_value, 3);
    if (t.fusion == "mix") c.expect(t.p_value <= 0.05, "mix/" + t.metric + " p=" + fmt(t.p_value));
  }
  c.expect(!summary.empty(), "no within-collection sign tests");
  c.note(summary);
  return c.outcome();
}

Outcome reproducibility(const Experiments& e) {
  Check c;
  const apa::RunConfig cfg = load(e.config_dir / "repro.json");
  for (int exp = 1; exp <= 3; ++exp) {
    const std::string a = apa::run_experiment(cfg, exp).records_csv();
    const std::string b = apa::run_experiment(cfg, exp).records_csv();
    c.expect(a == b, "experiment " + std::to_string(exp) + " records.csv differs on rerun");
    c.expect(a.size() > 200, "experiment " + std::to_string(exp) + " produced no records");
  }
  return c.outcome();
}

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  Experiments e{APA_ACCEPTANCE_CONFIG_DIR};
  std::string only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = argv[++i];
    } else {
      e.config_dir = a;
    }
  }

  const std::vector<Criterion> criteria{
      {"fad_closed_form", 1.0, fad_suite},
      {"mmd_oracle", 10.0, mmd_suite},
      {"score_contract", 60.0, score_contract},
      {"derangements", 60.0, derangement_suite},
      {"whitening", 60.0, whitening_suite},
      {"dsp", 60.0, dsp_suite},
      {"statistics", 60.0, stats_suite},
      {"exp2_directional", 300.0, [&] { return experiment2(e); }},
      {"exp3_cles_ordering", 600.0, [&] { return experiment3(e); }},
      {"exp1_mix_separates", 600.0, [&] { return experiment1(e); }},
      {"reproducible_records", 600.0, [&] { return reproducibility(e); }},
  };

  int failed = 0;
  for (const Criterion& cr : criteria) {
    if (!only.empty() && cr.name != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > cr.budget_seconds) {
      o.pass = false;
      o.detail += (o.detail.empty() ? "" : "; ") + std::string("over the ") + fmt(cr.budget_seconds) + " s budget";
    }
    failed += !o.pass;
    std::printf("%s %s (%.2f s)%s%s\n", o.pass ? "PASS" : "FAIL", cr.name.c_str(), secs,
                o.detail.empty() ? "" : ": ", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
