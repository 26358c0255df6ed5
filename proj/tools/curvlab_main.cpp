// Command-line front end: load a scene, run one analysis, emit a
// deterministic JSON report on stdout. Exit codes: 0 ok, 1 input error,
// 2 verdict failure.
#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <iostream>

#include "curvlab/l2.hpp"
#include "curvlab/report.hpp"
#include "curvlab/selfcheck.hpp"
#include "curvlab/vanishing.hpp"

using namespace curvlab;

namespace {

constexpr const char* kAnalyses[] = {
    "curvature",  "griffiths",   "nakano",       "decompose", "l2metric",
    "roundtrip",  "ke",          "duality",      "pushforward", "membership",
    "threshold",  "lelong",      "integrability", "vanishing-report", "selfcheck"};

struct Options {
  std::string analysis;
  std::string scene_path;
  int r = 0;              // for scene-less analyses
  double t = 0;           // integrability exponent; 0 = derived from r
  int resolution = 0;     // 0 = scene / per-rank default
  double tol = 0;         // 0 = scene default
  int chart = -1;         // -1 = scene default
  std::uint64_t seed = 0;
  bool raw_measure = false;
  bool serial = false;
  bool corrupt_volume = false;
};

jval complex_json(complex v) { return jval::of_complex(v); }

jval point_json(const std::vector<complex>& z) {
  jval arr = jval::array();
  for (complex c : z) arr.push(complex_json(c));
  return arr;
}

jval verdict_json(const Verdict& v) {
  jval out = jval::object();
  out.set("class", to_string(v.cls));
  out.set("extremal", v.extremal);
  out.set("opposite_extreme", v.max_value);
  out.set("tolerance_used", v.tol_used);
  if (!v.note.empty()) out.set("note", v.note);
  if (v.restarts > 0) out.set("restarts", v.restarts);
  jval wits = jval::array();
  for (const cvec& w : v.witness) {
    jval one = jval::array();
    for (Eigen::Index k = 0; k < w.size(); ++k) one.push(complex_json(w[k]));
    wits.push(std::move(one));
  }
  out.set("witness", std::move(wits));
  return out;
}

jval tensor_json(const CurvatureTensor& t) {
  jval out = jval::object();
  out.set("rank", t.rank());
  out.set("n", t.base_dim());
  out.set("max_abs", t.max_abs());
  out.set("pair_defect", t.pair_defect());
  jval entries = jval::array();
  for (int a = 0; a < t.rank(); ++a)
    for (int b = 0; b < t.rank(); ++b)
      for (int i = 0; i < t.base_dim(); ++i)
        for (int j = 0; j < t.base_dim(); ++j) {
          jval e = jval::array();
          e.push(a);
          e.push(b);
          e.push(i);
          e.push(j);
          e.push(complex_json(t.at(a, b, i, j)));
          entries.push(std::move(e));
        }
  out.set("entries", std::move(entries));
  return out;
}

std::string point_str(const std::vector<complex>& z) {
  std::string s = "(";
  for (std::size_t k = 0; k < z.size(); ++k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g%+gi", z[k].real(), z[k].imag());
    if (k) s += ", ";
    s += buf;
  }
  return s + ")";
}

int run_analysis(const Options& opt) {
  bool sceneless = opt.analysis == "threshold" || opt.analysis == "selfcheck";
  Scene sc;
  if (!opt.scene_path.empty()) {
    sc = load_scene(opt.scene_path);
  } else if (!sceneless) {
    std::cerr << "error: analysis '" << opt.analysis << "' needs a scene file\n";
    return 1;
  }
  if (opt.resolution > 0) sc.resolution = opt.resolution;
  if (opt.tol > 0) sc.tol = opt.tol;
  if (opt.chart >= 0) sc.chart = opt.chart;
  int res = sc.resolution > 0 ? sc.resolution : default_resolution(sc.r());

  QuadOpts qopts;
  qopts.raw_measure = opt.raw_measure;
  qopts.ex = default_exec();

  jval root = report_envelope(opt.analysis, opt.scene_path.empty() ? "(builtin)" : sc.name,
                              opt.scene_path.empty() ? "-" : sc.digest, res, sc.tol,
                              sc.chart, opt.seed, opt.raw_measure);
  jval result = jval::object();
  jval warnings = jval::array();
  bool verdict_failure = false;

  auto warn = [&warnings](const std::string& op, const std::string& pt_s,
                          const std::string& msg) {
    jval w = jval::object();
    w.set("operation", op);
    w.set("point", pt_s);
    w.set("message", msg);
    warnings.push(std::move(w));
  };

  if (opt.analysis == "threshold") {
    int r = opt.r > 0 ? opt.r : (opt.scene_path.empty() ? 0 : sc.r());
    if (r <= 0) {
      std::cerr << "error: threshold needs --r or a scene\n";
      return 1;
    }
    ThresholdReport rep = vanishing_threshold(r);
    result.set("r", rep.r);
    result.set("R", rep.big_r);
    result.set("threshold", rep.threshold);
    result.set("gt_one", rep.gt_one);
  } else if (opt.analysis == "selfcheck") {
    if (opt.corrupt_volume) debug_volume_scale() = 1.01;
    auto t0 = std::chrono::steady_clock::now();
    SelfcheckResult res_sc = run_selfcheck(opt.seed);
    double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    result = res_sc.to_json();
    // wall time goes to stderr so stdout stays byte-stable across runs
    std::fprintf(stderr, "selfcheck wall_ms=%.1f\n", ms);
    verdict_failure = !res_sc.all_pass;
  } else if (opt.analysis == "curvature") {
    HermitianField h = HermitianField::from_scene(sc);
    jval samples = jval::array();
    for (const auto& z : sc.samples) {
      CurvatureTensor t = chern_curvature(h, z);
      jval one = jval::object();
      one.set("point", point_json(z));
      one.set("tensor", tensor_json(t));
      samples.push(std::move(one));
    }
    result.set("samples", std::move(samples));
  } else if (opt.analysis == "griffiths" || opt.analysis == "nakano") {
    HermitianField h = HermitianField::from_scene(sc);
    jval samples = jval::array();
    double max_det = 0;
    std::vector<complex> max_det_at;
    for (const auto& z : sc.samples) {
      CurvatureTensor t = chern_curvature(h, z);
      Verdict v = opt.analysis == "griffiths"
                      ? griffiths_verdict(t, sc.tol, 20, opt.seed)
                      : nakano_verdict(t, h.value_pd(z), sc.tol);
      if (!v.nonneg()) verdict_failure = true;
      jval one = jval::object();
      one.set("point", point_json(z));
      one.set("verdict", verdict_json(v));
      samples.push(std::move(one));
      double det = std::abs(h.value_pd(z).determinant());
      if (det > max_det) {
        max_det = det;
        max_det_at = z;
      }
    }
    result.set("samples", std::move(samples));
    if (opt.analysis == "nakano") {
      // determinant bound record: the finiteness hypothesis is sampled, not
      // proven; the maximum and its location are reported.
      jval det = jval::object();
      det.set("max_abs_det", max_det);
      det.set("at", point_json(max_det_at));
      det.set("note", "bounded-determinant hypothesis sampled on the grid only");
      result.set("det_bound", std::move(det));
    }
  } else if (opt.analysis == "decompose") {
    ChartWeight phi = ChartWeight::from_scene(sc);
    auto probes = fiber_probes(sc.r(), 6);
    double worst = 0;
    jval samples = jval::array();
    for (const auto& z : sc.samples) {
      double local = 0;
      for (std::size_t k = 0; k < probes.size(); k += 2)
        local = std::max(local, decomposition_residual(phi, z, probes[k]));
      worst = std::max(worst, local);
      jval one = jval::object();
      one.set("point", point_json(z));
      one.set("max_residual", local);
      samples.push(std::move(one));
    }
    double threshold = opt.tol > 0 ? opt.tol : 1e-5;
    result.set("samples", std::move(samples));
    result.set("max_residual", worst);
    result.set("threshold", threshold);
    verdict_failure = worst > threshold;
  } else if (opt.analysis == "l2metric") {
    ChartWeight phi = ChartWeight::from_scene(sc);
    FiberGrid grid = build_grid(std::max(sc.r(), 1), res);
    jval samples = jval::array();
    for (const auto& z : sc.samples) {
      L2Matrix l2 = l2_metric(phi, z, grid, qopts, true);
      if (l2.divergence_flagged)
        warn("l2_metric", point_str(z), "integral grew by more than 10% under refinement");
      jval one = jval::object();
      one.set("point", point_json(z));
      one.set("matrix", jval::of_cmat(l2.m));
      one.set("positive_definite", l2.positive_definite);
      one.set("refinement_growth", l2.refinement_growth);
      samples.push(std::move(one));
    }
    result.set("samples", std::move(samples));
  } else if (opt.analysis == "roundtrip") {
    HermitianField h = HermitianField::from_scene(sc);
    FiberGrid grid = build_grid(std::max(sc.r(), 1), res);
    jval samples = jval::array();
    double worst = 0;
    for (const auto& z : sc.samples) {
      RoundtripReport rep = roundtrip_check(h, z, grid, qopts);
      worst = std::max({worst, rep.residual, rep.volume_match});
      jval one = jval::object();
      one.set("point", point_json(z));
      one.set("lambda", rep.lambda);
      one.set("residual", rep.residual);
      one.set("fiber_volume", rep.fiber_volume);
      one.set("moment_factor", rep.moment_factor);
      one.set("volume_match", rep.volume_match);
      samples.push(std::move(one));
    }
    result.set("samples", std::move(samples));
    result.set("worst", worst);
    verdict_failure = worst > 1e-4;
  } else if (opt.analysis == "ke") {
    ChartWeight phi = ChartWeight::from_scene(sc);
    std::function<complex(std::span<const complex>)> det_h;
    if (sc.metric) {
      HermitianField h = HermitianField::from_scene(sc);
      det_h = [h](std::span<const complex> z) { return h.value(z).determinant(); };
    } else {
      det_h = [](std::span<const complex>) { return complex(1, 0); };
    }
    auto probes = fiber_probes(sc.r(), 12);
    jval samples = jval::array();
    double worst = 0, cmin = 1e300, cmax = -1e300;
    for (const auto& z : sc.samples) {
      KeFit fit = ke_fit(phi, det_h, z, probes);
      worst = std::max(worst, fit.residual);
      cmin = std::min(cmin, fit.c_fit);
      cmax = std::max(cmax, fit.c_fit);
      jval one = jval::object();
      one.set("point", point_json(z));
      one.set("c_fit", fit.c_fit);
      one.set("residual", fit.residual);
      samples.push(std::move(one));
    }
    result.set("samples", std::move(samples));
    result.set("worst_residual", worst);
    result.set("c_spread", cmax - cmin);
    double threshold = opt.tol > 0 ? opt.tol : 1e-6;
    result.set("threshold", threshold);
    verdict_failure = worst > threshold;
  } else if (opt.analysis == "duality") {
    HermitianField h = HermitianField::from_scene(sc);
    FiberGrid grid = build_grid(std::max(sc.r(), 1), res);
    jval samples = jval::array();
    double worst = 0;
    std::size_t count = std::min<std::size_t>(sc.samples.size(), 3);
    for (std::size_t k = 0; k < count; ++k) {
      DualityReport rep = duality_check(h, sc.samples[k], grid, qopts);
      worst = std::max(worst, rep.rel_deviation);
      jval one = jval::object();
      one.set("point", point_json(sc.samples[k]));
      one.set("lambda", rep.lambda);
      one.set("rel_deviation", rep.rel_deviation);
      one.set("scale", rep.scale);
      samples.push(std::move(one));
    }
    result.set("samples", std::move(samples));
    result.set("worst", worst);
    verdict_failure = worst > 1e-3;
  } else if (opt.analysis == "pushforward") {
    HermitianField h = HermitianField::from_scene(sc);
    FiberGrid grid = build_grid(std::max(sc.r(), 1), res);
    jval samples = jval::array();
    double worst = 0;
    std::size_t count = std::min<std::size_t>(sc.samples.size(), 3);
    for (std::size_t k = 0; k < count; ++k) {
      PushforwardReport rep = det_pushforward_check(h, sc.samples[k], grid, qopts);
      worst = std::max(worst, rep.rel_deviation);
      jval one = jval::object();
      one.set("point", point_json(sc.samples[k]));
      one.set("lhs", jval::of_cmat(rep.lhs));
      one.set("rhs", jval::of_cmat(rep.rhs));
      one.set("convention_factor", rep.convention_factor);
      one.set("rel_deviation", rep.rel_deviation);
      samples.push(std::move(one));
    }
    result.set("samples", std::move(samples));
    result.set("worst", worst);
    verdict_failure = worst > 1e-3;
  } else if (opt.analysis == "membership") {
    ChartWeight phi = ChartWeight::from_scene(sc);
    MembershipReport rep = hx_membership(phi, sc.samples, 8, sc.tol);
    result.set("fiber_positive", rep.fiber_positive);
    result.set("current_semi_positive", rep.current_semi_positive);
    result.set("min_fiber_eig", rep.min_fiber_eig);
    result.set("min_full_eig", rep.min_full_eig);
    result.set("fiber_samples", rep.fiber_samples);
    for (const std::string& f : rep.failures) warn("hx_membership", "(fiber)", f);
    verdict_failure = !rep.fiber_positive;
  } else if (opt.analysis == "lelong") {
    SingularBaseWeight w = SingularBaseWeight::from_scene(sc);
    LelongReport rep = lelong_estimate(w);
    result.set("nu", rep.nu);
    result.set("fit_residual", rep.fit_residual);
    result.set("confident", rep.confident);
    if (!rep.note.empty()) result.set("note", rep.note);
  } else if (opt.analysis == "integrability") {
    SingularBaseWeight w = SingularBaseWeight::from_scene(sc);
    double t = opt.t;
    if (t <= 0) t = 1.0 / vanishing_threshold(sc.r()).threshold;
    IntegrabilityReport rep = integrability_classify(w, t);
    result.set("t", t);
    result.set("class", to_string(rep.cls));
    jval sums = jval::array();
    for (double s : rep.partial_sums) sums.push(jval(s));
    result.set("partial_sums", std::move(sums));
    jval growth = jval::array();
    for (double g : rep.growth) growth.push(jval(g));
    result.set("growth", std::move(growth));
  } else if (opt.analysis == "vanishing-report") {
    int r = opt.r > 0 ? opt.r : sc.r();
    VanishingReport rep = vanishing_report(sc, r);
    result.set("r", rep.r);
    result.set("R", rep.threshold.big_r);
    result.set("threshold", rep.threshold.threshold);
    result.set("threshold_gt_one", rep.threshold.gt_one);
    result.set("nu", rep.lelong.nu);
    result.set("nu_below_threshold", rep.nu_below_threshold);
    result.set("nu_below_one", rep.nu_below_one);
    result.set("t_used", rep.t_used);
    result.set("integrability", to_string(rep.integrability.cls));
    result.set("curvature_positive_proxy", rep.curvature_positive);
    result.set("conclusion", rep.conclusion);
    result.set("statement", rep.statement);
    verdict_failure = rep.conclusion != "satisfied";
  } else {
    std::cerr << "error: unknown analysis '" << opt.analysis << "'\nusage: curvlab <";
    for (std::size_t k = 0; k < std::size(kAnalyses); ++k)
      std::cerr << (k ? "|" : "") << kAnalyses[k];
    std::cerr << "> [scene] [flags]\n";
    return 1;
  }

  root.set("result", std::move(result));
  root.set("warnings", std::move(warnings));
  root.set("status", verdict_failure ? "verdict-failure" : "ok");
  std::string out = root.dump(2);
  std::fwrite(out.data(), 1, out.size(), stdout);
  std::fputc('\n', stdout);
  std::fflush(stdout);
  return verdict_failure ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvature and positivity lab for metrics on vector bundles"};
  Options opt;
  app.add_option("analysis", opt.analysis, "analysis to run")->required();
  app.add_option("scene", opt.scene_path, "scene file");
  app.add_option("--r", opt.r, "fiber dimension for scene-less analyses");
  app.add_option("--t", opt.t, "integrability exponent");
  app.add_option("--resolution", opt.resolution, "fiber grid resolution");
  app.add_option("--tol", opt.tol, "tolerance override");
  app.add_option("--chart", opt.chart, "chart index override");
  app.add_option("--seed", opt.seed, "seed for heuristic restarts");
  app.add_flag("--raw-measure", opt.raw_measure, "report with the raw (i ddbar)^r measure");
  app.add_flag("--serial", opt.serial, "run the reference serial kernels");
  app.add_flag("--debug-corrupt-volume", opt.corrupt_volume,
               "negative control: corrupt the volume normalization by 1%");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp") {
      std::cout << app.help();
      return 0;
    }
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  bool known = false;
  for (const char* name : kAnalyses) known = known || opt.analysis == name;
  if (!known) {
    std::cerr << "error: unknown analysis '" << opt.analysis << "'\nusage: curvlab <";
    for (std::size_t k = 0; k < std::size(kAnalyses); ++k)
      std::cerr << (k ? "|" : "") << kAnalyses[k];
    std::cerr << "> [scene] [flags]\n";
    return 1;
  }
  default_exec() = opt.serial ? exec::serial : exec::parallel;

  try {
    return run_analysis(opt);
  } catch (const parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
