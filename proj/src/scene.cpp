#include "curvlab/scene.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace curvlab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExprPtr expr(const std::string& s) { return parse_scalar(s); }

// sum of abs2 over a variable family, e.g. "abs2(z1) + abs2(z2)".
std::string abs2_sum(char fam, int lo, int count) {
  std::string s;
  for (int k = 0; k < count; ++k) {
    if (k) s += " + ";
    s += "abs2(";
    s += fam;
    s += std::to_string(lo + k);
    s += ")";
  }
  return count ? s : "0";
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void Scene::validate() const {
  if (n < 1 || n > 4) throw error(errkind::input, "scene: base dimension n must be in [1,4]");
  if (rank < 1 || rank > 4) throw error(errkind::input, "scene: rank must be in [1,4]");
  if (chart < 0 || chart > r()) throw error(errkind::input, "scene: chart index out of range");
  if (!metric && !weight)
    throw error(errkind::input, "scene: need at least one of metric / weight");
  if (metric) {
    if (!metric->is_matrix() || metric->rows != rank || metric->cols != rank)
      throw error(errkind::input, "scene: metric must be a rank x rank matrix expression");
    check_vars(*metric, n, 0, 0);  // metric depends on z only
  }
  if (weight) check_vars(*weight, n, r(), 0);
  if (!(tol > 0)) throw error(errkind::input, "scene: tolerance must be positive");
  for (const auto& s : samples) {
    if ((int)s.size() != n)
      throw error(errkind::input, "scene: sample point arity does not match n");
    double norm2 = 0;
    for (complex c : s) {
      if (!finite(c)) throw error(errkind::input, "scene: non-finite sample point");
      norm2 += std::norm(c);
    }
    double norm = std::sqrt(norm2);
    if (norm > domain_radius + 1e-12)
      throw error(errkind::input, "scene: sample point outside the domain radius");
    if (norm < punctured_radius - 1e-12)
      throw error(errkind::input, "scene: sample point inside the punctured radius");
  }
}

int default_resolution(int r) {
  switch (r) {
    case 0: return 1;
    case 1: return 64;
    case 2: return 24;
    default: return 8;
  }
}

std::vector<std::vector<complex>> default_samples(int n, double domain_radius,
                                                  double punctured_radius) {
  std::vector<std::vector<complex>> out;
  std::vector<complex> firsts;
  if (punctured_radius > 0) {
    double lo = std::max(0.2, punctured_radius + 0.1);
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b)
        firsts.push_back(complex(lo + 0.15 * a, -0.3 + 0.15 * b));
  } else {
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b)
        firsts.push_back(complex(-0.5 + 0.25 * a, -0.5 + 0.25 * b));
  }
  for (complex z1 : firsts) {
    std::vector<complex> pt(n, complex(0, 0));
    pt[0] = z1;
    if (n >= 2) pt[1] = complex(0.1, -0.05);  // keep higher coordinates fixed, small
    double norm = 0;
    for (complex c : pt) norm += std::norm(c);
    if (std::sqrt(norm) > domain_radius) continue;
    out.push_back(std::move(pt));
  }
  return out;
}

ExprPtr trivial_homogeneous_form(int r) { return expr(abs2_sum('Z', 0, r + 1)); }

Scene builtin_scene(const std::string& name, int n, int r, const std::vector<double>& params) {
  if (n < 1 || r < 0) throw error(errkind::input, "builtin_scene: bad dimensions");
  Scene sc;
  sc.n = n;
  sc.rank = r + 1;
  std::string base2 = abs2_sum('z', 1, n);
  std::string fiber_fs = r > 0 ? "log(1 + " + abs2_sum('w', 1, r) + ")" : "0";

  auto diag_metric = [&](const std::vector<double>& cs) {
    std::string m = "[";
    for (int a = 0; a <= r; ++a) {
      m += "[";
      for (int b = 0; b <= r; ++b) {
        if (b) m += ", ";
        if (a == b)
          m += "exp(-" + fmt(cs[a]) + "*(" + base2 + "))";
        else
          m += "0";
      }
      m += "]";
      if (a < r) m += ",";
    }
    m += "]";
    return parse_field(m);
  };

  if (name == "trivial") {
    if (!params.empty()) throw error(errkind::input, "builtin trivial takes no parameters");
    sc.metric = diag_metric(std::vector<double>(r + 1, 0.0));
    if (r > 0) sc.weight = expr(fiber_fs);
    sc.name = "trivial";
  } else if (name == "fubini-study" || name == "product") {
    double c = params.empty() ? 1.0 : params[0];
    if (params.size() > 1)
      throw error(errkind::input, "builtin fubini-study takes at most one parameter");
    sc.metric = diag_metric(std::vector<double>(r + 1, c));
    std::string w = fmt(c) + "*(" + base2 + ")";
    if (r > 0) w += " + " + fiber_fs;
    sc.weight = expr(w);
    sc.name = "product";
  } else if (name == "diagonal-exponential") {
    if ((int)params.size() != r + 1)
      throw error(errkind::input,
                  "builtin diagonal-exponential needs rank (= r+1) parameters");
    sc.metric = diag_metric(params);
    sc.name = "diagonal-exponential";
  } else if (name == "stable-model") {
    if (n != 1) throw error(errkind::input, "builtin stable-model is defined over a curve (n=1)");
    if (params.empty() || params.size() > 2)
      throw error(errkind::input, "builtin stable-model takes parameters (c [, smooth])");
    StableModelInfo info;
    info.log_coeff = params[0];
    info.smooth_coeff = params.size() > 1 ? params[1] : 0.0;
    // phi_base = c log|z|^2 + s |z|^2, metric = e^{-phi_base/(r+1)} I.
    std::string phi_base =
        fmt(info.log_coeff) + "*log(abs2(z1)) + " + fmt(info.smooth_coeff) + "*abs2(z1)";
    std::string m = "[";
    for (int a = 0; a <= r; ++a) {
      m += "[";
      for (int b = 0; b <= r; ++b) {
        if (b) m += ", ";
        m += (a == b) ? "exp(-(" + phi_base + ")/" + fmt(double(r + 1)) + ")" : std::string("0");
      }
      m += "]";
      if (a < r) m += ",";
    }
    m += "]";
    sc.metric = parse_field(m);
    if (r > 0)
      sc.weight = expr("(" + phi_base + ")/" + fmt(double(r + 1)) + " + " + fiber_fs);
    sc.stable = info;
    sc.punctured_radius = 0.1;
    sc.name = "stable-model";
  } else {
    throw error(errkind::input, "unknown builtin scene '" + name + "'");
  }

  sc.samples = default_samples(n, sc.domain_radius, sc.punctured_radius);
  std::string id = "builtin:" + name + ";n=" + std::to_string(n) + ";r=" + std::to_string(r);
  for (double p : params) id += ";" + fmt(p);
  char hex[20];
  std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)fnv1a(id));
  sc.digest = hex;
  sc.validate();
  return sc;
}

Scene parse_scene(const std::string& text, const std::string& origin) {
  Scene sc;
  bool have_builtin = false;
  std::string builtin_name;
  std::vector<double> builtin_params;
  std::vector<std::string> sample_specs;
  bool have_samples = false, have_resolution = false, have_tol = false;
  bool have_punctured = false, have_chart = false;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = line;
    std::size_t hash = body.find('#');
    if (hash != std::string::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    std::size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw parse_error(lineno, 1, origin + ": expected 'key = value'");
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (value.empty()) throw parse_error(lineno, (int)eq + 2, origin + ": empty value");

    auto as_int = [&](const std::string& v) {
      try {
        return std::stoi(v);
      } catch (...) {
        throw parse_error(lineno, 1, origin + ": integer expected for '" + key + "'");
      }
    };
    auto as_double = [&](const std::string& v) {
      try {
        return std::stod(v);
      } catch (...) {
        throw parse_error(lineno, 1, origin + ": number expected for '" + key + "'");
      }
    };

    if (key == "n") sc.n = as_int(value);
    else if (key == "rank") sc.rank = as_int(value);
    else if (key == "chart") { sc.chart = as_int(value); have_chart = true; }
    else if (key == "metric") sc.metric = parse_field(value);
    else if (key == "weight") sc.weight = expr(value);
    else if (key == "builtin") {
      have_builtin = true;
      std::size_t lp = value.find('(');
      if (lp == std::string::npos) {
        builtin_name = value;
      } else {
        if (value.back() != ')')
          throw parse_error(lineno, 1, origin + ": malformed builtin parameter list");
        builtin_name = trim(value.substr(0, lp));
        std::string args = value.substr(lp + 1, value.size() - lp - 2);
        std::istringstream as(args);
        std::string piece;
        while (std::getline(as, piece, ',')) {
          piece = trim(piece);
          if (!piece.empty()) builtin_params.push_back(as_double(piece));
        }
      }
    } else if (key == "samples") {
      have_samples = true;
      std::istringstream ss(value);
      std::string pt;
      while (std::getline(ss, pt, ';')) {
        pt = trim(pt);
        if (!pt.empty()) sample_specs.push_back(pt);
      }
    } else if (key == "tolerances" || key == "tol") {
      sc.tol = as_double(value);
      have_tol = true;
    } else if (key == "resolution") {
      sc.resolution = as_int(value);
      have_resolution = true;
    } else if (key == "domain_radius") sc.domain_radius = as_double(value);
    else if (key == "punctured_radius") { sc.punctured_radius = as_double(value); have_punctured = true; }
    else if (key == "name") sc.name = value;
    else
      throw parse_error(lineno, 1, origin + ": unknown key '" + key + "'");
  }

  if (have_builtin) {
    Scene base = builtin_scene(builtin_name, sc.n, sc.rank - 1, builtin_params);
    // Explicit keys override the builtin's choices.
    if (sc.metric) base.metric = sc.metric;
    if (sc.weight) base.weight = sc.weight;
    if (have_chart) base.chart = sc.chart;
    if (have_tol) base.tol = sc.tol;
    if (have_resolution) base.resolution = sc.resolution;
    if (have_punctured) base.punctured_radius = sc.punctured_radius;
    if (sc.name != "scene") base.name = sc.name;
    sc = std::move(base);
  }

  if (have_samples) {
    sc.samples.clear();
    for (const std::string& spec : sample_specs) {
      std::vector<complex> pt;
      std::istringstream cs(spec);
      std::string comp;
      while (std::getline(cs, comp, ',')) {
        comp = trim(comp);
        if (comp.empty()) continue;
        pt.push_back(eval_scalar(expr(comp), Bindings{}));
      }
      sc.samples.push_back(std::move(pt));
    }
  } else if (sc.samples.empty()) {
    sc.samples = default_samples(sc.n, sc.domain_radius, sc.punctured_radius);
  }

  char hex[20];
  std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)fnv1a(text));
  sc.digest = hex;
  sc.validate();
  return sc;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error(errkind::input, "cannot open scene file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str(), path);
}

}  // namespace curvlab
