#include "curvlab/hermitian.hpp"

#include <cmath>
#include <sstream>

namespace curvlab {

namespace {

std::vector<int> base_dirs(int n) {
  std::vector<int> d(n);
  for (int i = 0; i < n; ++i) d[i] = i;
  return d;
}

void require_pd(const cmat& m, const char* who) {
  Eigen::LLT<cmat> llt(m);
  if (llt.info() != Eigen::Success)
    throw error(errkind::degenerate_metric, std::string(who) + ": metric not positive-definite");
}

}  // namespace

HermitianField HermitianField::from_expr(const FieldExpr& m, int n, double domain_radius,
                                         double punctured_radius) {
  if (!m.is_matrix() || m.rows != m.cols)
    throw error(errkind::input, "HermitianField: square matrix expression required");
  check_vars(m, n, 0, 0);
  int rank = m.rows;
  MatrixField f = [m, n](std::span<const complex> z) {
    return eval_matrix(m, Bindings{z.subspan(0, n), {}, {}});
  };
  return HermitianField(n, rank, std::move(f), domain_radius, punctured_radius);
}

HermitianField HermitianField::from_scene(const Scene& sc) {
  if (!sc.metric) throw error(errkind::input, "scene has no Hermitian metric");
  return from_expr(*sc.metric, sc.n, sc.domain_radius, sc.punctured_radius);
}

HermitianField HermitianField::constant(const cmat& m, int n) {
  cmat copy = m;
  return HermitianField(n, (int)m.rows(),
                        [copy](std::span<const complex>) { return copy; });
}

cmat HermitianField::value(std::span<const complex> z) const {
  if ((int)z.size() < n_) throw error(errkind::input, "HermitianField: point arity mismatch");
  if (punctured_radius_ > 0) {
    double norm2 = 0;
    for (int i = 0; i < n_; ++i) norm2 += std::norm(z[i]);
    if (std::sqrt(norm2) < punctured_radius_) {
      std::ostringstream os;
      os << "HermitianField: point inside the punctured radius " << punctured_radius_;
      throw error(errkind::domain, os.str());
    }
  }
  cmat m = field_(z.subspan(0, n_));
  if (!all_finite(m)) throw error(errkind::domain, "HermitianField: non-finite metric value");
  if (!is_hermitian(m))
    throw error(errkind::domain, "HermitianField: value violates the Hermitian invariant");
  return hermitize(m);
}

cmat HermitianField::value_pd(std::span<const complex> z) const {
  cmat m = value(z);
  require_pd(m, "HermitianField");
  return m;
}

cmat HermitianField::dual_value(std::span<const complex> z) const {
  cmat m = value_pd(z);
  cmat inv = m.inverse();
  return hermitize(inv.conjugate());
}

HermitianField HermitianField::dual() const {
  HermitianField self = *this;
  return HermitianField(n_, rank_,
                        [self](std::span<const complex> z) { return self.dual_value(z); },
                        domain_radius_, punctured_radius_);
}

HermitianField HermitianField::twist_with_det() const {
  HermitianField self = *this;
  return HermitianField(
      n_, rank_,
      [self](std::span<const complex> z) {
        cmat m = self.value(z);
        complex det = m.determinant();
        return cmat(m * det.real());
      },
      domain_radius_, punctured_radius_);
}

HermitianField HermitianField::reframed(const cmat& s) const {
  HermitianField self = *this;
  cmat st = s.transpose();
  cmat sc = s.conjugate();
  return HermitianField(
      n_, rank_,
      [self, st, sc](std::span<const complex> z) { return cmat(st * self.value(z) * sc); },
      domain_radius_, punctured_radius_);
}

CurvatureTensor chern_curvature(const HermitianField& h, std::span<const complex> z,
                                double step) {
  const int n = h.n(), rank = h.rank();
  cmat at_z = h.value_pd(z);
  MatrixField f = [&h](std::span<const complex> p) { return h.value(p); };
  auto dirs = base_dirs(n);
  MatrixJet2 jet = matrix_jet2(f, z.subspan(0, n), dirs, step);
  cmat inv = at_z.inverse();

  CurvatureTensor theta(rank, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cmat block = -jet.dd[i][j] + jet.d[i] * inv * jet.dbar[j];
      for (int a = 0; a < rank; ++a)
        for (int b = 0; b < rank; ++b) theta.at(a, b, i, j) = block(a, b);
    }
  return theta;
}

ConnectionCoeffs connection_coeffs(const HermitianField& h, std::span<const complex> z,
                                   double step) {
  const int n = h.n();
  cmat inv = h.value_pd(z).inverse();
  MatrixField f = [&h](std::span<const complex> p) { return h.value(p); };
  MatrixJet2 jet = matrix_jet2(f, z.subspan(0, n), base_dirs(n), step);
  ConnectionCoeffs out;
  out.rank = h.rank();
  out.n = n;
  out.gamma.reserve(n);
  for (int i = 0; i < n; ++i) out.gamma.push_back(jet.d[i] * inv);
  return out;
}

cvec PolySection::eval(std::span<const complex> z) const {
  cvec out = v;
  for (int k = 0; k < (int)z0.size(); ++k) out += (z[k] - z0[k]) * c.col(k);
  return out;
}

std::vector<PolySection> normal_frame(const HermitianField& h, std::span<const complex> z0,
                                      const std::vector<cvec>& directions) {
  const int n = h.n(), rank = h.rank();
  ConnectionCoeffs gamma = connection_coeffs(h, z0);
  std::vector<cvec> values = directions;
  if (values.empty())
    for (int a = 0; a < rank; ++a) values.push_back(cvec::Unit(rank, a));

  std::vector<PolySection> frame;
  frame.reserve(values.size());
  for (const cvec& v : values) {
    PolySection s;
    s.z0.assign(z0.begin(), z0.begin() + n);
    s.v = v;
    s.c = cmat(rank, n);
    for (int k = 0; k < n; ++k) s.c.col(k) = -(gamma.gamma[k] * v);
    frame.push_back(std::move(s));
  }
  return frame;
}

double normal_frame_residual(const HermitianField& h, std::span<const complex> z0,
                             const std::vector<PolySection>& frame) {
  ConnectionCoeffs gamma = connection_coeffs(h, z0, default_step(z0) / 2);
  double worst = 0;
  for (const PolySection& s : frame)
    for (int k = 0; k < h.n(); ++k) {
      cvec resid = s.c.col(k) + gamma.gamma[k] * s.v;
      worst = std::max(worst, resid.template lpNorm<Eigen::Infinity>());
    }
  return worst;
}

namespace {

// One alternating run of the biquadratic extremal search.
double alternate(const CurvatureTensor& t, cvec& s, cvec& v, bool minimize) {
  const int rank = t.rank(), n = t.base_dim();
  double current = 0;
  for (int iter = 0; iter < 60; ++iter) {
    // fix v: Hermitian form in s
    cmat qs = cmat::Zero(rank, rank);
    for (int a = 0; a < rank; ++a)
      for (int b = 0; b < rank; ++b) {
        complex acc = 0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) acc += t.at(a, b, i, j) * v[i] * std::conj(v[j]);
        qs(a, b) = acc;
      }
    EigenResult es = hermitian_eigen(hermitize(qs));
    s = es.vectors.col(minimize ? 0 : rank - 1);
    // fix s: Hermitian form in v
    cmat qv = cmat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        complex acc = 0;
        for (int a = 0; a < rank; ++a)
          for (int b = 0; b < rank; ++b) acc += t.at(a, b, i, j) * s[a] * std::conj(s[b]);
        qv(i, j) = acc;
      }
    EigenResult ev = hermitian_eigen(hermitize(qv));
    int pick = minimize ? 0 : n - 1;
    v = ev.vectors.col(pick);
    double next = ev.values[pick];
    if (iter > 0 && std::abs(next - current) <= 1e-13 * (1 + std::abs(next))) return next;
    current = next;
  }
  return current;
}

}  // namespace

Verdict griffiths_verdict(const CurvatureTensor& t, double tol, int restarts,
                          std::uint64_t seed) {
  const int rank = t.rank(), n = t.base_dim();
  double scale = t.max_abs();
  if (scale == 0) {
    Verdict v = classify(0, 0, tol);
    v.note += (v.note.empty() ? "" : "; ");
    v.note += "heuristic";
    v.restarts = restarts;
    v.witness = {cvec::Unit(rank, 0), cvec::Unit(n, 0)};
    return v;
  }
  rng gen(seed * 0x9e3779b9u + 17);
  double best_min = std::numeric_limits<double>::infinity();
  double best_max = -std::numeric_limits<double>::infinity();
  cvec smin, vmin;
  for (int run = 0; run < restarts; ++run) {
    cvec s = gen.unit_cvec(rank), v = gen.unit_cvec(n);
    double lo = alternate(t, s, v, true);
    if (lo < best_min) {
      best_min = lo;
      smin = s;
      vmin = v;
    }
    cvec s2 = gen.unit_cvec(rank), v2 = gen.unit_cvec(n);
    best_max = std::max(best_max, alternate(t, s2, v2, false));
  }
  Verdict verdict = classify(best_min, best_max, tol * scale);
  verdict.witness = {smin, vmin};
  verdict.note = verdict.note.empty() ? "heuristic" : verdict.note + "; heuristic";
  verdict.restarts = restarts;
  return verdict;
}

Verdict nakano_verdict(const CurvatureTensor& t, const cmat& h_at_z, double tol) {
  cmat m = nakano_flatten(t, h_at_z);
  double scale = max_abs(m);
  if (scale == 0) return classify(0, 0, tol);
  EigenResult eig = hermitian_eigen(m);
  Verdict v = classify(eig.values[0], eig.values[eig.values.size() - 1], tol * scale);
  v.witness = {eig.vectors.col(0)};
  return v;
}

cmat log_pairing_hessian(const HermitianField& h, const std::vector<ExprPtr>& u,
                         std::span<const complex> z, double step) {
  const int n = h.n(), rank = h.rank();
  if ((int)u.size() != rank)
    throw error(errkind::input, "log_pairing_hessian: section arity != rank");
  for (const auto& comp : u) check_vars(comp, n, 0, 0);
  ScalarField f = [&h, &u, n, rank](std::span<const complex> p) {
    cmat m = h.value(p);
    Bindings b{p.subspan(0, (std::size_t)n), {}, {}};
    cvec uv(rank);
    for (int a = 0; a < rank; ++a) uv[a] = eval_scalar(u[a], b);
    complex pairing = 0;
    for (int a = 0; a < rank; ++a)
      for (int bidx = 0; bidx < rank; ++bidx)
        pairing += m(a, bidx) * uv[a] * std::conj(uv[bidx]);
    if (!(pairing.real() > 0))
      throw error(errkind::domain, "log_pairing_hessian: vanishing pairing");
    return std::log(pairing.real());
  };
  Jet2 jet = jet2(f, z.subspan(0, n), base_dirs(n), step);
  return hermitize(jet.dd_matrix());
}

PairingHessianReport pairing_hessian_check(const HermitianField& h,
                                           std::span<const complex> z0, double step) {
  const int n = h.n(), rank = h.rank();
  CurvatureTensor theta = chern_curvature(h, z0, step);
  std::vector<PolySection> frame = normal_frame(h, z0);
  auto dirs = base_dirs(n);

  PairingHessianReport rep;
  for (int k = 0; k < rank; ++k)
    for (int l = 0; l < rank; ++l) {
      ScalarField f = [&h, &frame, k, l, n](std::span<const complex> p) {
        cmat m = h.value(p);
        cvec sk = frame[k].eval(p.subspan(0, n));
        cvec sl = frame[l].eval(p.subspan(0, n));
        complex pairing = 0;
        for (int a = 0; a < (int)sk.size(); ++a)
          for (int b = 0; b < (int)sl.size(); ++b)
            pairing += m(a, b) * sk[a] * std::conj(sl[b]);
        return pairing;
      };
      Jet2 jet = jet2(f, z0.subspan(0, n), dirs, step);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          complex contraction = 0;
          for (int a = 0; a < rank; ++a)
            for (int b = 0; b < rank; ++b)
              contraction += theta.at(a, b, i, j) * frame[k].v[a] * std::conj(frame[l].v[b]);
          rep.max_deviation = std::max(rep.max_deviation,
                                       std::abs(jet.dd[i][j] - (-contraction)));
          rep.scale = std::max(rep.scale, std::abs(contraction));
        }
    }
  return rep;
}

cmat det_curvature(const HermitianField& h, std::span<const complex> z, double step) {
  const int n = h.n();
  h.value_pd(z);
  ScalarField f = [&h](std::span<const complex> p) {
    complex det = h.value(p).determinant();
    if (!(det.real() > 0))
      throw error(errkind::degenerate_metric, "det_curvature: non-positive determinant");
    return std::log(det.real());
  };
  Jet2 jet = jet2(f, z.subspan(0, n), base_dirs(n), step);
  return hermitize(cmat(-jet.dd_matrix()));
}

DemaillySkodaReport demailly_skoda_check(const HermitianField& h,
                                         const std::vector<std::vector<complex>>& samples,
                                         double tol) {
  DemaillySkodaReport rep;
  for (const auto& z : samples) {
    Verdict g = griffiths_verdict(chern_curvature(h, z), tol, 20, 1);
    if (!g.nonneg()) {
      rep.precondition_ok = false;
      std::ostringstream os;
      os << "sample (" << z[0].real() << (z[0].imag() < 0 ? "" : "+") << z[0].imag()
         << "i) is not Griffiths-positive; twist check skipped";
      rep.skip_note = os.str();
      return rep;
    }
  }
  HermitianField twist = h.twist_with_det();
  rep.min_eig_normalized = std::numeric_limits<double>::infinity();
  for (const auto& z : samples) {
    CurvatureTensor t = chern_curvature(twist, z);
    cmat m = nakano_flatten(t, twist.value_pd(z));
    double scale = std::max(max_abs(m), 1e-300);
    EigenResult eig = hermitian_eigen(m);
    rep.min_eig_normalized = std::min(rep.min_eig_normalized, eig.values[0] / scale);
    ++rep.samples_checked;
  }
  rep.all_nakano_psd = rep.min_eig_normalized >= -tol;
  return rep;
}

}  // namespace curvlab
