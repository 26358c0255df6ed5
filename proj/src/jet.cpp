#include "curvlab/jet.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>

namespace curvlab {

namespace {

double absmax(complex v) { return std::abs(v); }
double absmax(const cmat& m) { return max_abs(m); }

std::string point_string(std::span<const complex> p) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k) os << ", ";
    os << p[k].real() << (p[k].imag() < 0 ? "-" : "+") << std::abs(p[k].imag()) << "i";
  }
  os << ")";
  return os.str();
}

// Memoizing evaluator keyed on exact bit patterns; offsets repeat between
// the h and h/2 passes and across direction pairs.
template <class T, class F>
class Memo {
 public:
  explicit Memo(const F& f) : f_(f) {}

  const T& at(const std::vector<complex>& p) {
    std::vector<std::uint64_t> key;
    key.reserve(2 * p.size());
    for (complex c : p) {
      key.push_back(std::bit_cast<std::uint64_t>(c.real()));
      key.push_back(std::bit_cast<std::uint64_t>(c.imag()));
    }
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    try {
      return cache_.emplace(std::move(key), f_(std::span<const complex>(p))).first->second;
    } catch (const error& e) {
      if (e.kind() == errkind::domain)
        throw error(errkind::domain,
                    std::string(e.what()) + " while sampling offset point " + point_string(p));
      throw;
    }
  }

 private:
  const F& f_;
  std::map<std::vector<std::uint64_t>, T> cache_;
};

// One raw pass at step h. T is complex or cmat.
template <class T, class F>
struct RawJet {
  T value;
  std::vector<T> d, dbar;
  std::vector<std::vector<T>> dd;

  RawJet(Memo<T, F>& f, std::span<const complex> point, std::span<const int> dirs, double h) {
    const int m = (int)dirs.size();
    std::vector<complex> p(point.begin(), point.end());
    value = f.at(p);

    // f(p +- h e_k), f(p +- ih e_k) for every direction.
    std::vector<std::array<T, 4>> ring(m);
    for (int k = 0; k < m; ++k) {
      ring[k] = {probe(f, p, dirs[k], complex(h, 0)), probe(f, p, dirs[k], complex(-h, 0)),
                 probe(f, p, dirs[k], complex(0, h)), probe(f, p, dirs[k], complex(0, -h))};
    }

    d.resize(m);
    dbar.resize(m);
    const complex iu(0, 1);
    for (int k = 0; k < m; ++k) {
      T re_part = (ring[k][0] - ring[k][1]);
      T im_part = (ring[k][2] - ring[k][3]);
      d[k] = (re_part - iu * im_part) / (4 * h);
      dbar[k] = (re_part + iu * im_part) / (4 * h);
    }

    dd.assign(m, std::vector<T>(m));
    for (int a = 0; a < m; ++a) {
      // i == j: quarter Laplacian from the first-order ring.
      dd[a][a] = (ring[a][0] + ring[a][1] + ring[a][2] + ring[a][3] - 4.0 * value) / (4 * h * h);
      for (int b = 0; b < m; ++b) {
        if (a == b) continue;
        // d_a applied to the dbar_b stencil: 16 offset points.
        static const complex steps[4] = {complex(1, 0), complex(-1, 0), complex(0, 1),
                                         complex(0, -1)};
        static const complex cd[4] = {complex(1, 0), complex(-1, 0), complex(0, -1),
                                      complex(0, 1)};  // coefficients of the d stencil
        static const complex cdb[4] = {complex(1, 0), complex(-1, 0), complex(0, 1),
                                       complex(0, -1)};  // coefficients of the dbar stencil
        T acc{};
        bool first = true;
        for (int s = 0; s < 4; ++s)
          for (int t = 0; t < 4; ++t) {
            std::vector<complex> q = p;
            q[dirs[a]] += h * steps[s];
            q[dirs[b]] += h * steps[t];
            T term = (cd[s] * cdb[t]) * f.at(q);
            if (first) {
              acc = term;
              first = false;
            } else {
              acc = acc + term;
            }
          }
        dd[a][b] = acc / (16 * h * h);
      }
    }
  }

 private:
  static T probe(Memo<T, F>& f, const std::vector<complex>& p, int slot, complex offset) {
    std::vector<complex> q = p;
    q[slot] += offset;
    return f.at(q);
  }
};

template <class T, class F, class Jet>
void jet_impl(const F& f, std::span<const complex> point, std::span<const int> dirs, double h,
              Jet& out) {
  for (int slot : dirs)
    if (slot < 0 || slot >= (int)point.size())
      throw error(errkind::input, "jet2: direction slot outside the point");
  if (h <= 0) h = default_step(point);

  Memo<T, F> memo(f);
  RawJet<T, F> coarse(memo, point, dirs, h);
  RawJet<T, F> fine(memo, point, dirs, h / 2);

  const int m = (int)dirs.size();
  out.value = coarse.value;
  out.d.resize(m);
  out.dbar.resize(m);
  out.dd.assign(m, std::vector<T>(m));
  double err = 0;
  auto fuse = [&err](const T& c, const T& f2) {
    err = std::max(err, absmax(c - f2));
    return (4.0 * f2 - c) / 3.0;
  };
  for (int k = 0; k < m; ++k) {
    out.d[k] = fuse(coarse.d[k], fine.d[k]);
    out.dbar[k] = fuse(coarse.dbar[k], fine.dbar[k]);
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) out.dd[a][b] = fuse(coarse.dd[a][b], fine.dd[a][b]);
  out.est_error = err;
}

}  // namespace

std::pair<varfam, int> VarLayout::var_of(int slot) const {
  if (slot < nz) return {varfam::base, slot + 1};
  if (slot < nz + nw) return {varfam::chart, slot - nz + 1};
  return {varfam::homog, slot - nz - nw};
}

ScalarField make_field(ExprPtr e, VarLayout lay) {
  return [e, lay](std::span<const complex> p) { return eval_scalar(e, lay.bind(p)); };
}

cmat Jet2::dd_matrix() const {
  int m = (int)dd.size();
  cmat out(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) out(a, b) = dd[a][b];
  return out;
}

double default_step(std::span<const complex> point) {
  // With the Richardson pair the truncation is O(h^4); 5e-4 keeps the
  // subtractive rounding of the composed second-derivative stencils near
  // 2e-9 while the extrapolated truncation stays below that.
  double mag = 0;
  for (complex c : point) mag = std::max(mag, std::abs(c));
  return 5e-4 * std::max(1.0, mag);
}

Jet2 jet2(const ScalarField& f, std::span<const complex> point, std::span<const int> dirs,
          double h) {
  Jet2 out;
  jet_impl<complex>(f, point, dirs, h, out);
  return out;
}

MatrixJet2 matrix_jet2(const MatrixField& f, std::span<const complex> point,
                       std::span<const int> dirs, double h) {
  MatrixJet2 out;
  jet_impl<cmat>(f, point, dirs, h, out);
  return out;
}

JetCheckReport jet_check(const ExprPtr& e, VarLayout lay, std::span<const complex> point,
                         std::span<const int> dirs, double h) {
  if (h <= 0) h = default_step(point);
  ScalarField f = make_field(e, lay);
  Jet2 coarse = jet2(f, point, dirs, h);
  Jet2 fine = jet2(f, point, dirs, h / 2);

  JetCheckReport rep;
  rep.est_error = std::max(coarse.est_error, fine.est_error);
  double dis = 0;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    dis = std::max(dis, std::abs(coarse.d[k] - fine.d[k]));
    dis = std::max(dis, std::abs(coarse.dbar[k] - fine.dbar[k]));
  }
  for (std::size_t a = 0; a < dirs.size(); ++a)
    for (std::size_t b = 0; b < dirs.size(); ++b)
      dis = std::max(dis, std::abs(coarse.dd[a][b] - fine.dd[a][b]));
  rep.fd_disagreement = dis;

  try {
    double ad_dis = 0;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      auto [fam, index] = lay.var_of(dirs[k]);
      WDual w = eval_wdual(e, lay.bind(point), fam, index);
      ad_dis = std::max(ad_dis, std::abs(w.dz - fine.d[k]));
      ad_dis = std::max(ad_dis, std::abs(w.dzb - fine.dbar[k]));
    }
    rep.ad_disagreement = ad_dis;
    rep.ad_used = true;
  } catch (const error&) {
    rep.ad_used = false;  // non-smooth spot (e.g. abs2 hitting zero under pow)
  }

  double gate = 50 * std::max(rep.est_error, 1e-14);
  rep.flagged = rep.fd_disagreement > gate || (rep.ad_used && rep.ad_disagreement > gate);
  return rep;
}

}  // namespace curvlab
