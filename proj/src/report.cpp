#include "curvlab/report.hpp"

#include <cmath>
#include <cstdio>

namespace curvlab {

jval jval::of_cmat(const cmat& m) {
  jval rows = array();
  for (Eigen::Index a = 0; a < m.rows(); ++a) {
    jval row = array();
    for (Eigen::Index b = 0; b < m.cols(); ++b) row.push(of_complex(m(a, b)));
    rows.push(std::move(row));
  }
  return rows;
}

jval& jval::set(const std::string& key, jval v) {
  if (kind_ != kind::object) throw error(errkind::input, "jval::set on a non-object");
  for (auto& kv : obj_)
    if (kv.first == key) {
      kv.second = std::move(v);
      return *this;
    }
  obj_.emplace_back(key, std::move(v));
  return *this;
}

jval& jval::push(jval v) {
  if (kind_ != kind::array) throw error(errkind::input, "jval::push on a non-array");
  arr_.push_back(std::move(v));
  return *this;
}

namespace {

void escape(const std::string& s, std::string& out) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if ((unsigned char)c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void print_number(double v, std::string& out) {
  if (!std::isfinite(v)) {
    out += v > 0 ? "\"inf\"" : (v < 0 ? "\"-inf\"" : "\"nan\"");
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

void jval::dump_rec(std::string& out, int indent, int depth) const {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append((std::size_t)indent * d, ' ');
  };
  switch (kind_) {
    case kind::null: out += "null"; return;
    case kind::boolean: out += bool_ ? "true" : "false"; return;
    case kind::number: print_number(num_, out); return;
    case kind::integer: {
      char buf[24];
      std::snprintf(buf, sizeof buf, "%lld", (long long)int_);
      out += buf;
      return;
    }
    case kind::string: escape(str_, out); return;
    case kind::array: {
      if (arr_.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      for (std::size_t k = 0; k < arr_.size(); ++k) {
        if (k) out += ',';
        newline(depth + 1);
        arr_[k].dump_rec(out, indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case kind::object: {
      if (obj_.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      for (std::size_t k = 0; k < obj_.size(); ++k) {
        if (k) out += ',';
        newline(depth + 1);
        escape(obj_[k].first, out);
        out += indent < 0 ? ":" : ": ";
        obj_[k].second.dump_rec(out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
  }
}

std::string jval::dump(int indent) const {
  std::string out;
  dump_rec(out, indent, 0);
  return out;
}

jval report_envelope(const std::string& analysis, const std::string& scene_name,
                     const std::string& scene_digest, int resolution, double tol, int chart,
                     std::uint64_t seed, bool raw_measure) {
  jval tool = jval::object();
  tool.set("name", "curvlab");
  tool.set("version", kVersion);

  jval params = jval::object();
  params.set("resolution", resolution);
  params.set("tol", tol);
  params.set("chart", chart);
  params.set("seed", (std::int64_t)seed);
  params.set("raw_measure", raw_measure);

  jval conventions = jval::object();
  conventions.set("fiber_measure", "((i/2pi) ddbar_w phi)^r: unit mass for the trivial weight");
  conventions.set("l2_moment_factor", "rank (= r+1): l2 of an induced weight is H * volume / rank");
  conventions.set("pushforward_constant", "rank (= r+1) under the unit-mass measure");
  conventions.set("lelong_convention", "nu(c log|z|^2) = c");
  conventions.set("positivity_tolerance", "absolute on eigenvalues after max-entry normalization");

  jval root = jval::object();
  root.set("tool", std::move(tool));
  root.set("scene", jval::object().set("name", scene_name).set("digest", scene_digest));
  root.set("analysis", analysis);
  root.set("params", std::move(params));
  root.set("conventions", std::move(conventions));
  root.set("warnings", jval::array());
  return root;
}

}  // namespace curvlab
