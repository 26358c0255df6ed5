// Ordered JSON values with a deterministic serializer: doubles print with
// 17 significant digits, keys keep insertion order, no locale dependence.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "curvlab/types.hpp"

namespace curvlab {

class jval {
 public:
  jval() : kind_(kind::null) {}
  jval(bool b) : kind_(kind::boolean), bool_(b) {}
  jval(double v) : kind_(kind::number), num_(v) {}
  jval(int v) : kind_(kind::integer), int_(v) {}
  jval(std::int64_t v) : kind_(kind::integer), int_(v) {}
  jval(const char* s) : kind_(kind::string), str_(s) {}
  jval(std::string s) : kind_(kind::string), str_(std::move(s)) {}

  static jval object() {
    jval v;
    v.kind_ = kind::object;
    return v;
  }
  static jval array() {
    jval v;
    v.kind_ = kind::array;
    return v;
  }
  static jval of_complex(complex c) {
    jval v = array();
    v.push(jval(c.real()));
    v.push(jval(c.imag()));
    return v;
  }
  static jval of_cmat(const cmat& m);

  jval& set(const std::string& key, jval v);
  jval& push(jval v);

  std::string dump(int indent = 2) const;

 private:
  enum class kind { null, boolean, number, integer, string, array, object };
  void dump_rec(std::string& out, int indent, int depth) const;

  kind kind_;
  bool bool_ = false;
  double num_ = 0;
  std::int64_t int_ = 0;
  std::string str_;
  std::vector<jval> arr_;
  std::vector<std::pair<std::string, jval>> obj_;
};

// Common envelope: tool version, scene identity, analysis name, parameters
// and the measure/constant conventions every report carries.
jval report_envelope(const std::string& analysis, const std::string& scene_name,
                     const std::string& scene_digest, int resolution, double tol, int chart,
                     std::uint64_t seed, bool raw_measure);

}  // namespace curvlab
