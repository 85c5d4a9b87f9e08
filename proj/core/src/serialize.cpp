#include "relscat/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "relscat/config.hpp"

namespace relscat {

using nlohmann::json;

double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

namespace {

// NaN and infinities become null
json num(double x) { return std::isfinite(x) ? json(round12(x)) : json(nullptr); }
json cnum(cplx z) { return json::array({num(z.real()), num(z.imag())}); }

double get_num(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }
cplx get_cnum(const json& j) { return cplx(get_num(j.at(0)), get_num(j.at(1))); }

json envelope(const Provenance& p) {
  json e;
  e["command"] = p.command;
  e["config_hash"] = hex_hash(p.config_hash);
  e["convention"] = {{"constant", cnum(p.convention.constant)},
                     {"label", p.convention.label},
                     {"measured", p.convention.measured},
                     {"fitted", cnum(p.convention.fitted)},
                     {"fit_rel_error", num(p.convention.fit_rel_error)},
                     {"arg_sign", p.convention.arg_sign},
                     {"exponent_sign", p.convention.exponent_sign}};
  return e;
}

json grid_json(const GridPtr& g) {
  if (g->n_polar() > 0 && !g->is_rotated())
    return {{"kind", "product"}, {"n_polar", g->n_polar()}, {"n_azimuth", g->n_azimuth()}};
  json nodes = json::array();
  for (const auto& n : g->nodes()) nodes.push_back({num(n.x()), num(n.y()), num(n.z())});
  return {{"kind", "points"}, {"nodes", nodes}};
}

GridPtr grid_from(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "product") return SphereGrid::product(j.at("n_polar").get<int>(), j.at("n_azimuth").get<int>());
  if (kind != "points") fail(ErrorKind::Validation, "/grid/kind: unknown grid kind " + kind);
  std::vector<Vec3> pts;
  for (const auto& n : j.at("nodes")) pts.push_back(Vec3(n.at(0).get<double>(), n.at(1).get<double>(), n.at(2).get<double>()));
  return SphereGrid::points(std::move(pts));
}

json sh_json(const ShExpansion& e) {
  json o = json::object();
  for (int l = 0; l <= e.lmax; ++l)
    for (int m = -l; m <= l; ++m) o[std::to_string(l) + "," + std::to_string(m)] = cnum(e.at(l, m));
  return o;
}

std::string dump(const json& j) { return j.dump() + "\n"; }

}  // namespace

std::string table_json(const AmplitudeTable& t, const Provenance& p) {
  json j = envelope(p);
  j["lambda"] = num(t.lambda);
  j["provenance"] = t.provenance;
  j["constant"] = cnum(t.constant);
  j["arg_sign"] = t.arg_sign;
  j["out_grid"] = grid_json(t.out);
  j["inc_grid"] = grid_json(t.inc);
  json cols = json::array();
  for (Eigen::Index c = 0; c < t.values.cols(); ++c) {
    json col = json::array();
    for (Eigen::Index r = 0; r < t.values.rows(); ++r) col.push_back(cnum(t.values(r, c)));
    cols.push_back(col);
  }
  j["columns"] = cols;
  j["column_errors"] = t.column_errors;
  return dump(j);
}

AmplitudeTable table_from_json(const std::string& text, AmplitudeConvention* conv) {
  AmplitudeTable t;
  try {
    json j = json::parse(text);
    t.lambda = j.at("lambda").get<double>();
    t.provenance = j.at("provenance").get<std::string>();
    t.constant = get_cnum(j.at("constant"));
    t.arg_sign = j.at("arg_sign").get<int>();
    t.out = grid_from(j.at("out_grid"));
    t.inc = grid_from(j.at("inc_grid"));
    const json& cols = j.at("columns");
    if (cols.size() != t.inc->size()) fail(ErrorKind::Validation, "/columns: count differs from incident grid size");
    t.values.resize(Eigen::Index(t.out->size()), Eigen::Index(t.inc->size()));
    for (size_t c = 0; c < cols.size(); ++c) {
      if (cols[c].size() != t.out->size())
        fail(ErrorKind::Validation, "/columns/" + std::to_string(c) + ": length differs from outgoing grid size");
      for (size_t r = 0; r < cols[c].size(); ++r) t.values(Eigen::Index(r), Eigen::Index(c)) = get_cnum(cols[c][r]);
    }
    t.column_errors = j.value("column_errors", std::vector<std::string>{});
    if (conv && j.contains("convention")) {
      const json& c = j["convention"];
      conv->constant = get_cnum(c.at("constant"));
      conv->label = c.at("label").get<std::string>();
      conv->measured = c.at("measured").get<bool>();
      conv->fitted = get_cnum(c.at("fitted"));
      conv->fit_rel_error = get_num(c.at("fit_rel_error"));
      conv->arg_sign = c.at("arg_sign").get<int>();
      conv->exponent_sign = c.at("exponent_sign").get<int>();
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Validation, std::string("table artifact: ") + e.what());
  }
  return t;
}

std::string table_csv(const AmplitudeTable& t, const Provenance& p) {
  std::ostringstream os;
  os << csv_header(p) << "out_x,out_y,out_z,inc_x,inc_y,inc_z,re,im\n";
  os.precision(12);
  for (Eigen::Index c = 0; c < t.values.cols(); ++c)
    for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
      const Vec3 &o = t.out->node(size_t(r)), &i = t.inc->node(size_t(c));
      cplx z = t.values(r, c);
      os << o.x() << ',' << o.y() << ',' << o.z() << ',' << i.x() << ',' << i.y() << ',' << i.z() << ','
         << z.real() << ',' << z.imag() << '\n';
    }
  return os.str();
}

std::string layers_json(const StripResult& r, const Provenance& p) {
  json j = envelope(p);
  json ls = json::array();
  for (const auto& L : r.layers)
    ls.push_back({{"order", num(L.order)},
                  {"sh_coefficients", sh_json(L.angular)},
                  {"fit_residual", num(L.fit_residual)},
                  {"tail_order", num(L.tail_order)},
                  {"inconsistent", L.inconsistent},
                  {"unrecoverable", L.unrecoverable},
                  {"degree_used", L.degree_used}});
  j["layers"] = ls;
  j["smooth_remainder"] = r.smooth_remainder;
  j["diagnostic"] = r.diagnostic;
  return dump(j);
}

std::string verify_json(const VerifyReport& r, const Provenance& p) {
  json j = envelope(p);
  json cs = json::array();
  for (const auto& c : r.checks)
    cs.push_back({{"name", c.name},
                  {"statement", c.statement},
                  {"status", to_string(c.status)},
                  {"value", num(c.value)},
                  {"tolerance", num(c.tolerance)},
                  {"detail", c.detail}});
  j["checks"] = cs;
  j["shifted_resolvent"] = {{"ratio_plus", cnum(r.shifted_ratio)}, {"sign", r.shifted_sign}};
  j["exit_code"] = r.exit_code();
  return dump(j);
}

std::string error_json(const Error& e, const Provenance& p) {
  json j = envelope(p);
  j["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}, {"residual", num(e.residual())}};
  return dump(j);
}

std::string csv_header(const Provenance& p) {
  std::ostringstream os;
  os.precision(12);
  os << "# command=" << p.command << ", config_hash=" << hex_hash(p.config_hash) << ", convention=" << p.convention.label
     << " (" << p.convention.constant.real() << (p.convention.constant.imag() < 0 ? "" : "+")
     << p.convention.constant.imag() << "i)\n";
  return os.str();
}

}  // namespace relscat
