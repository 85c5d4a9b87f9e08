#include "relscat/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "relscat/error.hpp"

namespace relscat {

using nlohmann::json;

namespace {

[[noreturn]] void reject(const std::string& ptr, const std::string& why) {
  fail(ErrorKind::Validation, (ptr.empty() ? "/" : ptr) + ": " + why);
}

void only_keys(const json& j, const std::string& ptr, std::initializer_list<const char*> keys) {
  if (!j.is_object()) reject(ptr, "expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) reject(ptr + "/" + it.key(), "unknown field");
}

double number(const json& j, const std::string& ptr) {
  if (!j.is_number()) reject(ptr, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& ptr) {
  if (!j.is_number_integer()) reject(ptr, "expected an integer");
  return j.get<int>();
}

template <class T, class F>
T field(const json& parent, const std::string& ptr, const char* key, T dflt, F&& conv) {
  if (!parent.contains(key)) return dflt;
  return conv(parent.at(key), ptr + "/" + key);
}

std::vector<double> number_list(const json& j, const std::string& ptr) {
  if (!j.is_array()) reject(ptr, "expected an array of numbers");
  std::vector<double> out;
  for (size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], ptr + "/" + std::to_string(i)));
  return out;
}

// {"l,m": [re, im]} or {"l,m": re}
ShExpansion sh_coefficients(const json& j, const std::string& ptr) {
  if (!j.is_object()) reject(ptr, "expected an object keyed by \"l,m\"");
  int lmax = 0;
  std::vector<std::tuple<int, int, cplx>> entries;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string p = ptr + "/" + it.key();
    int l = 0, m = 0;
    char comma = 0;
    std::istringstream ss(it.key());
    if (!(ss >> l >> comma >> m) || comma != ',' || !ss.eof()) reject(p, "key must read \"l,m\"");
    if (l < 0 || std::abs(m) > l) reject(p, "needs l >= 0 and |m| <= l");
    cplx c;
    if (it->is_number()) {
      c = it->get<double>();
    } else if (it->is_array() && it->size() == 2) {
      c = cplx(number((*it)[0], p + "/0"), number((*it)[1], p + "/1"));
    } else {
      reject(p, "expected [re, im] or a number");
    }
    lmax = std::max(lmax, l);
    entries.emplace_back(l, m, c);
  }
  ShExpansion e(lmax);
  for (auto& [l, m, c] : entries) e.at(l, m) = c;
  return e;
}

json sh_to_json(const ShExpansion& e) {
  json o = json::object();
  for (int l = 0; l <= e.lmax; ++l)
    for (int m = -l; m <= l; ++m) {
      cplx c = e.at(l, m);
      if (c != cplx(0.0)) o[std::to_string(l) + "," + std::to_string(m)] = {c.real(), c.imag()};
    }
  return o;
}

Bump bump(const json& j, const std::string& ptr) {
  only_keys(j, ptr, {"center", "width", "amplitude"});
  Bump b;
  if (j.contains("center")) {
    auto c = number_list(j["center"], ptr + "/center");
    if (c.size() != 3) reject(ptr + "/center", "expected 3 components");
    b.center = Vec3(c[0], c[1], c[2]);
  }
  b.width = field(j, ptr, "width", 1.0, number);
  b.amplitude = field(j, ptr, "amplitude", 1.0, number);
  if (!(b.width > 0.0)) reject(ptr + "/width", "width > 0 required");
  return b;
}

}  // namespace

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex_hash(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

ConfigDoc parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Validation, std::string("/: not valid JSON: ") + e.what());
  }
  only_keys(j, "", {"energy", "potential", "grid", "run"});
  ConfigDoc d;
  if (!j.contains("energy")) reject("/energy", "required");
  d.energy = number(j["energy"], "/energy");
  if (!(d.energy > 0.0)) reject("/energy", "energy > 0 required");

  if (j.contains("potential")) {
    const json& p = j["potential"];
    only_keys(p, "/potential", {"layers", "remainder"});
    if (p.contains("layers")) {
      const json& ls = p["layers"];
      if (!ls.is_array()) reject("/potential/layers", "expected an array");
      for (size_t i = 0; i < ls.size(); ++i) {
        std::string ptr = "/potential/layers/" + std::to_string(i);
        only_keys(ls[i], ptr, {"order", "sh_coefficients", "r0", "delta"});
        HomLayer L;
        if (!ls[i].contains("order")) reject(ptr + "/order", "required");
        L.order = number(ls[i]["order"], ptr + "/order");
        if (!(L.order > 3.0)) reject(ptr + "/order", "order > 3 required");
        if (!ls[i].contains("sh_coefficients")) reject(ptr + "/sh_coefficients", "required");
        L.angular = sh_coefficients(ls[i]["sh_coefficients"], ptr + "/sh_coefficients");
        L.r0 = field(ls[i], ptr, "r0", 1.0, number);
        L.delta = field(ls[i], ptr, "delta", 0.25, number);
        d.potential.layers.push_back(L);
      }
    }
    if (p.contains("remainder")) {
      const json& r = p["remainder"];
      if (r.is_array()) {
        for (size_t i = 0; i < r.size(); ++i) d.potential.bumps.push_back(bump(r[i], "/potential/remainder/" + std::to_string(i)));
      } else {
        d.potential.bumps.push_back(bump(r, "/potential/remainder"));
      }
    }
    try {
      d.potential.validate();
    } catch (const Error& e) {
      reject("/potential", e.what());
    }
  }

  if (j.contains("grid")) {
    const json& g = j["grid"];
    only_keys(g, "/grid", {"N", "L", "sphere_polar", "sphere_azimuth", "L_max"});
    d.grid.N = field(g, "/grid", "N", d.grid.N, integer);
    d.grid.L = field(g, "/grid", "L", d.grid.L, number);
    d.grid.sphere_polar = field(g, "/grid", "sphere_polar", d.grid.sphere_polar, integer);
    d.grid.sphere_azimuth = field(g, "/grid", "sphere_azimuth", d.grid.sphere_azimuth, integer);
    d.grid.L_max = field(g, "/grid", "L_max", d.grid.L_max, integer);
  }
  if (d.grid.N < 8 || (d.grid.N & (d.grid.N - 1)) != 0) reject("/grid/N", "N must be a power of two >= 8");
  if (!(d.grid.L > 0.0)) reject("/grid/L", "L > 0 required");
  if (d.grid.sphere_polar < 2) reject("/grid/sphere_polar", "at least 2 nodes");
  if (d.grid.sphere_azimuth < 2 || d.grid.sphere_azimuth % 2) reject("/grid/sphere_azimuth", "even and >= 2 (antipodal closure)");
  if (d.grid.L_max < 0) reject("/grid/L_max", "L_max >= 0 required");

  d.run.smatrix_h = ShExpansion(0);
  d.run.smatrix_h.at(0, 0) = std::sqrt(4.0 * kPi);
  if (j.contains("run")) {
    const json& r = j["run"];
    only_keys(r, "/run", {"born_order", "bin_factor", "eps_schedule", "source_radius", "strip_stages", "table",
                          "measure_convention", "xray", "smatrix_h", "verify_grid_n", "verify_grid_L"});
    d.run.born_order = field(r, "/run", "born_order", d.run.born_order, integer);
    d.run.bin_factor = field(r, "/run", "bin_factor", d.run.bin_factor, number);
    d.run.eps_schedule = field(r, "/run", "eps_schedule", d.run.eps_schedule, number_list);
    d.run.source_radius = field(r, "/run", "source_radius", d.run.source_radius, number);
    d.run.strip_stages = field(r, "/run", "strip_stages", d.run.strip_stages, integer);
    if (r.contains("table")) {
      if (!r["table"].is_string()) reject("/run/table", "expected a path string");
      d.run.table = r["table"].get<std::string>();
    }
    if (r.contains("measure_convention")) {
      if (!r["measure_convention"].is_boolean()) reject("/run/measure_convention", "expected a boolean");
      d.run.measure_convention = r["measure_convention"].get<bool>();
    }
    if (r.contains("xray")) {
      const json& x = r["xray"];
      only_keys(x, "/run/xray", {"plane_distance", "resolution", "angles", "radii", "pairs"});
      auto& s = d.run.xray;
      s.plane_distance = field(x, "/run/xray", "plane_distance", s.plane_distance, number);
      s.resolution = field(x, "/run/xray", "resolution", s.resolution, integer);
      s.angles = field(x, "/run/xray", "angles", s.angles, integer);
      s.radii = field(x, "/run/xray", "radii", s.radii, number_list);
      s.pairs = field(x, "/run/xray", "pairs", s.pairs, integer);
      if (!(s.plane_distance > 0.0)) reject("/run/xray/plane_distance", "distance > 0 required");
      if (s.resolution < 8) reject("/run/xray/resolution", "resolution >= 8 required");
      if (s.angles < 4) reject("/run/xray/angles", "angles >= 4 required");
    }
    if (r.contains("smatrix_h")) d.run.smatrix_h = sh_coefficients(r["smatrix_h"], "/run/smatrix_h");
    d.run.verify_grid_n = field(r, "/run", "verify_grid_n", d.run.verify_grid_n, integer);
    d.run.verify_grid_L = field(r, "/run", "verify_grid_L", d.run.verify_grid_L, number);
  }
  if (d.run.born_order < 1) reject("/run/born_order", "Born order >= 1 required");
  if (!(d.run.bin_factor > 0.0)) reject("/run/bin_factor", "bin_factor > 0 required");
  if (d.run.eps_schedule.empty()) reject("/run/eps_schedule", "at least one value");
  for (size_t i = 0; i < d.run.eps_schedule.size(); ++i)
    if (!(d.run.eps_schedule[i] > 0.0)) reject("/run/eps_schedule/" + std::to_string(i), "epsilon > 0 required");
  if (d.run.strip_stages < 1) reject("/run/strip_stages", "at least one stage");
  int vn = d.run.verify_grid_n;
  if (vn < 8 || (vn & (vn - 1)) != 0) reject("/run/verify_grid_n", "must be a power of two >= 8");

  json c;
  c["energy"] = d.energy;
  json layers = json::array();
  for (const auto& L : d.potential.layers)
    layers.push_back({{"order", L.order}, {"sh_coefficients", sh_to_json(L.angular)}, {"r0", L.r0}, {"delta", L.delta}});
  json bumps = json::array();
  for (const auto& b : d.potential.bumps)
    bumps.push_back({{"center", {b.center.x(), b.center.y(), b.center.z()}}, {"width", b.width}, {"amplitude", b.amplitude}});
  c["potential"] = {{"layers", layers}, {"remainder", bumps}};
  c["grid"] = {{"N", d.grid.N}, {"L", d.grid.L}, {"sphere_polar", d.grid.sphere_polar},
               {"sphere_azimuth", d.grid.sphere_azimuth}, {"L_max", d.grid.L_max}};
  const auto& x = d.run.xray;
  c["run"] = {{"born_order", d.run.born_order},
              {"bin_factor", d.run.bin_factor},
              {"eps_schedule", d.run.eps_schedule},
              {"source_radius", d.run.source_radius},
              {"strip_stages", d.run.strip_stages},
              {"table", d.run.table},
              {"measure_convention", d.run.measure_convention},
              {"xray", {{"plane_distance", x.plane_distance}, {"resolution", x.resolution}, {"angles", x.angles},
                        {"radii", x.radii}, {"pairs", x.pairs}}},
              {"smatrix_h", sh_to_json(d.run.smatrix_h)},
              {"verify_grid_n", d.run.verify_grid_n},
              {"verify_grid_L", d.run.verify_grid_L}};
  d.canonical = c.dump();
  d.hash = fnv1a(d.canonical);
  return d;
}

ConfigDoc load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Validation, path + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace relscat
