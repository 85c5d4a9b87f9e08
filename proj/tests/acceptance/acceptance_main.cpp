// One [PASS]/[FAIL] line per acceptance criterion. Pass criterion numbers as
// arguments to run a subset.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <sstream>

#include "dispatch.hpp"
#include "relscat/config.hpp"
#include "relscat/error.hpp"
#include "relscat/inverse.hpp"
#include "relscat/verify.hpp"
#include "relscat/xray.hpp"

using namespace relscat;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path workdir() {
  static fs::path p = [] {
    auto d = fs::temp_directory_path() / ("relscat_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return p;
}

const AmplitudeConvention& convention() {
  static AmplitudeConvention c = measure_convention();
  return c;
}

HomLayer layer(double m, std::vector<std::tuple<int, int, double>> coefs, int lmax = 2) {
  HomLayer L;
  L.order = m;
  L.angular = ShExpansion(lmax);
  for (auto [l, mm, c] : coefs) L.angular.at(l, mm) = c;
  return L;
}

// v0 = 1 + 0.5 Re Y10 + 0.3 Re Y21
HomLayer leading() { return layer(3.5, {{0, 0, std::sqrt(4 * kPi)}, {1, 0, 0.5}, {2, 1, 0.15}, {2, -1, -0.15}}); }
HomLayer second() { return layer(4.5, {{0, 0, 0.6 * std::sqrt(4 * kPi)}, {2, 0, 0.4}}); }

double coef_error(const ShExpansion& got, const ShExpansion& want, int lmax) {
  double num = 0.0, den = 0.0;
  for (int l = 0; l <= lmax; ++l)
    for (int m = -l; m <= l; ++m) {
      num += std::norm(got.get(l, m) - want.get(l, m));
      den += std::norm(want.get(l, m));
    }
  return std::sqrt(num / den);
}

json sh_config(const ShExpansion& e) {
  json o = json::object();
  for (int l = 0; l <= e.lmax; ++l)
    for (int m = -l; m <= l; ++m)
      if (e.at(l, m) != cplx(0.0)) o[std::to_string(l) + "," + std::to_string(m)] = {e.at(l, m).real(), e.at(l, m).imag()};
  return o;
}

// -------- 1: free scattering matrix
Outcome free_matrix() {
  double worst = 0.0;
  for (auto [l, m] : {std::pair{0, 0}, {1, 0}, {2, 1}}) {
    ShExpansion h(l);
    h.at(l, m) = 1.0;
    worst = std::max(worst, free_matrix_farfield_error(1.0, h));
  }
  return {worst <= 0.01, "max relative L2 error " + sci(worst) + " (tol 1e-2)"};
}

// -------- 2: Born amplitude constant on a 256^3 grid
Outcome born_constant() {
  const auto& c = convention();
  PolyhomPotential v;
  Bump b{Vec3(0.3, -0.2, 0.4), 0.7, 0.1};
  v.bumps.push_back(b);
  double lambda = 3.0;
  Vec3 w(0, 0, 1);
  auto out = SphereGrid::product(12, 24);
  FarFieldAmplitudeOptions fo;
  fo.born.grid = VolumeGrid(256, 24.0);
  fo.born.order = 1;
  auto ff = amplitude_farfield(v, lambda, w, out, fo);
  // closed-form Gaussian transform, independent of the library's transform code
  double num = 0.0, den = 0.0, worst = 0.0;
  int used = 0;
  for (size_t i = 0; i < out->size(); ++i) {
    const Vec3& th = out->node(i);
    if (std::acos(std::clamp(th.dot(w), -1.0, 1.0)) < 10.0 * kPi / 180.0) continue;
    Vec3 xi = c.arg_sign * lambda * (th - w);
    cplx vhat = b.amplitude * std::pow(2 * kPi, 1.5) * std::pow(b.width, 3) *
                std::exp(-0.5 * b.width * b.width * xi.squaredNorm()) * std::polar(1.0, -xi.dot(b.center));
    cplx ref = c.constant * lambda * vhat;
    double wt = out->weight(i);
    num += wt * std::norm(ff.f.values[i] - ref);
    den += wt * std::norm(ref);
    worst = std::max(worst, std::abs(ff.f.values[i] - ref) / std::abs(ref));
    ++used;
  }
  double rel = std::sqrt(num / den);
  return {rel <= 0.02, "constant " + c.label + ", relative L2 " + sci(rel) + " over " + std::to_string(used) +
                           " directions (max pointwise " + sci(worst) + ", tol 2e-2)"};
}

// -------- 3: X-ray homogeneity and the Wallis oracle
Outcome xray_homogeneity() {
  std::mt19937 rng(42);
  std::normal_distribution<double> n;
  auto unit = [&] { return Vec3(n(rng), n(rng), n(rng)).normalized(); };
  double worst = 0.0;
  for (double m : {3.5, 4.0})
    for (bool tilt : {false, true}) {
      HomLayer L = tilt ? layer(m, {{0, 0, std::sqrt(4 * kPi)}, {1, 0, 0.5}}, 1) : layer(m, {{0, 0, std::sqrt(4 * kPi)}}, 0);
      PolyhomPotential v;
      v.layers.push_back(L);
      for (int k = 0; k < 20; ++k) {
        Vec3 th = unit(), w = unit();
        w = (w - w.dot(th) * th).normalized();
        double I = weighted_geodesic(L.angular, m, th, w);
        for (double r : {2.0, 4.0, 8.0})
          worst = std::max(worst, std::abs(line_integral(v, {th, r * w}).value * std::pow(r, m - 1) - I));
      }
    }
  ShExpansion one(0);
  one.at(0, 0) = std::sqrt(4 * kPi);
  // int_0^pi sin^2 = pi/2
  double wallis = std::abs(weighted_geodesic(one, 4.0, Vec3(0, 0, 1), Vec3(1, 0, 0)) - kPi / 2);
  return {worst <= 1e-6 && wallis <= 1e-8,
          "homogeneity max error " + sci(worst) + " (tol 1e-6), Wallis error " + sci(wallis) + " (tol 1e-8)"};
}

// -------- 4: plane FBP
Outcome plane_fbp() {
  PolyhomPotential v;
  v.layers = {leading(), second()};
  v.bumps.push_back({Vec3(0.3, -0.2, 1.6), 0.5, 0.8});
  auto r = plane_radon_invert(v, {Vec3(0, 0, 1), 2.0}, 256);
  return {r.rel_error <= 0.05, "relative L2 on the certified patch (radius " + sci(r.patch_radius) + ") " +
                                   sci(r.rel_error) + " (tol 5e-2)"};
}

// -------- 5: two-layer recovery, end to end through the command dispatcher
Outcome layer_recovery() {
  json cfg;
  cfg["energy"] = 2.0;
  cfg["potential"]["layers"] = json::array();
  for (const auto& L : {leading(), second()})
    cfg["potential"]["layers"].push_back({{"order", L.order}, {"sh_coefficients", sh_config(L.angular)}});
  cfg["grid"] = {{"sphere_polar", 26}, {"sphere_azimuth", 26}};
  auto fwd = workdir() / "c5_forward", inv = workdir() / "c5_invert";
  int rc = cli::dispatch("forward", parse_config(cfg.dump()), {fwd.string(), 1});
  if (rc != 0) return {false, "forward exited " + std::to_string(rc)};
  cfg["run"]["table"] = (fwd / "table.json").string();
  rc = cli::dispatch("invert", parse_config(cfg.dump()), {inv.string(), 1});
  if (rc != 0) return {false, "invert exited " + std::to_string(rc)};
  json r = json::parse(slurp(inv / "layers.json"));
  const auto& ls = r["layers"];
  if (ls.size() < 2) return {false, "recovered " + std::to_string(ls.size()) + " layers: " + r["diagnostic"].get<std::string>()};
  std::vector<ShExpansion> ang;
  std::vector<double> ord;
  for (int k = 0; k < 2; ++k) {
    ord.push_back(ls[k]["order"].get<double>());
    ShExpansion e(8);
    for (auto it = ls[k]["sh_coefficients"].begin(); it != ls[k]["sh_coefficients"].end(); ++it) {
      int l, m;
      std::sscanf(it.key().c_str(), "%d,%d", &l, &m);
      if (l <= 8) e.at(l, m) = cplx((*it)[0].get<double>(), (*it)[1].get<double>());
    }
    ang.push_back(e);
  }
  double d0 = std::abs(ord[0] - 3.5), d1 = std::abs(ord[1] - 4.5);
  double e0 = coef_error(ang[0], leading().angular, 2), e1 = coef_error(ang[1], second().angular, 2);
  bool ok = d0 <= 0.05 && d1 <= 0.1 && e0 <= 0.05 && e1 <= 0.10;
  return {ok, "orders " + std::to_string(ord[0]) + ", " + std::to_string(ord[1]) + "; angular (l <= 2) errors " +
                  sci(e0) + ", " + sci(e1)};
}

// -------- 6: smoothness dichotomy
Outcome smoothness() {
  PolyhomPotential base;
  base.layers.push_back(leading());
  PolyhomPotential bumped = base, layered = base;
  bumped.bumps.push_back({Vec3(0.2, 0.1, -0.3), 0.6, 0.5});
  layered.layers.push_back(second());
  auto out = SphereGrid::product(64, 128);
  auto inc = SphereGrid::points({Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0.3, 0.5, -0.8).normalized()});
  const auto& c = convention();
  auto t0 = amplitude_table(base, 2.0, inc, out, 1, c);
  auto sb = smoothness_test(amplitude_table(bumped, 2.0, inc, out, 1, c), t0);
  auto sl = smoothness_test(amplitude_table(layered, 2.0, inc, out, 1, c), t0);
  bool ok = sb.smooth && !sl.smooth && std::abs(sl.order - 4.5) <= 0.1;
  return {ok, std::string("bump ") + (sb.smooth ? "SMOOTH" : "SINGULAR") + ", extra layer " +
                  (sl.smooth ? "SMOOTH" : "SINGULAR order " + std::to_string(sl.order))};
}

// verify run shared by 7 and 9
struct VerifyRun {
  int rc = -1;
  json report;
};
const VerifyRun& verify_run() {
  static VerifyRun v = [] {
    VerifyRun r;
    auto dir = workdir() / "verify";
    std::ostringstream sink;
    auto* old = std::cout.rdbuf(sink.rdbuf());
    r.rc = cli::dispatch("verify", parse_config(R"({"energy": 1.0})"), {dir.string(), 1});
    std::cout.rdbuf(old);
    if (fs::exists(dir / "verify.json")) r.report = json::parse(slurp(dir / "verify.json"));
    return r;
  }();
  return v;
}

const json* find_check(const json& rep, const std::string& name) {
  for (const auto& c : rep["checks"])
    if (c["name"] == name) return &c;
  return nullptr;
}

// -------- 7: boundary pairing and shifted-resolvent sign
Outcome pairing() {
  const auto& v = verify_run();
  const json* bp = find_check(v.report, "boundary_pairing");
  const json* sr = find_check(v.report, "shifted_resolvent_sign");
  if (!bp || !sr) return {false, "verification artifact lacks the pairing checks"};
  bool ok = (*bp)["status"] == "pass" && (*sr)["status"] == "pass" && v.report["shifted_resolvent"]["sign"] != 0;
  return {ok, "pairing residual " + sci((*bp)["value"].get<double>()) + " (tol 2e-2); shifted-resolvent fit " +
                  sci((*sr)["value"].get<double>()) + ", recorded sign " +
                  std::to_string(v.report["shifted_resolvent"]["sign"].get<int>())};
}

// -------- 8: homogeneous multiplier
Outcome multiplier() {
  double closed = std::abs(hom_ft_multiplier(2.0, 0) - 2 * kPi * kPi);
  double worst = 0.0;
  // fit the windowed layer's radial transform at small rho to gamma rho^{a-3} + entire terms
  for (double a : {3.5, 4.5})
    for (int l : {0, 1, 2}) {
      HomLayer L = layer(a, {{l, 0, 1.0}}, l);
      std::vector<double> rhos;
      for (double r = 0.004; r <= 0.25; r *= 1.12) rhos.push_back(r);
      Eigen::MatrixXd A(rhos.size(), 4);
      Eigen::VectorXd b(rhos.size());
      for (size_t i = 0; i < rhos.size(); ++i) {
        double r = rhos[i];
        A(i, 0) = std::pow(r, a - 3);
        A(i, 1) = std::pow(r, l);
        A(i, 2) = std::pow(r, l + 2);
        A(i, 3) = std::pow(r, l + 4);
        b(i) = layer_radial_integral(L, l, r);
      }
      Eigen::VectorXd col = A.colwise().norm();
      Eigen::VectorXd sol = (A * col.asDiagonal().inverse()).colPivHouseholderQr().solve(b);
      double fitted = sol(0) / col(0) * 4 * kPi;
      cplx g = hom_ft_multiplier(a, l) / minus_i_pow(l);
      worst = std::max(worst, std::abs(fitted / g.real() - 1.0));
    }
  return {closed <= 1e-10 && worst <= 0.02,
          "closed form error " + sci(closed) + " (tol 1e-10), quadrature oracle max relative " + sci(worst) + " (tol 2e-2)"};
}

// -------- 9: invariant suites via verify
Outcome invariants() {
  const auto& v = verify_run();
  int passed = 0, total = 0;
  std::string failed;
  for (const auto& c : v.report["checks"]) {
    ++total;
    if (c["status"] == "pass")
      ++passed;
    else
      failed += " " + c["name"].get<std::string>();
  }
  bool ok = v.rc == 0 && total > 0 && passed == total;
  return {ok, "verify exit " + std::to_string(v.rc) + ", " + std::to_string(passed) + "/" + std::to_string(total) +
                  " checks" + (failed.empty() ? "" : ", failed:" + failed)};
}

}  // namespace

int main(int argc, char** argv) {
  std::map<int, std::pair<const char*, std::function<Outcome()>>> all{
      {1, {"free scattering matrix", free_matrix}},
      {2, {"Born amplitude constant (256^3)", born_constant}},
      {3, {"X-ray homogeneity", xray_homogeneity}},
      {4, {"plane FBP cross-check", plane_fbp}},
      {5, {"two-layer recovery", layer_recovery}},
      {6, {"smoothness dichotomy", smoothness}},
      {7, {"boundary pairing and shifted-resolvent sign", pairing}},
      {8, {"homogeneous multiplier", multiplier}},
      {9, {"invariant suites via verify", invariants}},
  };
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
  if (pick.empty())
    for (auto& [k, _] : all) pick.push_back(k);

  int failures = 0;
  for (int k : pick) {
    auto it = all.find(k);
    if (it == all.end()) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const Error& e) {
      o = {false, std::string(to_string(e.kind())) + ": " + e.what()};
    } catch (const std::exception& e) {
      o = {false, e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("[%s] criterion %d: %s: %s (%.0f s)\n", o.pass ? "PASS" : "FAIL", k, it->second.first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  fs::remove_all(workdir());
  return failures == 0 ? 0 : 1;
}
