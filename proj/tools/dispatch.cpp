#include "dispatch.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "relscat/error.hpp"
#include "relscat/inverse.hpp"
#include "relscat/serialize.hpp"
#include "relscat/verify.hpp"
#include "relscat/xray.hpp"

namespace relscat::cli {

namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorKind::Validation, p.string() + ": cannot write artifact");
  out << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Validation, "/run/table: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

AmplitudeConvention convention(const ConfigDoc& cfg) {
  if (!cfg.run.measure_convention) return AmplitudeConvention{};
  return measure_convention();
}

AmplitudeTable build_table(const ConfigDoc& cfg, const AmplitudeConvention& conv) {
  auto g = SphereGrid::product(cfg.grid.sphere_polar, cfg.grid.sphere_azimuth);
  TableOptions to;
  to.farfield.born.grid = VolumeGrid(cfg.grid.N, cfg.grid.L);
  to.farfield.born.source_radius = cfg.run.source_radius;
  return amplitude_table(cfg.potential, cfg.energy, g, g, cfg.run.born_order, conv, to);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << round12(x);
  return os.str();
}

int forward(const ConfigDoc& cfg, const fs::path& out, Provenance& prov) {
  prov.convention = convention(cfg);
  auto t = build_table(cfg, prov.convention);
  write(out / "table.json", table_json(t, prov));
  write(out / "table.csv", table_csv(t, prov));
  for (const auto& e : t.column_errors)
    if (!e.empty()) return 3;
  return 0;
}

int invert(const ConfigDoc& cfg, const fs::path& out, Provenance& prov) {
  AmplitudeTable t;
  if (!cfg.run.table.empty()) {
    t = table_from_json(slurp(cfg.run.table), &prov.convention);
  } else {
    prov.convention = convention(cfg);
    t = build_table(cfg, prov.convention);
  }
  StripOptions so;
  so.ball.bin_factor = cfg.run.bin_factor;
  so.lmax = cfg.grid.L_max;
  auto r = layer_strip(t, cfg.run.strip_stages, so);
  write(out / "layers.json", layers_json(r, prov));
  if (r.layers.empty() && !r.smooth_remainder) {
    std::cerr << "relscat invert: " << r.diagnostic << "\n";
    return 3;
  }
  return 0;
}

int xray(const ConfigDoc& cfg, const fs::path& out, Provenance& prov, uint64_t seed) {
  const auto& x = cfg.run.xray;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  auto unit = [&] { return Vec3(n(rng), n(rng), n(rng)).normalized(); };

  std::ostringstream lines;
  lines << csv_header(prov) << "pair,r,theta_x,theta_y,theta_z,w_x,w_y,w_z,integral,error,scaled,geodesic\n";
  const HomLayer* lead = cfg.potential.layers.empty() ? nullptr : &cfg.potential.layers.front();
  for (int k = 0; k < x.pairs; ++k) {
    Vec3 th = unit();
    Vec3 w = unit();
    w = (w - w.dot(th) * th).normalized();
    double geo = lead ? weighted_geodesic(lead->angular, lead->order, th, w) : 0.0;
    for (double r : x.radii) {
      auto li = line_integral(cfg.potential, {th, r * w});
      double scaled = lead ? li.value * std::pow(r, lead->order - 1) : li.value;
      lines << k << ',' << fmt(r) << ',' << fmt(th.x()) << ',' << fmt(th.y()) << ',' << fmt(th.z()) << ','
            << fmt(w.x()) << ',' << fmt(w.y()) << ',' << fmt(w.z()) << ',' << fmt(li.value) << ',' << fmt(li.error)
            << ',' << fmt(scaled) << ',' << fmt(geo) << '\n';
    }
  }
  write(out / "xray_lines.csv", lines.str());

  FbpOptions fo;
  fo.angles = x.angles;
  auto rec = plane_radon_invert(cfg.potential, {Vec3(0, 0, 1), x.plane_distance}, x.resolution, fo);
  for (auto [name, m] : {std::pair{"xray_plane_recon.csv", &rec.recon}, {"xray_plane_direct.csv", &rec.direct}}) {
    std::ostringstream os;
    os << csv_header(prov) << "# plane z = " << fmt(x.plane_distance) << ", patch radius " << fmt(rec.patch_radius)
       << ", relative L2 error " << fmt(rec.rel_error) << "\nu\\v";
    for (double c : rec.coords) os << ',' << fmt(c);
    os << '\n';
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      os << fmt(rec.coords[size_t(i)]);
      for (Eigen::Index j = 0; j < m->cols(); ++j) os << ',' << (std::isfinite((*m)(i, j)) ? fmt((*m)(i, j)) : "");
      os << '\n';
    }
    write(out / name, os.str());
  }
  return 0;
}

int smatrix(const ConfigDoc& cfg, const fs::path& out, Provenance& prov) {
  prov.convention = convention(cfg);
  auto t = build_table(cfg, prov.convention);
  auto h = sh_synthesize(cfg.run.smatrix_h, t.inc);
  auto sh = apply_smatrix(t, h);
  std::ostringstream os;
  os << csv_header(prov) << "x,y,z,h_re,h_im,sh_re,sh_im\n";
  for (size_t i = 0; i < h.size(); ++i) {
    const Vec3& d = t.inc->node(i);
    os << fmt(d.x()) << ',' << fmt(d.y()) << ',' << fmt(d.z()) << ',' << fmt(h.values[i].real()) << ','
       << fmt(h.values[i].imag()) << ',' << fmt(sh.values[i].real()) << ',' << fmt(sh.values[i].imag()) << '\n';
  }
  write(out / "smatrix.csv", os.str());
  return 0;
}

int verify(const ConfigDoc& cfg, const fs::path& out, Provenance& prov, uint64_t seed) {
  VerifyOptions vo;
  vo.grid = VolumeGrid(cfg.run.verify_grid_n, cfg.run.verify_grid_L);
  vo.seed = seed;
  vo.convention = prov.convention = convention(cfg);
  auto rep = run_verify(vo);
  write(out / "verify.json", verify_json(rep, prov));
  std::string s = rep.summary();
  write(out / "verify.txt", s);
  std::cout << s;
  return rep.exit_code();
}

}  // namespace

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation:
    case ErrorKind::Structural: return 2;
    case ErrorKind::Inconclusive: return 4;
    default: return 3;
  }
}

int dispatch(const std::string& command, const ConfigDoc& cfg, const RunContext& ctx) {
  fs::path out(ctx.out_dir);
  Provenance prov;
  prov.command = command;
  prov.config_hash = cfg.hash;
  try {
    fs::create_directories(out);
    if (command == "forward") return forward(cfg, out, prov);
    if (command == "invert") return invert(cfg, out, prov);
    if (command == "xray") return xray(cfg, out, prov, ctx.seed);
    if (command == "smatrix") return smatrix(cfg, out, prov);
    if (command == "verify") return verify(cfg, out, prov, ctx.seed);
    fail(ErrorKind::Validation, "unknown command " + command);
  } catch (const Error& e) {
    std::cerr << "relscat " << command << ": " << to_string(e.kind()) << ": " << e.what() << "\n";
    try {
      write(out / "error.json", error_json(e, prov));
    } catch (const Error&) {
    }
    return exit_code(e.kind());
  }
}

}  // namespace relscat::cli
