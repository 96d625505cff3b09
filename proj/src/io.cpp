#include "cgolab/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cgolab {

std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << content;
}

void write_binary_f64(const std::string& path, const double* data, std::size_t count) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

void write_field_binary(const std::string& path_prefix, const ComplexField& f) {
  RealField re(f.size()), im(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    re[i] = f[i].real();
    im[i] = f[i].imag();
  }
  write_binary_f64(path_prefix + "_re.f64", re.data(), re.size());
  write_binary_f64(path_prefix + "_im.f64", im.data(), im.size());
}

void write_field_binary(const std::string& path_prefix, const RealField& f) {
  write_binary_f64(path_prefix + ".f64", f.data(), f.size());
}

Eigen::VectorXd parse_vector(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("config: expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

Domain parse_domain(const json& j) {
  const int dim = j.at("dim").get<int>();
  const int n = j.at("points_per_axis").get<int>();
  std::vector<std::pair<double, double>> bounds;
  for (const auto& b : j.at("bounds")) bounds.emplace_back(b[0].get<double>(), b[1].get<double>());
  return build_box_domain(dim, bounds, n);
}

CarlemanWeight parse_weight(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") return linear_weight(parse_vector(j.at("alpha")));
  if (kind == "log") return log_weight(parse_vector(j.at("x0")));
  if (kind == "quadratic") return quadratic_weight(j.at("dim").get<int>());
  throw std::invalid_argument("config: unknown weight kind '" + kind + "'");
}

PotentialGen parse_potential(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") return PotentialGen::zero();
  if (kind == "constant") return PotentialGen::constant(j.at("value").get<double>());
  if (kind == "ball")
    return PotentialGen::ball_bump(parse_vector(j.at("center")), j.at("radius").get<double>(),
                                   j.at("height").get<double>());
  if (kind == "sum") {
    PotentialGen acc = PotentialGen::zero();
    for (const auto& t : j.at("terms")) acc = acc.plus(parse_potential(t));
    return acc;
  }
  throw std::invalid_argument("config: unknown potential kind '" + kind + "'");
}

ConductivityGen parse_conductivity(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  ConductivityGen g;
  if (kind == "one") {
    g.kind = ConductivityGen::Kind::One;
  } else if (kind == "exp_linear") {
    g.kind = ConductivityGen::Kind::ExpLinear;
    g.rate = j.at("rate").get<double>();
    g.axis = j.value("axis", 0);
  } else if (kind == "one_plus_bump") {
    g.kind = ConductivityGen::Kind::OnePlusBump;
    g.bump.kind = PotentialTerm::Kind::BallBump;
    g.bump.center = parse_vector(j.at("center"));
    g.bump.radius = j.at("radius").get<double>();
    g.bump.height = j.at("height").get<double>();
  } else {
    throw std::invalid_argument("config: unknown conductivity kind '" + kind + "'");
  }
  return g;
}

PhaseFamily parse_phase(const json& j) {
  const Eigen::VectorXd xtilde = parse_vector(j.at("xtilde"));
  Eigen::VectorXd y = parse_vector(j.at("y"));
  y.normalize();
  Eigen::VectorXd nu = parse_vector(j.at("nu"));
  nu -= nu.dot(y) * y;
  const double delta = j.value("delta", 0.05);
  return make_phase_family(xtilde, y, nu, delta);
}

ThetaGridSpec parse_theta_grid(const json& j, const Eigen::VectorXd& xtilde_base) {
  ThetaGridSpec spec;
  spec.y0 = parse_vector(j.at("y0"));
  spec.y0.normalize();
  spec.radius = j.value("radius", 0.15);
  spec.n_y = j.value("n_y", 3);
  spec.nu_count = j.value("nu_count", 3);
  spec.xtilde_base = xtilde_base;
  if (j.contains("xtilde_offsets"))
    for (const auto& o : j.at("xtilde_offsets")) spec.xtilde_offsets.push_back(parse_vector(o));
  else
    spec.xtilde_offsets.push_back(Eigen::VectorXd::Zero(xtilde_base.size()));
  spec.nu_scale = j.value("nu_scale", 0.5);
  if (j.contains("h_plane_normal"))
    spec.h_plane_normal = parse_vector(j.at("h_plane_normal"));
  else
    spec.h_plane_normal = Eigen::VectorXd::Unit(xtilde_base.size(), 0);
  spec.nu_cone = j.value("nu_cone", 0.2);
  return spec;
}

WMinusSpec parse_wminus(const json& j) {
  WMinusSpec wm;
  wm.face_axis = j.value("face_axis", 0);
  wm.face_side = j.value("face_side", 0);
  wm.fraction = j.value("fraction", 0.5);
  return wm;
}

json theta_to_json(const Theta& t) {
  json j;
  j["y"] = std::vector<double>(t.y.data(), t.y.data() + t.y.size());
  j["xtilde"] = std::vector<double>(t.xtilde.data(), t.xtilde.data() + t.xtilde.size());
  j["nu"] = std::vector<double>(t.nu.data(), t.nu.data() + t.nu.size());
  return j;
}

}  // namespace cgolab
