#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cgolab/field.hpp"
#include "cgolab/geometry.hpp"
#include "cgolab/identity.hpp"
#include "cgolab/phases.hpp"
#include "cgolab/potential.hpp"
#include "cgolab/reflection.hpp"
#include "cgolab/weights.hpp"

namespace cgolab {

using json = nlohmann::json;

// all floating-point output goes through this so seeded runs are byte-stable
std::string fmt_g17(double v);

void write_text_file(const std::string& path, const std::string& content);
void write_binary_f64(const std::string& path, const double* data, std::size_t count);
void write_field_binary(const std::string& path_prefix, const ComplexField& f);
void write_field_binary(const std::string& path_prefix, const RealField& f);

Eigen::VectorXd parse_vector(const json& j);
Domain parse_domain(const json& j);
CarlemanWeight parse_weight(const json& j);
PotentialGen parse_potential(const json& j);
ConductivityGen parse_conductivity(const json& j);
PhaseFamily parse_phase(const json& j);
ThetaGridSpec parse_theta_grid(const json& j, const Eigen::VectorXd& xtilde_base);
WMinusSpec parse_wminus(const json& j);

json theta_to_json(const Theta& t);

}  // namespace cgolab
