#include "cgolab/cli_runner.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cgolab/carleman.hpp"
#include "cgolab/cgo.hpp"
#include "cgolab/io.hpp"
#include "cgolab/pde.hpp"

namespace cgolab {

namespace {

struct CliContext {
  json config;
  std::string out_dir;
  int threads = 1;
  std::uint64_t seed = 1;
};

std::string csv_cell(double v) { return fmt_g17(v); }

void write_json(const CliContext& ctx, const std::string& name, const json& j) {
  write_text_file(ctx.out_dir + "/" + name, j.dump(2) + "\n");
}

int run_weight_check(const CliContext& ctx) {
  const Domain dom = parse_domain(ctx.config.at("domain"));
  const CarlemanWeight w = parse_weight(ctx.config.at("weight"));
  const int samples = ctx.config.value("samples", 10000);
  const double tol = ctx.config.value("tol", 1e-8);
  Rng rng(ctx.seed);
  const LimitingReport rep = check_limiting(w, dom, samples, tol, rng);
  json j;
  j["weight_kind"] = rep.weight_kind;
  j["samples"] = rep.samples;
  j["max_bracket"] = rep.max_bracket;
  j["tol"] = rep.tol;
  j["pass"] = rep.pass;
  write_json(ctx, "weight_check.json", j);
  return rep.pass ? 0 : 1;
}

int run_phase_check(const CliContext& ctx) {
  const Domain dom = parse_domain(ctx.config.at("domain"));
  const PhaseFamily fam = parse_phase(ctx.config.at("phase"));
  const double tol = ctx.config.value("tol", 1e-10);
  const EikonalReport eik = verify_eikonal_pair(fam, dom, tol);

  Rng rng(ctx.seed);
  const int nsamp = ctx.config.value("rank_samples", 20);
  std::vector<Eigen::VectorXd> samples;
  for (int i = 0; i < nsamp; ++i) samples.push_back(rng.point_in_box(dom.lo(), dom.hi()));

  std::vector<Theta> thetas;
  if (ctx.config.contains("theta_grid"))
    thetas = make_theta_grid(parse_theta_grid(ctx.config.at("theta_grid"), fam.xtilde));
  else
    thetas.push_back(fam.theta());

  std::ostringstream csv;
  csv << "theta_id,eik_norm_res,eik_orth_res,rank_ny,rank_full,expected_ny,expected_full,"
         "injectivity_min_ratio\n";
  bool ranks_ok = true;
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    const RankReport rk = check_rank(thetas[t], samples);
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
    for (int i = 0; i + 1 < static_cast<int>(samples.size()); i += 2)
      pairs.emplace_back(samples[i], samples[i + 1]);
    const InjectivityReport inj = injectivity_probe(thetas[t], pairs);
    ranks_ok = ranks_ok && rk.min_rank_ny == rk.expected_ny && rk.min_rank_full == rk.expected_full;
    csv << t << "," << csv_cell(eik.max_norm_residual) << "," << csv_cell(eik.max_orth_residual)
        << "," << rk.min_rank_ny << "," << rk.min_rank_full << "," << rk.expected_ny << ","
        << rk.expected_full << "," << csv_cell(inj.min_ratio) << "\n";
  }
  write_text_file(ctx.out_dir + "/phase_report.csv", csv.str());
  json j;
  j["max_norm_residual"] = eik.max_norm_residual;
  j["max_orth_residual"] = eik.max_orth_residual;
  j["tol"] = tol;
  j["eikonal_pass"] = eik.pass;
  j["ranks_pass"] = ranks_ok;
  write_json(ctx, "phase_check.json", j);
  return (eik.pass && ranks_ok) ? 0 : 1;
}

int run_cgo_build(const CliContext& ctx) {
  const Domain dom = parse_domain(ctx.config.at("domain"));
  const PhaseFamily fam = parse_phase(ctx.config.at("phase"));
  const double h = ctx.config.at("h").get<double>();
  const int sigma = ctx.config.value("sign", std::string("+")) == "-" ? -1 : 1;
  const int tau = ctx.config.value("tau", -1);
  const Potential q = materialize(parse_potential(ctx.config.at("q")), dom);
  const LogSpherePhase phase(fam);
  const CGOSolution sol = build_cgo(dom, phase, sigma, tau, h, q);
  write_field_binary(ctx.out_dir + "/amplitude", sol.amplitude);
  write_field_binary(ctx.out_dir + "/remainder", sol.remainder);
  write_field_binary(ctx.out_dir + "/weighted", sol.weighted);
  json j;
  j["h"] = h;
  j["sign"] = sigma > 0 ? "+" : "-";
  j["tau"] = tau;
  j["theta"] = theta_to_json(fam.theta());
  j["grid"] = json::parse(domain_to_json(dom));
  j["layout"] = "row-major lattice order, little-endian float64, *_re/_im pairs";
  j["remainder_l2"] = sol.remainder_l2;
  j["remainder_constant"] = sol.remainder_constant;
  j["residual_rel"] = sol.residual_rel;
  j["grid_ok"] = sol.grid_ok;
  j["semiclassical_ok"] = sol.semiclassical_ok;
  write_json(ctx, "cgo_header.json", j);
  if (!sol.grid_ok)
    std::cerr << "warning: h < 5*max_spacing, the lattice under-resolves the oscillation\n";
  if (ctx.config.contains("tol") && sol.residual_rel > ctx.config.at("tol").get<double>()) return 1;
  return 0;
}

int run_carleman_sweep(const CliContext& ctx) {
  const Domain dom = parse_domain(ctx.config.at("domain"));
  const CarlemanWeight w = parse_weight(ctx.config.at("weight"));
  const Potential q = materialize(parse_potential(ctx.config.value("q", json{{"kind", "zero"}})), dom);
  std::vector<double> h_list;
  for (const auto& h : ctx.config.at("h_list")) h_list.push_back(h.get<double>());
  const int count = ctx.config.value("test_count", 20);
  Rng rng(ctx.seed);
  const std::vector<RealField> family = bump_test_family(dom, count, rng);

  std::ostringstream csv;
  csv << "h,test_id,lhs,rhs,ratio\n";
  for (double h : h_list)
    for (std::size_t t = 0; t < family.size(); ++t) {
      const InteriorEstimate est = interior_estimate_ratio(dom, w, q, h, family[t]);
      csv << csv_cell(h) << "," << t << "," << csv_cell(est.lhs) << "," << csv_cell(est.rhs) << ","
          << csv_cell(est.ratio) << "\n";
    }
  write_text_file(ctx.out_dir + "/carleman_sweep.csv", csv.str());

  const EstimateReport rep = constant_sweep(dom, w, q, h_list, family);
  json j;
  j["h_values"] = rep.h_values;
  j["constants"] = rep.constants;
  j["argmax_test"] = rep.argmax_test;
  j["test_count"] = rep.test_count;
  j["growth_flag"] = rep.growth_flag;
  write_json(ctx, "carleman_summary.json", j);
  return rep.growth_flag ? 1 : 0;
}

int run_dn_map(const CliContext& ctx) {
  const Domain dom = parse_domain(ctx.config.at("domain"));
  json j;
  DNMap<double> dn;
  if (ctx.config.contains("gamma")) {
    const ConductivityGen g = parse_conductivity(ctx.config.at("gamma"));
    const Conductivity gamma = materialize(g, dom);
    dn = assemble_dn(dom, gamma_to_q(dom, gamma));
    const DnRelationReport rel = dn_relation_check(dom, g);
    j["relation_residual"] = rel.residual;
  } else {
    const Potential q = materialize(parse_potential(ctx.config.at("q")), dom);
    dn = assemble_dn(dom, q);
  }
  const Eigen::Index m = dn.matrix.rows();
  write_binary_f64(ctx.out_dir + "/dn_matrix.f64", dn.matrix.data(),
                   static_cast<std::size_t>(m * m));
  const double asym = (dn.matrix - dn.matrix.transpose()).norm() / dn.matrix.norm();
  j["grid"] = json::parse(domain_to_json(dom));
  j["potential_hash"] = dn.potential_hash;
  j["rows"] = m;
  j["layout"] = "column-major float64, weighted-flux convention";
  std::vector<std::int64_t> idx(dn.nodes.begin(), dn.nodes.end());
  j["row_index"] = idx;
  j["col_index"] = idx;
  j["symmetry_rel"] = asym;
  write_json(ctx, "dn_header.json", j);
  if (m <= 200) {
    std::ostringstream csv;
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) {
        if (c) csv << ",";
        csv << csv_cell(dn.matrix(r, c));
      }
      csv << "\n";
    }
    write_text_file(ctx.out_dir + "/dn_matrix.csv", csv.str());
  }
  return asym <= 1e-8 ? 0 : 1;
}

int run_identity(const CliContext& ctx) {
  const Domain dom = parse_domain(ctx.config.at("domain"));
  const PhaseFamily fam = parse_phase(ctx.config.at("phase"));
  const Potential q1 = materialize(parse_potential(ctx.config.at("q1")), dom);
  const Potential q2 = materialize(parse_potential(ctx.config.at("q2")), dom);
  const double lambda = ctx.config.value("lambda", 0.5);
  std::vector<double> h_list;
  for (const auto& h : ctx.config.at("h_list")) h_list.push_back(h.get<double>());
  const double eps0 = ctx.config.value("eps0", -1.0);
  const double tol = ctx.config.value("tol", 1e-8);

  const IdentityRun run = orthogonality_run(dom, q1, q2, fam, lambda, h_list, eps0);

  std::ostringstream csv;
  csv << "theta_id,lambda,h,lhs_re,lhs_im,limit_re,limit_im,rhs_re,rhs_im,rhs_bound,"
         "minus_flux_abs,r1_l2,r2_l2\n";
  for (const auto& rec : run.records) {
    csv << 0 << "," << csv_cell(lambda) << "," << csv_cell(rec.h) << ","
        << csv_cell(rec.lhs.real()) << "," << csv_cell(rec.lhs.imag()) << ","
        << csv_cell(run.limit_integral.real()) << "," << csv_cell(run.limit_integral.imag()) << ","
        << csv_cell(rec.rhs_plus.real()) << "," << csv_cell(rec.rhs_plus.imag()) << ","
        << csv_cell(rec.rhs_bound) << "," << csv_cell(rec.minus_flux_abs) << ","
        << csv_cell(rec.r1_l2) << "," << csv_cell(rec.r2_l2) << "\n";
  }
  write_text_file(ctx.out_dir + "/identity_run.csv", csv.str());

  json j;
  j["manifest"] = ctx.config;
  j["eps0"] = run.eps0;
  j["limit_re"] = run.limit_integral.real();
  j["limit_im"] = run.limit_integral.imag();
  write_json(ctx, "identity_run.json", j);

  const double err_first = std::abs(run.records.front().lhs - run.limit_integral);
  const double err_last = std::abs(run.records.back().lhs - run.limit_integral);
  const double scale = std::max(1.0, std::abs(run.limit_integral));
  return (err_last <= std::max(err_first, tol * scale)) ? 0 : 1;
}

int run_discriminate(const CliContext& ctx) {
  const Domain dom = parse_domain(ctx.config.at("domain"));
  const Potential q1 = materialize(parse_potential(ctx.config.at("q1")), dom);
  const Potential q2 = materialize(parse_potential(ctx.config.at("q2")), dom);
  const Eigen::VectorXd xtilde = parse_vector(ctx.config.at("xtilde"));
  const std::vector<Theta> thetas =
      make_theta_grid(parse_theta_grid(ctx.config.at("theta_grid"), xtilde));
  std::vector<double> lambdas;
  for (const auto& l : ctx.config.at("lambda_grid")) lambdas.push_back(l.get<double>());
  const double threshold = ctx.config.value("threshold", -1.0);

  const Discrimination disc = discriminate(dom, q1, q2, thetas, lambdas, threshold, ctx.threads);

  std::ostringstream csv;
  csv << "theta_id,lambda,value\n";
  for (std::size_t t = 0; t < thetas.size(); ++t)
    for (std::size_t l = 0; l < lambdas.size(); ++l)
      csv << t << "," << csv_cell(lambdas[l]) << ","
          << csv_cell(disc.values[t * lambdas.size() + l]) << "\n";
  write_text_file(ctx.out_dir + "/discriminate.csv", csv.str());

  json j;
  j["max_value"] = disc.max_value;
  j["noise_floor"] = disc.noise_floor;
  j["threshold"] = disc.threshold;
  j["verdict"] = disc.degenerate_config ? "degenerate"
                 : disc.distinct        ? "distinct"
                                        : "indistinguishable at this resolution";
  j["argmax_theta"] = disc.argmax_theta;
  j["argmax_lambda"] = disc.argmax_lambda;
  write_json(ctx, "discriminate.json", j);
  return 0;
}

int run_reflect_demo(const CliContext& ctx) {
  const Domain dom = parse_domain(ctx.config.at("domain"));
  const PhaseFamily fam = parse_phase(ctx.config.at("phase"));
  const Potential q1 = materialize(parse_potential(ctx.config.at("q1")), dom);
  const Potential q2 = materialize(parse_potential(ctx.config.at("q2")), dom);
  const double lambda = ctx.config.value("lambda", 0.5);
  std::vector<double> h_list;
  for (const auto& h : ctx.config.at("h_list")) h_list.push_back(h.get<double>());
  const double eps0 = ctx.config.value("eps0", -1.0);
  const WMinusSpec wm = parse_wminus(ctx.config.value("w_minus", json::object()));
  const double cw = ctx.config.value("collar_width", 0.25);

  const PartialIdentityRun run =
      partial_identity_run(dom, q1, q2, fam, lambda, h_list, eps0, wm, cw);
  const BoundaryPartition part = partition_signed(dom, fam.weight, run.eps0);
  const ReflectedPhase refl = reflected_phase(dom, fam, -1, part, cw, wm);

  std::ostringstream csv;
  csv << "theta_id,lambda,h,lhs_re,lhs_im,limit_re,limit_im,rhs_re,rhs_im,rhs_bound,"
         "minus_flux_abs,r1_l2,r2_l2,reflected_term_re,reflected_term_im,trace_residual\n";
  for (const auto& rec : run.records) {
    csv << 0 << "," << csv_cell(lambda) << "," << csv_cell(rec.base.h) << ","
        << csv_cell(rec.base.lhs.real()) << "," << csv_cell(rec.base.lhs.imag()) << ","
        << csv_cell(run.limit_integral.real()) << "," << csv_cell(run.limit_integral.imag()) << ","
        << csv_cell(rec.base.rhs_plus.real()) << "," << csv_cell(rec.base.rhs_plus.imag()) << ","
        << csv_cell(rec.base.rhs_bound) << "," << csv_cell(rec.base.minus_flux_abs) << ","
        << csv_cell(rec.base.r1_l2) << "," << csv_cell(rec.base.r2_l2) << ","
        << csv_cell(rec.reflected_term.real()) << "," << csv_cell(rec.reflected_term.imag()) << ","
        << csv_cell(rec.trace_residual) << "\n";
  }
  write_text_file(ctx.out_dir + "/reflect_demo.csv", csv.str());

  json j;
  j["c_emp"] = refl.c_emp;
  j["c_ref"] = refl.c_ref;
  j["eikonal_defect_c"] = refl.eikonal_defect_c;
  j["limit_re"] = run.limit_integral.real();
  j["limit_im"] = run.limit_integral.imag();
  j["eps0"] = run.eps0;
  write_json(ctx, "reflect_demo.json", j);

  bool pass = refl.c_emp >= refl.c_ref && refl.c_emp > 0.0;
  for (const auto& rec : run.records) pass = pass && rec.trace_residual <= 1e-6;
  for (std::size_t i = 0; i + 1 < run.records.size(); ++i)
    pass = pass &&
           std::abs(run.records[i + 1].reflected_term) <= std::abs(run.records[i].reflected_term);
  return pass ? 0 : 1;
}

}  // namespace

int cli_run(const std::vector<std::string>& args) {
  CLI::App app{"cgolab: desk-scale experiments for partial-data CGO constructions"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  int threads = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;

  const std::vector<std::string> names = {"weight-check", "phase-check",    "cgo-build",
                                          "carleman-sweep", "dn-map",       "identity-run",
                                          "discriminate",   "reflect-demo"};
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path)->required();
    sub->add_option("--out", out_dir);
    sub->add_option("--threads", threads);
    sub->add_option("--seed", seed)->each([&](const std::string&) { seed_set = true; });
  }

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  CliContext ctx;
  try {
    std::ifstream is(config_path);
    if (!is) throw std::runtime_error("cannot open config: " + config_path);
    is >> ctx.config;
    ctx.out_dir = out_dir;
    std::filesystem::create_directories(out_dir);
    ctx.threads = threads;
    ctx.seed = seed_set ? seed : ctx.config.value("seed", 1ULL);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "weight-check") return run_weight_check(ctx);
    if (cmd == "phase-check") return run_phase_check(ctx);
    if (cmd == "cgo-build") return run_cgo_build(ctx);
    if (cmd == "carleman-sweep") return run_carleman_sweep(ctx);
    if (cmd == "dn-map") return run_dn_map(ctx);
    if (cmd == "identity-run") return run_identity(ctx);
    if (cmd == "discriminate") return run_discriminate(ctx);
    if (cmd == "reflect-demo") return run_reflect_demo(ctx);
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "unknown command\n";
  return 2;
}

}  // namespace cgolab
