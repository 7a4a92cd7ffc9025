// Command-line front end: kernel tabulation, lemma certification,
// identifiability analysis, simulation, and maximum-likelihood fitting.
//
// Exit codes: 0 success/pass, 1 verification failure or non-convergence,
// 2 usage error, 3 I/O error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "berkson/identify.hpp"
#include "berkson/io.hpp"
#include "berkson/kernel.hpp"
#include "berkson/model.hpp"
#include "berkson/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

std::vector<double> split_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<double> read_design_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> design;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && (line == "x0" || line == "x"))) continue;
    try {
      design.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw std::runtime_error("malformed design value at line " +
                               std::to_string(lineno));
    }
  }
  return design;
}

void emit(const std::string& content, const std::string& output_path) {
  if (output_path.empty())
    std::cout << content;
  else
    berkson::write_file(output_path, content);
}

int default_quad_order() {
  if (const char* env = std::getenv("BERKSON_QUAD_ORDER"))
    return std::max(16, std::atoi(env));
  return 64;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smoothed-logistic kernel, identifiability analysis, and "
               "Berkson-model estimation"};
  app.require_subcommand(1);

  int quad_order = default_quad_order();
  app.add_option("--quad-order", quad_order, "minimum quadrature node count");

  // tabulate
  auto* tab = app.add_subcommand("tabulate", "Tabulate L_k(x, v) as CSV");
  int tab_k = 0;
  double tab_v = 0.0, tab_xmin = -10.0, tab_xmax = 10.0, tab_step = 0.1;
  std::string tab_out;
  tab->add_option("--k", tab_k, "derivative order 0..4")->required();
  tab->add_option("--v", tab_v, "smoothing variance")->required();
  tab->add_option("--xmin", tab_xmin);
  tab->add_option("--xmax", tab_xmax);
  tab->add_option("--step", tab_step);
  tab->add_option("--output,-o", tab_out);

  // verify
  auto* ver = app.add_subcommand("verify", "Certify one analytic lemma");
  std::string ver_lemma, ver_out;
  std::uint64_t ver_seed = 20150707;
  int ver_draws = 200;
  ver->add_option("--lemma", ver_lemma,
                  "key-inequality | third-derivative | curvature-sign | aux-f")
      ->required();
  ver->add_option("--seed", ver_seed, "seed for curvature-sign draws");
  ver->add_option("--draws", ver_draws);
  ver->add_option("--output,-o", ver_out);

  // identify
  auto* ide = app.add_subcommand(
      "identify", "Classify a crossing equation or judge a design");
  std::string ide_left, ide_right, ide_window, ide_design, ide_out;
  bool ide_tau_known = false;
  ide->add_option("--left", ide_left, "b0,b1,s of the left curve");
  ide->add_option("--right", ide_right, "b0,b1,s of the right curve");
  ide->add_option("--window", ide_window, "A,B root search window");
  ide->add_option("--design", ide_design, "design file for a verdict");
  ide->add_flag("--tau-known", ide_tau_known);
  ide->add_option("--output,-o", ide_out);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a Berkson dataset");
  double sim_b0 = 0.0, sim_b1 = 0.0, sim_tau2 = 0.0;
  std::string sim_design, sim_dist, sim_out;
  std::size_t sim_n = 0;
  std::uint64_t sim_seed = 0;
  bool sim_seed_given = false;
  sim->add_option("--b0", sim_b0)->required();
  sim->add_option("--b1", sim_b1)->required();
  sim->add_option("--tau2", sim_tau2)->required();
  sim->add_option("--design", sim_design, "file of x0 values");
  sim->add_option("--dist", sim_dist,
                  "normal,mean,sd | uniform,lo,hi | discrete,a:w,...");
  sim->add_option("--n", sim_n, "sample size for --dist");
  sim->add_option("--seed", sim_seed)
      ->each([&](const std::string&) { sim_seed_given = true; });
  sim->add_option("--output,-o", sim_out);

  // fit
  auto* fit = app.add_subcommand("fit", "Maximum-likelihood fit");
  std::string fit_data, fit_out;
  std::optional<double> fit_tau2;
  bool fit_unknown = false;
  double fit_grad_tol = 1e-8;
  int fit_max_iter = 200;
  fit->add_option("--data", fit_data)->required();
  fit->add_option("--tau2", fit_tau2, "known error variance");
  fit->add_flag("--unknown-tau", fit_unknown);
  fit->add_option("--grad-tol", fit_grad_tol);
  fit->add_option("--max-iter", fit_max_iter);
  fit->add_option("--output,-o", fit_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const berkson::KernelConfig cfg(quad_order);

    if (tab->parsed()) {
      if (tab_k < 0 || tab_k > 4 || !(tab_step > 0.0) || tab_xmin > tab_xmax) {
        std::cerr << "tabulate: bad k/step/range\n";
        return kExitUsage;
      }
      std::string csv = "x,L" + std::to_string(tab_k) + "\n";
      for (double x = tab_xmin; x <= tab_xmax + 1e-12 * tab_step;
           x += tab_step) {
        csv += berkson::format_double(x) + "," +
               berkson::format_double(
                   berkson::smoothed_L(tab_k, {x, tab_v}, cfg)) +
               "\n";
      }
      emit(csv, tab_out);
      return kExitOk;
    }

    if (ver->parsed()) {
      berkson::Lemma lemma;
      if (ver_lemma == "key-inequality") lemma = berkson::Lemma::KeyInequality;
      else if (ver_lemma == "third-derivative")
        lemma = berkson::Lemma::ThirdDerivIdentity;
      else if (ver_lemma == "curvature-sign")
        lemma = berkson::Lemma::CurvatureSign;
      else if (ver_lemma == "aux-f") lemma = berkson::Lemma::AuxF;
      else {
        std::cerr << "verify: unknown lemma '" << ver_lemma << "'\n";
        return kExitUsage;
      }
      berkson::GridSpec grid = berkson::default_grid(lemma);
      grid.seed = ver_seed;
      grid.draws = ver_draws;
      const berkson::CertReport rep = berkson::certify(lemma, grid, cfg);
      emit(berkson::to_json(rep).dump(2) + "\n", ver_out);
      return rep.passed ? kExitOk : kExitFail;
    }

    if (ide->parsed()) {
      if (!ide_design.empty()) {
        const auto design = read_design_file(ide_design);
        const berkson::Verdict v =
            berkson::verdict_functional(design, ide_tau_known);
        emit(berkson::to_json(v).dump(2) + "\n", ide_out);
        return kExitOk;
      }
      if (ide_left.empty() || ide_right.empty()) {
        std::cerr << "identify: need --left and --right, or --design\n";
        return kExitUsage;
      }
      const auto l = split_doubles(ide_left);
      const auto r = split_doubles(ide_right);
      if (l.size() != 3 || r.size() != 3) {
        std::cerr << "identify: --left/--right must be b0,b1,s\n";
        return kExitUsage;
      }
      berkson::EquationSpec spec;
      spec.left = {l[0], l[1], l[2]};
      spec.right = {r[0], r[1], r[2]};
      if (!ide_window.empty()) {
        const auto w = split_doubles(ide_window);
        if (w.size() != 2 || !(w[0] < w[1])) {
          std::cerr << "identify: --window must be A,B with A < B\n";
          return kExitUsage;
        }
        spec.window = {w[0], w[1]};
      } else {
        spec.window = berkson::default_window(spec.left, spec.right);
      }
      const berkson::SolutionReport rep =
          berkson::classify_equation(spec, cfg);
      emit(berkson::to_json(rep).dump(2) + "\n", ide_out);
      return kExitOk;
    }

    if (sim->parsed()) {
      if (!sim_seed_given) {
        std::cerr << "simulate: --seed is required\n";
        return kExitUsage;
      }
      const berkson::ModelParams params{sim_b0, sim_b1, sim_tau2};
      berkson::Dataset data;
      if (!sim_design.empty()) {
        data = berkson::simulate(params, read_design_file(sim_design),
                                 sim_seed, cfg);
      } else if (!sim_dist.empty()) {
        std::stringstream ss(sim_dist);
        std::string name;
        std::getline(ss, name, ',');
        berkson::SamplerSpec spec;
        spec.n = sim_n;
        if (name == "normal") spec.dist = berkson::SamplerSpec::Dist::Normal;
        else if (name == "uniform")
          spec.dist = berkson::SamplerSpec::Dist::Uniform;
        else if (name == "discrete")
          spec.dist = berkson::SamplerSpec::Dist::Discrete;
        else throw std::domain_error("unsupported distribution '" + name + "'");
        std::string item;
        while (std::getline(ss, item, ',')) {
          const auto colon = item.find(':');
          if (spec.dist == berkson::SamplerSpec::Dist::Discrete) {
            if (colon == std::string::npos)
              throw std::domain_error("discrete atoms must be atom:weight");
            spec.atoms.push_back(std::stod(item.substr(0, colon)));
            spec.weights.push_back(std::stod(item.substr(colon + 1)));
          } else {
            spec.params.push_back(std::stod(item));
          }
        }
        data = berkson::simulate(params, spec, sim_seed, cfg);
      } else {
        std::cerr << "simulate: need --design FILE or --dist SPEC with --n\n";
        return kExitUsage;
      }
      emit(berkson::dataset_to_csv(data), sim_out);
      return kExitOk;
    }

    if (fit->parsed()) {
      if (fit_unknown == fit_tau2.has_value()) {
        std::cerr << "fit: need exactly one of --tau2 and --unknown-tau\n";
        return kExitUsage;
      }
      const berkson::Dataset data = berkson::dataset_from_csv_file(fit_data);
      berkson::FitOptions opts;
      opts.grad_tol = fit_grad_tol;
      opts.max_iter = fit_max_iter;
      const berkson::FitResult result =
          fit_unknown
              ? berkson::fit_unknown_tau(data, std::nullopt, opts, cfg)
              : berkson::fit_known_tau(data, *fit_tau2, std::nullopt, opts,
                                       cfg);
      emit(berkson::to_json(result).dump(2) + "\n", fit_out);
      return result.converged ? kExitOk : kExitFail;
    }
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
