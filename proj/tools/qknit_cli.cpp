// qknit: command-line front end for gate/wire cutting, estimation, bounds,
// and benchmarks.
//
// Exit codes: 0 success, 1 usage error, 2 numerical/validation failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qknit/bench.hpp"
#include "qknit/bounds.hpp"
#include "qknit/estimator.hpp"
#include "qknit/serialize.hpp"

namespace fs = std::filesystem;
using namespace qknit;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GateSpec {
  Matrix u;
  int da = 2, db = 2;
  std::string name;
};

double parse_real(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse " + what + ": '" + s + "'");
  }
}

// Named gates (cnot, cz, swap, iswap, cphase:<theta>) or a matrix JSON file
// with declared --da/--db.
GateSpec parse_gate(const std::string& token, int da, int db) {
  GateSpec g;
  g.name = token;
  if (token == "cnot") {
    g.u = gates::cnot();
  } else if (token == "cz") {
    g.u = gates::cz();
  } else if (token == "swap") {
    g.u = gates::swap_gate();
  } else if (token == "iswap") {
    g.u = gates::iswap();
  } else if (token.rfind("cphase:", 0) == 0) {
    g.u = gates::cphase(parse_real(token.substr(7), "cphase angle"));
  } else if (fs::exists(token)) {
    std::ifstream in(token);
    Json j;
    in >> j;
    g.u = matrix_from_json(j);
    g.da = da;
    g.db = db;
    if (int(g.u.rows()) != da * db)
      throw UsageError("matrix size does not match --da * --db");
    if (!is_unitary(g.u, 1e-8))
      throw ValidationError("gate matrix is not unitary within 1e-8");
    return g;
  } else {
    throw UsageError("unknown gate '" + token +
                     "' (named gates: cnot, cz, swap, iswap, cphase:<theta>; or a matrix file)");
  }
  g.da = g.db = 2;
  return g;
}

ResourceState parse_resource(const std::string& token) {
  if (token == "none" || token == "separable") return ResourceState::separable();
  if (token == "bell") return ResourceState::bell(2);
  if (token.rfind("bell:", 0) == 0)
    return ResourceState::bell(int(parse_real(token.substr(5), "bell dimension")));
  if (token.rfind("psi:", 0) == 0) return ResourceState::psi(parse_real(token.substr(4), "psi r"));
  throw UsageError("unknown resource '" + token + "' (use none, bell, bell:<d>, psi:<r>)");
}

// Observables: a string of Pauli letters (e.g. ZZ, XI) or a matrix JSON file
// prefixed with '@'.
Matrix parse_observable(const std::string& token, int dim) {
  if (!token.empty() && token[0] == '@') {
    std::ifstream in(token.substr(1));
    if (!in) throw UsageError("cannot open observable file " + token.substr(1));
    Json j;
    in >> j;
    return matrix_from_json(j);
  }
  Matrix m = Matrix::Identity(1, 1);
  for (char ch : token) {
    Matrix p;
    switch (std::toupper(ch)) {
      case 'I': p = gates::identity(2); break;
      case 'X': p = gates::pauli_x(); break;
      case 'Y': p = gates::pauli_y(); break;
      case 'Z': p = gates::pauli_z(); break;
      default: throw UsageError(std::string("unknown Pauli letter '") + ch + "'");
    }
    m = kron(m, p);
  }
  if (int(m.rows()) != dim) throw UsageError("observable dimension does not match the config");
  return m;
}

// States: zero, plus, mixed, plus0, or '@file.json' with a density matrix.
Matrix parse_state(const std::string& token, int dim) {
  if (!token.empty() && token[0] == '@') {
    std::ifstream in(token.substr(1));
    if (!in) throw UsageError("cannot open state file " + token.substr(1));
    Json j;
    in >> j;
    return matrix_from_json(j);
  }
  if (token == "mixed") return Matrix::Identity(dim, dim) / double(dim);
  Vector k;
  if (token == "zero") {
    k = Vector::Zero(dim);
    k(0) = 1;
  } else if (token == "plus") {
    k = Vector::Constant(dim, 1.0 / std::sqrt(double(dim)));
  } else if (token == "plus0" && dim == 4) {
    k = Vector::Zero(4);
    k(0) = k(2) = 1.0 / std::sqrt(2.0);
  } else {
    throw UsageError("unknown state '" + token + "' (use zero, plus, mixed, plus0, @file)");
  }
  return Matrix(k * k.adjoint());
}

fs::path out_dir() {
  if (const char* d = std::getenv("QKNIT_OUT_DIR")) return fs::path(d);
  return fs::current_path();
}

fs::path resolve_out(const std::string& given, const std::string& fallback) {
  fs::path p = given.empty() ? fs::path(fallback) : fs::path(given);
  if (p.is_relative()) p = out_dir() / p;
  return p;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(8);
  os << v;
  return os.str();
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ':' || c == '/' || c == '.') c = '_';
  return s;
}

int run(int argc, char** argv) {
  CLI::App app{"qknit: quasi-probability cutting of nonlocal gates and wires"};
  app.require_subcommand(1);
  bool json_out = false;
  app.add_flag("--json", json_out, "emit JSON on stdout");

  // decompose
  std::string gate_token;
  int da = 2, db = 2;
  auto* dec = app.add_subcommand("decompose", "operator Schmidt decomposition of a gate");
  dec->add_option("gate", gate_token)->required();
  dec->add_option("--da", da, "A-side dimension for matrix-file gates");
  dec->add_option("--db", db, "B-side dimension for matrix-file gates");

  // cut
  std::string cut_target, resource_token = "bell", cut_out;
  bool wire = false;
  auto* cut = app.add_subcommand("cut", "build a QPD config for a gate or a wire");
  cut->add_option("target", cut_target, "gate name/file, or wire dimension with --wire")
      ->required();
  cut->add_option("--resource", resource_token, "none | bell | bell:<d> | psi:<r>");
  cut->add_flag("--wire", wire, "cut a wire instead of a gate");
  cut->add_option("--da", da);
  cut->add_option("--db", db);
  cut->add_option("--out", cut_out, "config output path (default derived from the target)");

  // estimate
  std::string cfg_path, state_token = "mixed", obs_token = "Z";
  double eps = 0.1, delta = 0.05;
  std::uint64_t seed = 1;
  bool analytic = false;
  auto* est = app.add_subcommand("estimate", "Monte-Carlo estimate through a config");
  est->add_option("config", cfg_path)->required()->check(CLI::ExistingFile);
  est->add_option("--state", state_token, "zero | plus | mixed | plus0 | @file");
  est->add_option("--obs", obs_token, "Pauli string (e.g. ZZ) or @file");
  est->add_option("--eps", eps, "target accuracy");
  est->add_option("--delta", delta, "failure probability");
  est->add_option("--seed", seed);
  est->add_flag("--analytic", analytic, "term-analytic mode (lower variance)");

  // bounds
  std::string bounds_resource;
  double psi_r = -1;
  auto* bnd = app.add_subcommand("bounds", "closed-form overhead bounds for a gate");
  bnd->add_option("gate", gate_token)->required();
  bnd->add_option("--resource", bounds_resource, "none | bell | psi:<r>");
  bnd->add_option("--r", psi_r, "psi Schmidt parameter for upper_psi_r");
  bnd->add_option("--da", da);
  bnd->add_option("--db", db);

  // bench
  auto* bench = app.add_subcommand("bench", "randomized benchmarks");
  bench->require_subcommand(1);
  int samples = 100000, bins = 64, grid = 64;
  std::uint64_t bench_seed = 1;
  std::string bench_out;
  auto* fig4 = bench->add_subcommand("fig4", "overhead histogram over parallel Haar gate pairs");
  fig4->add_option("--samples", samples);
  fig4->add_option("--seed", bench_seed);
  fig4->add_option("--bins", bins);
  fig4->add_option("--out", bench_out, "CSV output path");
  auto* cph = bench->add_subcommand("cphase", "controlled-phase trade-off sweep");
  cph->add_option("--grid", grid, "number of theta points on [0, pi]");
  cph->add_option("--out", bench_out, "CSV output path");

  CLI11_PARSE(app, argc, argv);

  if (dec->parsed()) {
    GateSpec g = parse_gate(gate_token, da, db);
    LUD lud = operator_schmidt(g.u, g.da, g.db);
    if (json_out) {
      Json j{{"gate", g.name},
             {"lambdas", lud.lambdas},
             {"kak_like", lud.kak_like},
             {"rank", schmidt_rank(lud.lambdas)},
             {"entropy_bits", entanglement_entropy(lud.lambdas)}};
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "lambda = (";
      for (size_t i = 0; i < lud.lambdas.size(); ++i)
        std::cout << (i ? ", " : "") << fmt(lud.lambdas[i]);
      std::cout << ")\nkak_like = " << (lud.kak_like ? "true" : "false")
                << "\nrank = " << schmidt_rank(lud.lambdas) << "\n";
    }
    return 0;
  }

  if (cut->parsed()) {
    ResourceState res = parse_resource(resource_token);
    QpdConfig config;
    if (wire) {
      int d = int(parse_real(cut_target, "wire dimension"));
      config = build_wire_cut(res, d);
    } else {
      GateSpec g = parse_gate(cut_target, da, db);
      config = build_gate_cut(g.u, g.da, g.db, res);
    }
    if (config.constructive) validate(config);
    fs::path out = resolve_out(
        cut_out, sanitize((wire ? "wire" + cut_target : cut_target) + "-" + config.kind) + ".json");
    std::ofstream os(out);
    if (!os) throw UsageError("cannot write " + out.string());
    os << config_to_json(config).dump(2) << "\n";
    Json audit = config.constructive ? audit_to_json(locality_audit(config)) : Json(nullptr);
    if (json_out) {
      Json j{{"gamma", config.gamma},
             {"kind", config.kind},
             {"constructive", config.constructive},
             {"terms", config.terms.size()},
             {"audit", audit},
             {"config_path", out.string()}};
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "gamma = " << fmt(config.gamma) << "\nkind = " << config.kind
                << "\nconstructive = " << (config.constructive ? "true" : "false") << "\n";
      if (!audit.is_null())
        std::cout << "audit: " << audit.at("class").get<std::string>() << ", "
                  << audit.at("classical_bits").get<int>() << " classical bits\n";
      if (!config.note.empty()) std::cout << "note: " << config.note << "\n";
      std::cout << "config written to " << out.string() << "\n";
    }
    return 0;
  }

  if (est->parsed()) {
    std::ifstream in(cfg_path);
    Json j;
    in >> j;
    QpdConfig config = config_from_json(j);
    Matrix rho = parse_state(state_token, dim_of(config.in_space));
    Observable o(parse_observable(obs_token, dim_of(config.out_space)));
    auto plan = shots_for(config.gamma, eps, delta, std::max(o.bound, 1e-12));
    auto r = mc_estimate(config, rho, o, plan, seed,
                         analytic ? EstimateMode::TermAnalytic : EstimateMode::Sampled);
    if (json_out) {
      std::cout << estimate_to_json(r).dump(2) << "\n";
    } else {
      std::cout << "mean = " << fmt(r.mean) << "\nstd_error = " << fmt(r.std_error)
                << "\nshots = " << r.shots << "\ngamma = " << fmt(r.gamma)
                << "\nseed = " << r.seed << "\n";
    }
    return 0;
  }

  if (bnd->parsed()) {
    GateSpec g = parse_gate(gate_token, da, db);
    std::optional<ResourceState> res;
    if (!bounds_resource.empty()) res = parse_resource(bounds_resource);
    std::optional<double> r;
    if (psi_r >= 0) r = psi_r;
    auto b = bound_set(operator_schmidt(g.u, g.da, g.db), res, r);
    std::cout << bounds_to_json(b).dump(2) << "\n";
    return 0;
  }

  if (fig4->parsed()) {
    auto res = pair_overhead_histogram(samples, bench_seed, bins);
    fs::path out = resolve_out(bench_out, "fig4.csv");
    std::ofstream os(out);
    if (!os) throw UsageError("cannot write " + out.string());
    write_csv(os, res);
    if (json_out) {
      Json j{{"samples", samples},         {"seed", bench_seed},
             {"median_free", res.median_free}, {"median_bell", res.median_bell},
             {"median_ratio", res.median_ratio}, {"csv_path", out.string()}};
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "median gamma_free = " << fmt(res.median_free)
                << "\nmedian gamma_bell = " << fmt(res.median_bell)
                << "\nmedian ratio = " << fmt(res.median_ratio) << "\ncsv written to "
                << out.string() << "\n";
    }
    return 0;
  }

  if (cph->parsed()) {
    auto res = cphase_sweep(grid);
    fs::path out = resolve_out(bench_out, "cphase.csv");
    std::ofstream os(out);
    if (!os) throw UsageError("cannot write " + out.string());
    write_csv(os, res);
    if (json_out) {
      Json j{{"points", grid},
             {"breakeven_theta", res.breakeven_theta},
             {"csv_path", out.string()}};
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "breakeven theta = " << fmt(res.breakeven_theta) << "\ncsv written to "
                << out.string() << "\n";
    }
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
