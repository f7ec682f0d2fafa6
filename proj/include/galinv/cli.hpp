#pragma once

// Command-line driver: gen, verify, reduce, center, structure.
// Exit codes: 0 success, 1 verification failure, 2 usage or input error.

#include "galinv/envelope.hpp"
#include "galinv/galilean.hpp"
#include "galinv/invariants.hpp"
#include "galinv/orbitreduce.hpp"
#include "galinv/verify.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace galinv::cli {

inline constexpr int kOk = 0;
inline constexpr int kFailed = 1;
inline constexpr int kUsage = 2;

inline constexpr int kMaxGenN = 12;
inline constexpr int kMaxReduceN = 8;
inline constexpr int kMaxCenterN = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_range(const char* what, int n, int lo, int hi, const std::string& message = {}) {
  if (n < lo || n > hi)
    throw UsageError(message.empty() ? std::string(what) + ": --n must be in " + std::to_string(lo) + ".." +
                                           std::to_string(hi) + " (got " + std::to_string(n) + ")"
                                     : message);
}

inline std::vector<double> float_values(const InvariantSet& set, const FloatDual& xi) {
  const auto c = xi.coordinates();
  std::vector<double> out;
  for (const auto& p : set.polys) out.push_back(p.poly.evaluate_float(c));
  return out;
}

inline json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline int gen(int n, const std::string& format, std::ostream& out) {
  detail::require_range("gen", n, 1, kMaxGenN);
  const InvariantSet set = generator_set(n);
  if (format == "json")
    out << set.to_json().dump(2) << '\n';
  else if (format == "latex")
    out << set.to_latex();
  else
    out << set.to_text();
  return kOk;
}

inline int verify(int n, int trials, std::uint64_t seed, bool force_n4, bool as_json, std::ostream& out,
                  std::ostream& err) {
  detail::require_range("verify", n, 1, kMaxSuiteN);
  if (trials < 1) throw UsageError("verify: --trials must be >= 1");
  SuiteOptions opt;
  opt.trials = trials;
  opt.force_centrality_n4 = force_n4;
  const VerificationReport report = run_suite(n, seed, opt);
  // Timings vary between runs, so they go to stderr and never into the report.
  for (const auto& c : report.checks)
    err << "# " << c.name << ": " << std::fixed << std::setprecision(3) << c.runtime << " s\n";
  if (as_json)
    out << report.to_json().dump(2) << '\n';
  else
    out << report.to_text();
  return report.passed() ? kOk : kFailed;
}

inline json reduce_json(const FloatDual& xi, double tol) {
  const Reduction r = reduce(xi, tol);
  const InvariantSet set = generator_set(xi.n);
  json steps = json::array();
  for (const auto& s : r.trace.steps)
    steps.push_back(json{{"step", step_name(s.kind)}, {"matrix", detail::matrix_json(s.g.matrix())}});
  json out{{"schema", "v1"},
           {"n", xi.n},
           {"A", r.form.A},
           {"B", r.form.B},
           {"thetas", r.form.thetas},
           {"degenerate", r.form.degenerate},
           {"invariants_before", detail::float_values(set, xi)},
           {"invariants_after", detail::float_values(set, r.reduced)},
           {"residual", r.residual},
           {"trace", std::move(steps)}};
  if (!r.form.degenerate) out["invariants_closed_form"] = closed_form_invariants(r.form);
  return out;
}

inline int reduce_file(const std::string& path, double tol, std::ostream& out) {
  std::ifstream in(path);
  if (!in) throw UsageError("reduce: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("reduce: malformed JSON: ") + e.what());
  }
  const FloatDual xi = float_dual_from_json(j);
  detail::require_range("reduce", xi.n, 1, kMaxReduceN);
  if (!(tol > 0)) throw UsageError("reduce: --tol must be positive");
  out << reduce_json(xi, tol).dump(2) << '\n';
  return kOk;
}

inline int center(int n, int max_degree, std::ostream& out) {
  detail::require_range("center", n, 1, kMaxCenterN, "center: centrality computation capped at n=4");
  const InvariantSet set = generator_set(n);
  const Envelope env(n);
  json elements = json::array();
  for (const auto& g : set.polys) {
    if (g.degree > max_degree) continue;
    const UEAElement u = env.symmetrize(g.poly);
    const CentralityResult c = env.is_central(u, worker_threads());
    json e{{"name", g.name}, {"degree", g.degree}, {"central", c.central}, {"terms", u.to_json()}};
    if (!c.central) e["witness"] = c.witness->name();
    elements.push_back(std::move(e));
  }
  json basis = json::array();
  for (const auto& l : basis_labels(n)) basis.push_back(l.name());
  out << json{{"schema", "v1"}, {"n", n}, {"basis", std::move(basis)}, {"elements", std::move(elements)}}.dump(2)
      << '\n';
  return kOk;
}

inline int structure(int n, std::ostream& out) {
  detail::require_range("structure", n, 1, kMaxGenN);
  out << structure_to_json(StructureConstants(n)).dump(2) << '\n';
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Coadjoint invariants of the Galilean group Gal(n)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "galinv 1.0.0");

  int n = 0;
  std::string format = "text";
  auto* gen_cmd = app.add_subcommand("gen", "Print the generating invariant polynomials");
  gen_cmd->add_option("--n", n, "Spatial dimension (1..12)")->required();
  gen_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "latex", "text"}));

  int trials = 100;
  std::uint64_t seed = 1;
  bool force_n4 = false, as_json = false;
  auto* verify_cmd = app.add_subcommand("verify", "Run the verification suite");
  verify_cmd->add_option("--n", n, "Spatial dimension (1..8)")->required();
  verify_cmd->add_option("--trials", trials, "Sampled group-invariance trials");
  verify_cmd->add_option("--seed", seed, "Random seed");
  verify_cmd->add_flag("--force-centrality-n4", force_n4, "Run the centrality checks at n=4");
  verify_cmd->add_flag("--json", as_json, "Emit the report as JSON");

  std::string input;
  double tol = 1e-9;
  auto* reduce_cmd = app.add_subcommand("reduce", "Reduce a dual element to its normal form");
  reduce_cmd->add_option("--input", input, "Dual element JSON file")->required();
  reduce_cmd->add_option("--tol", tol, "Degeneracy threshold on norms");

  int max_degree = std::numeric_limits<int>::max();
  auto* center_cmd = app.add_subcommand("center", "Symmetrized invariants in U(gal(n)) with centrality results");
  center_cmd->add_option("--n", n, "Spatial dimension (1..4)")->required();
  center_cmd->add_option("--max-degree", max_degree, "Skip generators above this degree");

  auto* structure_cmd = app.add_subcommand("structure", "Print the structure constants of gal(n)");
  structure_cmd->add_option("--n", n, "Spatial dimension (1..12)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*gen_cmd) return gen(n, format, out);
    if (*verify_cmd) return verify(n, trials, seed, force_n4, as_json, out, err);
    if (*reduce_cmd) return reduce_file(input, tol, out);
    if (*center_cmd) return center(n, max_degree, out);
    if (*structure_cmd) return structure(n, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace galinv::cli
