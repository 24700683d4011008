#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ckt/codec.hpp"
#include "ckt/constraints.hpp"
#include "ckt/estimator.hpp"
#include "ckt/mle.hpp"
#include "ckt/redundancy.hpp"

namespace {

struct GlobalOptions {
  std::string constraints_path;
  std::uint64_t seed = 0;
  std::int64_t samples = 100000;
  double quad_tol = 1e-9;
  std::string output_path;  // empty = stdout
};

ckt::ConstraintSet load_constraints(const GlobalOptions& g) {
  if (g.constraints_path.empty()) {
    throw std::runtime_error("--constraints is required for this command");
  }
  return ckt::ConstraintSet::parse_file(g.constraints_path);
}

ckt::IntegrationConfig make_config(const GlobalOptions& g) {
  ckt::IntegrationConfig cfg;
  cfg.samples = g.samples;
  cfg.quad_tol = g.quad_tol;
  cfg.seed = g.seed;
  return cfg;
}

// Writes to --output or stdout. Binary-safe.
void write_output(const GlobalOptions& g, const std::string& data) {
  if (g.output_path.empty()) {
    std::cout.write(data.data(), static_cast<std::streamsize>(data.size()));
    std::cout.flush();
    return;
  }
  std::ofstream out(g.output_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + g.output_path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed: " + g.output_path);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  return data;
}

// Symbol files hold raw octets 0..m-1; internally symbols are 1-based.
std::vector<int> read_symbols(const std::string& path, int m) {
  const std::vector<std::uint8_t> raw = read_file(path);
  std::vector<int> x;
  x.reserve(raw.size());
  for (std::uint8_t b : raw) {
    if (b >= m) {
      throw std::runtime_error("input symbol " + std::to_string(int(b)) +
                               " out of range for alphabet of size " + std::to_string(m));
    }
    x.push_back(int(b) + 1);
  }
  return x;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

const char* backend_name(ckt::Backend b) {
  switch (b) {
    case ckt::Backend::Exact: return "exact";
    case ckt::Backend::Quadrature: return "quadrature";
    case ckt::Backend::MonteCarlo: return "monte-carlo";
  }
  return "?";
}

int cmd_predict(const GlobalOptions& g, const std::vector<std::int64_t>& count_args,
                const std::string& input_path) {
  const ckt::ConstraintSet s = load_constraints(g);
  ckt::CountVector counts;
  counts.k.assign(s.m(), 0);
  if (!count_args.empty() && !input_path.empty()) {
    throw std::runtime_error("predict: give either positional counts or --input, not both");
  }
  if (!count_args.empty()) {
    if (static_cast<int>(count_args.size()) != s.m()) {
      throw std::runtime_error("predict: expected " + std::to_string(s.m()) + " counts");
    }
    counts = ckt::CountVector(count_args);
  } else if (!input_path.empty()) {
    for (int sym : read_symbols(input_path, s.m())) {
      counts.k[sym - 1] += 1;
      counts.n += 1;
    }
  }

  ckt::EstimatorState state = ckt::new_estimator(s, make_config(g), g.seed);
  state.counts = counts;
  const ckt::PredictiveDistribution pred = ckt::predict(state);
  std::string out;
  for (int i = 0; i < s.m(); ++i) {
    out += fmt(pred.probs[i]) + " " + fmt(pred.std_errors[i]) + "\n";
  }
  write_output(g, out);
  return 0;
}

int cmd_compress(const GlobalOptions& g, const std::string& input_path) {
  const ckt::ConstraintSet s = load_constraints(g);
  const std::vector<int> x = read_symbols(input_path, s.m());
  const ckt::BitBuffer buf = ckt::encode(x, s, make_config(g), g.seed);
  write_output(g, std::string(buf.bytes.begin(), buf.bytes.end()));
  return 0;
}

int cmd_decompress(const GlobalOptions& g, const std::string& input_path) {
  const ckt::ConstraintSet s = load_constraints(g);
  ckt::BitBuffer buf;
  buf.bytes = read_file(input_path);
  buf.bit_length = std::max<std::int64_t>(0, (std::int64_t(buf.bytes.size()) - 31) * 8);
  // The seed travels in the header; decoding always uses the stored value.
  const ckt::CodecHeader header = ckt::read_header(buf);
  const std::vector<int> x = ckt::decode(buf, s, make_config(g), header.seed);
  std::string out;
  out.reserve(x.size());
  for (int sym : x) out.push_back(static_cast<char>(sym - 1));
  write_output(g, out);
  return 0;
}

int cmd_redundancy(const GlobalOptions& g, const std::vector<std::int64_t>& n_list,
                   bool with_exact_avg, bool with_mixture, bool with_cn_gap) {
  const ckt::ConstraintSet s = load_constraints(g);
  const ckt::IntegrationConfig cfg = make_config(g);
  char digest_hex[32];
  std::snprintf(digest_hex, sizeof(digest_hex), "%016llx",
                static_cast<unsigned long long>(s.digest()));

  std::string out = ckt::redundancy_csv_header() + "\n";
  bool any_error = false;
  for (std::int64_t n : n_list) {
    ckt::RedundancyReport report;
    report.n = n;
    report.m = s.m();
    try {
      report.log2_jeffreys = ckt::jeffreys_constant(s, cfg).log_value / std::log(2.0);
      report.asym_worst = ckt::worst_case_asymptotic(n, s, cfg);
      report.asym_avg = ckt::average_asymptotic(n, s, cfg);
      if (ckt::type_enumeration_feasible(n, s.m())) {
        report.log2_shtarkov = ckt::worst_case_exact(n, s);
        if (with_mixture) report.mixture_worst_regret = ckt::mixture_worst_regret(n, s, cfg);
      } else {
        std::cerr << "n=" << n << ": exact enumeration skipped (guard exceeded)\n";
      }
      if (with_exact_avg) {
        double se = 0.0;
        report.avg_exact = ckt::average_exact(n, s, cfg, &se);
        report.avg_exact_std_error = se;
      }
      if (with_cn_gap) report.cn_gap = ckt::cn_gap(n, s, cfg);
    } catch (const std::exception& e) {
      std::cerr << "n=" << n << ": " << e.what() << "\n";
      any_error = true;
    }
    out += ckt::redundancy_csv_row(report, digest_hex) + "\n";
  }
  write_output(g, out);
  return any_error ? 1 : 0;
}

int cmd_integrate(const GlobalOptions& g, const std::vector<double>& alphas) {
  const ckt::ConstraintSet s = load_constraints(g);
  ckt::DirichletParams alpha;
  alpha.alpha = alphas;
  if (alpha.alpha.empty()) alpha.alpha.assign(s.m(), 0.5);
  const ckt::MeasureEstimate est = ckt::dirichlet_measure(s, alpha, make_config(g));
  std::string out = "value=" + fmt(std::exp(est.log_value)) +
                    " log_value=" + fmt(est.log_value) +
                    " std_error=" + fmt(est.std_error) +
                    " backend=" + backend_name(est.backend) + "\n";
  write_output(g, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained sequential probability assignment, compression, and redundancy tables"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--constraints", g.constraints_path, "Constraint description file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Deterministic seed for sampled backends");
  app.add_option("--samples", g.samples, "Monte Carlo sample count")
      ->check(CLI::Range(std::int64_t(1000), std::int64_t(1) << 40));
  app.add_option("--quad-tol", g.quad_tol, "Adaptive quadrature tolerance")
      ->check(CLI::Range(1e-300, 1e-3));
  app.add_option("--output", g.output_path, "Output file (default: stdout)");

  auto* predict = app.add_subcommand("predict", "Next-symbol conditional probabilities");
  std::vector<std::int64_t> count_args;
  std::string predict_input;
  predict->add_option("counts", count_args, "Symbol counts (m integers)");
  predict->add_option("--input", predict_input, "Symbol file to count instead")
      ->check(CLI::ExistingFile);

  auto* compress = app.add_subcommand("compress", "Compress a symbol file");
  std::string compress_input;
  compress->add_option("input", compress_input, "Symbol file (raw octets 0..m-1)")
      ->required()
      ->check(CLI::ExistingFile);

  auto* decompress = app.add_subcommand("decompress", "Invert compress");
  std::string decompress_input;
  decompress->add_option("input", decompress_input, "Compressed file")
      ->required()
      ->check(CLI::ExistingFile);

  auto* redundancy = app.add_subcommand("redundancy", "Redundancy table as CSV");
  std::vector<std::int64_t> n_list;
  bool with_exact_avg = false, with_mixture = false, with_cn_gap = false;
  redundancy->add_option("--n", n_list, "Sequence lengths")->required();
  redundancy->add_flag("--exact-avg", with_exact_avg, "Include the exact average column");
  redundancy->add_flag("--mixture-regret", with_mixture, "Include the mixture worst-regret column");
  redundancy->add_flag("--cn-gap", with_cn_gap, "Include the c_n column (m=2)");

  auto* integrate = app.add_subcommand("integrate", "Dirichlet measure of the constraint set");
  std::vector<double> alphas;
  integrate->add_option("alpha", alphas, "Dirichlet parameters (default: all 1/2)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (predict->parsed()) return cmd_predict(g, count_args, predict_input);
    if (compress->parsed()) return cmd_compress(g, compress_input);
    if (decompress->parsed()) return cmd_decompress(g, decompress_input);
    if (redundancy->parsed()) {
      return cmd_redundancy(g, n_list, with_exact_avg, with_mixture, with_cn_gap);
    }
    if (integrate->parsed()) return cmd_integrate(g, alphas);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
