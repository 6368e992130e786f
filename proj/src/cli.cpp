#include "iar/cli.hpp"

#include "iar/dataset.hpp"
#include "iar/experiment.hpp"
#include "iar/sampling.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace iar {

namespace {

std::vector<Index> parse_net(const std::string& text) {
  std::vector<Index> hidden;
  if (text.empty() || text == "none") return hidden;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double width = parse_real(item);
    if (width < 1 || width != static_cast<double>(static_cast<Index>(width))) {
      throw ParameterError("--net: layer widths must be positive integers, got '" + item + "'");
    }
    hidden.push_back(static_cast<Index>(width));
  }
  return hidden;
}

struct TrainArgs {
  std::string config;
  std::string dataset;
  std::string format = "csv";
  Index label_col = 0;
  std::string test_dataset;
  std::string net;
  std::string scale = "none";
  Index runs = 1;
  std::string out = ".";
  SolverConfig solver;
};

struct SynthArgs {
  std::uint64_t seed = 1;
  Index n = 1000;
  Index d = 10;
  double separation = 1.0;
  Index n_test = 0;
  std::string out;
  std::string test_out;
};

struct ConvertArgs {
  std::string dataset;
  Index label_col = 0;
  std::string mode = "odd-even";
  std::string out;
};

struct AuditArgs {
  std::string dataset;
  std::string format = "csv";
  Index label_col = 0;
  std::string net;
  Index n = 5000;
  Index d = 10;
  double separation = 1.0;
  double nu = 0.1;
  int order = 1;
  double kappa = 0.0;
  double t = 0.2;
  Index trials = 1000;
  std::uint64_t seed = 1;
};

struct Args {
  TrainArgs train;
  SynthArgs synth;
  ConvertArgs convert;
  AuditArgs audit;
};

struct Commands {
  CLI::App* train;
  CLI::App* synth;
  CLI::App* convert;
  CLI::App* audit;
};

Commands build(CLI::App& app, Args& a) {
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* train = app.add_subcommand("train", "Run seeded training runs and write traces");
  auto& t = a.train;
  auto& s = t.solver;
  train->add_option("--config", t.config, "key=value file; command-line flags take precedence");
  train->add_option("--dataset", t.dataset, "Training data file")->required();
  train->add_option("--format", t.format)->check(CLI::IsMember({"csv", "sparse"}));
  train->add_option("--label-col", t.label_col, "csv column holding the label");
  train->add_option("--test-dataset", t.test_dataset);
  train->add_option("--net", t.net, "Hidden layer widths, comma separated; empty for the linear model");
  train->add_option("--q", s.q);
  train->add_option("--p", s.p);
  train->add_option("--sigma0", s.sigma0);
  train->add_option("--sigma-min", s.sigma_min);
  train->add_option("--eps1", s.eps1);
  train->add_option("--eps2", s.eps2);
  train->add_option("--theta", s.theta);
  train->add_option("--eta", s.eta);
  train->add_option("--gamma", s.gamma);
  train->add_option("--alpha", s.alpha);
  train->add_option("--kappa-eps", s.kappa_eps);
  train->add_option("--gamma-eps", s.gamma_eps);
  train->add_option("--kappa", s.kappa);
  train->add_option("--t", s.t);
  train->add_option("--budget-cm", s.budget_cm);
  train->add_option("--max-iters", s.max_iterations);
  train->add_option("--runs", t.runs);
  train->add_option("--seed", s.seed, "Seed of the first run; run r uses seed + r");
  train->add_option("--scale", t.scale)->check(CLI::IsMember({"none", "minmax"}));
  train->add_option("--out", t.out, "Output directory");

  auto* synth = app.add_subcommand("synth", "Write a two-blob synthetic dataset");
  auto& y = a.synth;
  synth->add_option("--seed", y.seed);
  synth->add_option("--n", y.n, "Training samples");
  synth->add_option("--d", y.d, "Features");
  synth->add_option("--separation", y.separation);
  synth->add_option("--n-test", y.n_test, "Extra samples from the same blobs for testing");
  synth->add_option("--out", y.out)->required();
  synth->add_option("--test-out", y.test_out);

  auto* convert = app.add_subcommand("convert", "Relabel a multi-class csv");
  auto& c = a.convert;
  convert->add_option("--dataset", c.dataset)->required();
  convert->add_option("--label-col", c.label_col);
  convert->add_option("--mode", c.mode)->check(CLI::IsMember({"odd-even"}));
  convert->add_option("--out", c.out)->required();

  auto* audit = app.add_subcommand("audit", "Monte-Carlo check of the sample-size accuracy guarantee");
  auto& u = a.audit;
  audit->add_option("--dataset", u.dataset, "Data file; a synthetic set is generated when absent");
  audit->add_option("--format", u.format)->check(CLI::IsMember({"csv", "sparse"}));
  audit->add_option("--label-col", u.label_col);
  audit->add_option("--net", u.net);
  audit->add_option("--n", u.n, "Synthetic samples");
  audit->add_option("--d", u.d, "Synthetic features");
  audit->add_option("--separation", u.separation);
  audit->add_option("--nu", u.nu, "Target accuracy");
  audit->add_option("--order", u.order, "0 for values, 1 for gradients")->check(CLI::Range(0, 1));
  audit->add_option("--kappa", u.kappa, "Component bound; measured at the point when 0");
  audit->add_option("--t", u.t);
  audit->add_option("--trials", u.trials);
  audit->add_option("--seed", u.seed);

  return {train, synth, convert, audit};
}

/// Rewrites a key=value config file as flags placed before the user's own.
std::vector<std::string> expand_config(const std::vector<std::string>& args, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path);
  CLI::ConfigINI reader;
  reader.comment('#');
  std::vector<std::string> flags;
  for (const auto& item : reader.from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? "," : "") + item.inputs[i];
    flags.push_back("--" + item.name);
    flags.push_back(value);
  }
  std::vector<std::string> out;
  out.push_back(args[0]);
  bool inserted = false;
  for (std::size_t i = 1; i < args.size(); ++i) {
    out.push_back(args[i]);
    if (!inserted && args[i] == "train") {
      out.insert(out.end(), flags.begin(), flags.end());
      inserted = true;
    }
  }
  return out;
}

int train(const TrainArgs& t, std::ostream& out) {
  ExperimentConfig config;
  config.dataset = t.dataset;
  config.test_dataset = t.test_dataset;
  config.load.format = parse_format(t.format);
  config.load.label_col = t.label_col;
  config.hidden = parse_net(t.net);
  config.scale = t.scale == "minmax" ? Scaling::minmax : Scaling::none;
  config.runs = t.runs;
  config.out_dir = t.out;
  config.solver = t.solver;
  const ExperimentResult result = run_experiment(config, out);
  for (const auto& r : result.runs) {
    if (!r.ok()) return 2;
  }
  return 0;
}

int synth(const SynthArgs& y, std::ostream& out) {
  if (y.n_test < 0) throw ParameterError("--n-test must be non-negative");
  if (y.n_test > 0 && y.test_out.empty()) throw ParameterError("--n-test requires --test-out");
  const Dataset all = synthesize_dataset(y.seed, y.n + y.n_test, y.d, y.separation);
  write_dataset_csv(y.out, slice(all, 0, y.n));
  if (y.n_test > 0) write_dataset_csv(y.test_out, slice(all, y.n, y.n_test));
  out << "wrote " << y.n << " training samples to " << y.out;
  if (y.n_test > 0) out << " and " << y.n_test << " testing samples to " << y.test_out;
  out << '\n';
  return 0;
}

int convert(const ConvertArgs& c, std::ostream& out) {
  std::ifstream in(c.dataset);
  if (!in) throw ParseError("cannot open " + c.dataset);
  std::ofstream dest(c.out, std::ios::binary);
  if (!dest) throw std::runtime_error("cannot write " + c.out);
  try {
    convert_odd_even(in, dest, c.label_col);
  } catch (const ParseError& e) {
    throw ParseError(c.dataset + ": " + e.what());
  }
  out << "wrote " << c.out << '\n';
  return 0;
}

int audit(const AuditArgs& u, std::ostream& out) {
  std::shared_ptr<const Dataset> data;
  if (u.dataset.empty()) {
    data = std::make_shared<Dataset>(synthesize_dataset(u.seed, u.n, u.d, u.separation));
  } else {
    LoadOptions load;
    load.format = parse_format(u.format);
    load.label_col = u.label_col;
    data = std::make_shared<Dataset>(load_dataset(u.dataset, load));
  }
  const NetworkSpec spec(data->dim(), parse_net(u.net));
  const NetworkLossProblem problem(data, spec);
  std::mt19937_64 engine(u.seed);
  const Vector x = initial_parameters(spec, engine);

  double kappa = u.kappa;
  if (kappa <= 0) {
    for (Index i = 0; i < problem.size(); ++i) {
      const double bound = u.order == 0 ? std::abs(problem.component_value(i, x))
                                        : problem.component_gradient(i, x).norm();
      kappa = std::max(kappa, bound);
    }
  }
  const auto order = u.order == 0 ? SampleOrder::value : SampleOrder::gradient;
  const AuditResult r = audit_accuracy(problem, x, u.nu, kappa, u.t, order, u.trials, engine);
  out << "kappa " << format_real(kappa) << '\n'
      << "sample_size " << r.sample_size << " of " << problem.size() << '\n'
      << "failures " << r.failures << " of " << r.trials << '\n'
      << "failure_rate " << format_real(r.failure_rate()) << " (allowed " << format_real(u.t) << ")\n";
  return 0;
}

std::string find_config(const std::vector<std::string>& args) {
  bool in_train = false;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "train") in_train = true;
    if (!in_train) continue;
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].starts_with("--config=")) return args[i].substr(9);
  }
  return {};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.empty()) args.emplace_back("iar");

  CLI::App app("Inexact adaptive regularisation for finite-sum training", "iar");
  Args a;
  const Commands cmd = build(app, a);
  try {
    if (const auto config = find_config(args); !config.empty()) args = expand_config(args, config);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (cmd.train->parsed()) return train(a.train, out);
    if (cmd.synth->parsed()) return synth(a.synth, out);
    if (cmd.convert->parsed()) return convert(a.convert, out);
    if (cmd.audit->parsed()) return audit(a.audit, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace iar
