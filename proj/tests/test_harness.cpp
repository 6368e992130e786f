#include "iar/cli.hpp"
#include "iar/dataset.hpp"
#include "iar/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace iar;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("iar_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args, std::string* output = nullptr) {
  args.insert(args.begin(), "iar");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (output) *output = out.str() + err.str();
  return code;
}

}  // namespace

TEST_CASE("csv and sparse rows") {
  std::istringstream csv("# header comment\n1,0.5,0.25\n\n-3,1,2\n");
  const Dataset a = load_dataset(csv, {});
  CHECK(a.size() == 2);
  CHECK(a.dim() == 2);
  CHECK(a.labels[0] == 1.0);
  CHECK(a.labels[1] == 0.0);
  CHECK(a.features(0, 0) == 0.5);
  CHECK(a.features(0, 1) == 0.25);

  std::istringstream last("0.5,0.25,1\n");
  LoadOptions opts;
  opts.label_col = 2;
  CHECK(load_dataset(last, opts).features(0, 1) == 0.25);

  std::istringstream sparse("-1 3:0.7\n+1 1:2 5:1\n");
  LoadOptions sp;
  sp.format = DataFormat::sparse;
  sp.dim = 5;
  const Dataset b = load_dataset(sparse, sp);
  CHECK(b.labels[0] == 0.0);
  CHECK(b.labels[1] == 1.0);
  CHECK(b.dim() == 5);
  CHECK(b.features.row(0) == (Vector(5) << 0, 0, 0.7, 0, 0).finished().transpose());
}

TEST_CASE("malformed rows report their line") {
  auto message = [](const std::string& text, LoadOptions opts) -> std::string {
    std::istringstream in(text);
    try {
      load_dataset(in, opts);
    } catch (const ParseError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message("1,2\n1,x\n", {}).starts_with("line 2:"));
  CHECK(message("1,2\n1,2,3\n", {}).find("line 2") != std::string::npos);
  LoadOptions sp;
  sp.format = DataFormat::sparse;
  CHECK(message("1 1:2\n0 2\n", sp).starts_with("line 2:"));
  CHECK(message("1 0:2\n", sp).starts_with("line 1:"));
  sp.dim = 2;
  CHECK(message("1 3:1\n", sp).starts_with("line 1:"));
  CHECK_THROWS_AS(parse_format("json"), ParameterError);
  CHECK_THROWS_AS(load_dataset(std::string("/nonexistent/file.csv"), LoadOptions{}), ParseError);
}

TEST_CASE("real formatting round-trips") {
  for (double v : {0.1, 1.0 / 3, -2.5e-300, 12345678.9, 0.0}) CHECK(parse_real(format_real(v)) == v);
  CHECK_THROWS_AS(parse_real("1.0x"), ParseError);
  CHECK_THROWS_AS(parse_real(""), ParseError);
}

TEST_CASE("synthetic datasets") {
  const Dataset a = synthesize_dataset(7, 100, 4, 2.0);
  const Dataset b = synthesize_dataset(7, 100, 4, 2.0);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK_NOTHROW(a.validate());
  CHECK(synthesize_dataset(8, 100, 4, 2.0).features != a.features);
  CHECK_THROWS_AS(synthesize_dataset(1, 0, 4, 1.0), ParameterError);
  CHECK_THROWS_AS(synthesize_dataset(1, 10, 4, -1.0), ParameterError);

  const Dataset noise = synthesize_dataset(3, 10'000, 5, 0.0);
  const NetworkSpec spec(5);
  Vector x(5);
  x << 0.3, -1, 2, 0.1, 0.5;
  CHECK(std::abs(classification_rate(spec, x, noise) - 0.5) <= 0.05);

  std::stringstream csv;
  write_dataset_csv(csv, a);
  const Dataset back = load_dataset(csv, {});
  CHECK(back.features == a.features);
  CHECK(back.labels == a.labels);
}

TEST_CASE("min-max scaling") {
  Dataset d;
  d.features.resize(3, 2);
  d.features << 1, 5, 3, 5, 2, 5;
  d.labels = Vector::Zero(3);
  const auto scaler = MinMaxScaler::fit(d);
  scaler.apply(d);
  CHECK(d.features(0, 0) == 0.0);
  CHECK(d.features(1, 0) == 1.0);
  CHECK(d.features(2, 0) == 0.5);
  CHECK(d.features.col(1).isZero(0));
}

TEST_CASE("odd-even relabelling") {
  std::istringstream in("3,0.1,0.2\n4,0.3,0.4\n0,1,1\n");
  std::ostringstream out;
  convert_odd_even(in, out, 0);
  CHECK(out.str() == "1,0.1,0.2\n0,0.3,0.4\n0,1,1\n");
  std::istringstream bad("2.5,1\n");
  std::ostringstream sink;
  CHECK_THROWS_AS(convert_odd_even(bad, sink, 0), ParseError);
}

TEST_CASE("exact run on a smooth problem converges") {
  auto train = std::make_shared<Dataset>(synthesize_dataset(2, 300, 4, 1.0));
  SolverConfig c;
  c.kappa = 1e9;
  c.eps1 = 1e-3;
  const RunOutcome outcome = run_single(train, nullptr, {}, c, 0);
  CHECK(outcome.summary.status == "converged");
  const NetworkLossProblem problem(train, NetworkSpec(4));
  CHECK(full_gradient(problem, outcome.x).norm() <= 1e-3);
  CHECK(std::isnan(outcome.summary.classification_rate));
}

TEST_CASE("trace files round-trip and reproduce the meter") {
  auto train = std::make_shared<Dataset>(synthesize_dataset(4, 400, 5, 1.5));
  const Dataset test = synthesize_dataset(5, 100, 5, 1.5);
  SolverConfig c;
  c.budget_cm = 10;
  c.eps1 = 0;
  for (int p : {1, 2}) {
    c.p = p;
    const RunOutcome outcome = run_single(train, &test, {}, c, 0);
    std::stringstream csv;
    write_trace_csv(csv, outcome.trace);
    const auto parsed = read_trace_csv(csv);
    REQUIRE(parsed.size() == outcome.trace.size());
    const auto cm = recompute_cm(parsed, train->size());
    double previous = 0;
    for (std::size_t k = 0; k < parsed.size(); ++k) {
      CHECK(cm[k] == parsed[k].cm);
      CHECK(parsed[k].cm == outcome.trace[k].cm);
      CHECK(parsed[k].sigma == outcome.trace[k].sigma);
      CHECK(parsed[k].test_loss.has_value());
      CHECK(parsed[k].cm >= previous);
      previous = parsed[k].cm;
    }
    CHECK(parsed.back().cm >= c.budget_cm);
  }
  std::istringstream bad("k,cm\n");
  CHECK_THROWS_AS(read_trace_csv(bad), ParseError);
}

TEST_CASE("summary mean") {
  std::vector<RunSummary> runs(3);
  for (int r = 0; r < 3; ++r) {
    runs[static_cast<std::size_t>(r)].status = "budget";
    runs[static_cast<std::size_t>(r)].classification_rate = 0.9 + 0.01 * r;
    runs[static_cast<std::size_t>(r)].total_cm = 10 + r;
    runs[static_cast<std::size_t>(r)].train_loss = 0.1 * r;
  }
  const RunSummary mean = mean_summary(runs);
  CHECK(std::abs(mean.classification_rate - (0.9 + 0.91 + 0.92) / 3) <= 1e-12);
  CHECK(std::abs(mean.total_cm - 11) <= 1e-12);
  runs.push_back(RunSummary{});
  runs.back().status = "error: x";
  CHECK(mean_summary(runs).classification_rate == mean.classification_rate);
}

TEST_CASE("experiment writes per-run traces and a summary, byte-identically") {
  const fs::path dir = scratch("experiment");
  const Dataset all = synthesize_dataset(9, 500, 6, 2.0);
  write_dataset_csv((dir / "train.csv").string(), slice(all, 0, 400));
  write_dataset_csv((dir / "test.csv").string(), slice(all, 400, 100));

  ExperimentConfig config;
  config.dataset = (dir / "train.csv").string();
  config.test_dataset = (dir / "test.csv").string();
  config.runs = 3;
  config.solver.budget_cm = 5;
  config.out_dir = (dir / "a").string();
  std::ostringstream log;
  const ExperimentResult first = run_experiment(config, log);
  CHECK(first.runs.size() == 3);
  CHECK(log.str().find("mean classification rate") != std::string::npos);
  CHECK(first.runs[1].seed == config.solver.seed + 1);

  config.out_dir = (dir / "b").string();
  std::ostringstream log2;
  run_experiment(config, log2);
  for (int r = 0; r < 3; ++r) {
    const std::string name = "trace_" + std::to_string(r) + ".csv";
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    CHECK(slurp(dir / "a" / name).find('\r') == std::string::npos);
  }
  CHECK(slurp(dir / "a" / "summary.csv") == slurp(dir / "b" / "summary.csv"));

  std::istringstream summary(slurp(dir / "a" / "summary.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(summary, line)) ++rows;
  CHECK(rows == 5);

  config.runs = 0;
  CHECK_THROWS_AS(run_experiment(config, log), ParameterError);
}

TEST_CASE("failing runs are recorded and the experiment continues") {
  const fs::path dir = scratch("failing");
  write_dataset_csv((dir / "train.csv").string(), synthesize_dataset(1, 50, 2, 1.0));
  ExperimentConfig config;
  config.dataset = (dir / "train.csv").string();
  config.runs = 2;
  config.out_dir = dir.string();
  config.solver.kappa = 1e9;
  config.solver.eps1 = 0;
  config.solver.max_iterations = 5;
  config.hidden = {2};
  std::ostringstream log;
  const auto result = run_experiment(config, log);
  CHECK(result.runs.size() == 2);
  CHECK(result.runs[0].status == "iteration_cap");
}

TEST_CASE("command line") {
  const fs::path dir = scratch("cli");
  const std::string train = (dir / "train.csv").string();
  const std::string test = (dir / "test.csv").string();
  std::string text;
  CHECK(cli({"synth", "--seed", "3", "--n", "300", "--d", "5", "--separation", "3", "--n-test", "50",
             "--out", train, "--test-out", test}) == 0);
  CHECK(load_dataset(train, {}).size() == 300);
  CHECK(load_dataset(test, {}).size() == 50);

  const std::string config = (dir / "run.cfg").string();
  std::ofstream(config) << "# budget only\nbudget-cm = 3\nruns = 4\nnet =\n";
  CHECK(cli({"train", "--config", config, "--dataset", train, "--test-dataset", test, "--runs", "2",
             "--out", (dir / "out").string()}, &text) == 0);
  CHECK(fs::exists(dir / "out" / "trace_1.csv"));
  CHECK_FALSE(fs::exists(dir / "out" / "trace_2.csv"));
  CHECK(text.find("mean classification rate") != std::string::npos);

  CHECK(cli({"train", "--dataset", train, "--p", "2", "--net", "3", "--budget-cm", "2", "--scale", "minmax",
             "--out", (dir / "net").string()}) == 0);

  CHECK(cli({"audit", "--n", "500", "--d", "4", "--nu", "0.2", "--trials", "100"}, &text) == 0);
  CHECK(text.find("failure_rate") != std::string::npos);

  std::ofstream(dir / "digits.csv") << "7,1,2\n8,3,4\n";
  CHECK(cli({"convert", "--dataset", (dir / "digits.csv").string(), "--out", (dir / "bin.csv").string()}) == 0);
  CHECK(slurp(dir / "bin.csv") == "1,1,2\n0,3,4\n");

  CHECK(cli({"train", "--dataset", train, "--eta", "2"}, &text) == 1);
  CHECK(text.find("eta") != std::string::npos);
  CHECK(cli({"train", "--dataset", train, "--format", "xml"}) != 0);
  CHECK(cli({"train"}) != 0);
  CHECK(cli({}) != 0);
  CHECK(cli({"--help"}) == 0);
}
