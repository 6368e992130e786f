#include "iar/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace iar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr const char* kTraceHeader =
    "k,cm,sigma,omega,grad_norm,delta_T,rho,success,terminal,step_norm,inner_attempts,"
    "d1,d2,g,h,g_and_d1,h_minus_g,hessian_products,discarded,train_loss_estimate,"
    "train_loss,test_loss";

std::string optional_field(const std::optional<double>& v) {
  return v ? format_real(*v) : std::string();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Index as_index(const std::string& s) { return static_cast<Index>(parse_real(s)); }

}  // namespace

void ExperimentConfig::validate() const {
  if (dataset.empty()) throw ParameterError("experiment: --dataset is required");
  if (runs < 1) throw ParameterError("experiment: --runs must be at least 1");
  solver.validate();
}

void write_trace_csv(std::ostream& out, const std::vector<TraceEvent>& trace) {
  out << kTraceHeader << '\n';
  for (const auto& e : trace) {
    const auto& w = e.work;
    out << e.k << ',' << format_real(e.cm) << ',' << format_real(e.sigma) << ','
        << format_real(e.omega) << ',' << format_real(e.grad_norm) << ','
        << format_real(e.delta_T) << ',' << format_real(e.rho) << ',' << int(e.success) << ','
        << int(e.terminal) << ',' << format_real(e.step_norm) << ',' << e.inner_attempts << ','
        << w.d1 << ',' << w.d2 << ',' << w.g << ',' << w.h << ',' << w.g_and_d1 << ','
        << w.h_minus_g << ',' << w.hessian_products << ',' << w.discarded << ','
        << format_real(e.train_loss_estimate) << ',' << optional_field(e.train_loss) << ','
        << optional_field(e.test_loss) << '\n';
  }
}

std::vector<TraceEvent> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw ParseError("trace: unexpected header");
  std::vector<TraceEvent> trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 22) throw ParseError("trace line " + std::to_string(line_no) + ": expected 22 fields");
    TraceEvent e;
    e.k = as_index(f[0]);
    e.cm = parse_real(f[1]);
    e.sigma = parse_real(f[2]);
    e.omega = parse_real(f[3]);
    e.grad_norm = parse_real(f[4]);
    e.delta_T = parse_real(f[5]);
    e.rho = parse_real(f[6]);
    e.success = f[7] == "1";
    e.terminal = f[8] == "1";
    e.step_norm = parse_real(f[9]);
    e.inner_attempts = as_index(f[10]);
    e.work.d1 = as_index(f[11]);
    e.work.d2 = as_index(f[12]);
    e.work.g = as_index(f[13]);
    e.work.h = as_index(f[14]);
    e.work.g_and_d1 = as_index(f[15]);
    e.work.h_minus_g = as_index(f[16]);
    e.work.hessian_products = as_index(f[17]);
    e.work.discarded = std::stoull(f[18]);
    e.train_loss_estimate = parse_real(f[19]);
    if (!f[20].empty()) e.train_loss = parse_real(f[20]);
    if (!f[21].empty()) e.test_loss = parse_real(f[21]);
    trace.push_back(e);
  }
  return trace;
}

std::vector<double> recompute_cm(const std::vector<TraceEvent>& trace, Index components) {
  std::vector<double> out;
  out.reserve(trace.size());
  std::uint64_t units = 0;
  for (const auto& e : trace) {
    units += e.work.units();
    out.push_back(static_cast<double>(units) / static_cast<double>(components));
  }
  return out;
}

RunOutcome run_single(std::shared_ptr<const Dataset> train, const Dataset* test,
                      const std::vector<Index>& hidden, const SolverConfig& solver,
                      Index run_index, Index exact_loss_max_samples) {
  const NetworkSpec spec(train->dim(), hidden);
  const NetworkLossProblem problem(train, spec);

  std::mt19937_64 init(solver.seed ^ 0x9e3779b97f4a7c15ULL);
  const Vector x0 = initial_parameters(spec, init);

  RunOptions options;
  if (train->size() <= exact_loss_max_samples) {
    options.monitor = [&](const Vector& x, TraceEvent& event) {
      event.train_loss = full_value(problem, x);
      if (test) event.test_loss = testing_loss(spec, x, *test);
    };
  }

  RunOutcome outcome;
  outcome.summary.run = run_index;
  outcome.summary.seed = solver.seed;
  const SolverResult result = run(problem, solver, x0, options);
  outcome.summary.status = to_string(result.stop);
  outcome.summary.iterations = result.iterations;
  outcome.summary.successful = result.successful;
  outcome.summary.total_cm = result.cm;
  outcome.summary.train_loss = full_value(problem, result.x);
  outcome.summary.test_loss = test ? testing_loss(spec, result.x, *test) : kNaN;
  outcome.summary.classification_rate = test ? classification_rate(spec, result.x, *test) : kNaN;
  outcome.x = result.x;
  outcome.trace = result.trace;
  return outcome;
}

RunSummary mean_summary(const std::vector<RunSummary>& runs) {
  RunSummary mean;
  mean.status = "mean";
  Index count = 0;
  double iterations = 0, successful = 0;
  for (const auto& r : runs) {
    if (!r.ok()) continue;
    ++count;
    iterations += static_cast<double>(r.iterations);
    successful += static_cast<double>(r.successful);
    mean.total_cm += r.total_cm;
    mean.train_loss += r.train_loss;
    mean.test_loss += r.test_loss;
    mean.classification_rate += r.classification_rate;
  }
  if (count == 0) {
    mean.total_cm = mean.train_loss = mean.test_loss = mean.classification_rate = kNaN;
    return mean;
  }
  const auto c = static_cast<double>(count);
  mean.iterations = static_cast<Index>(std::llround(iterations / c));
  mean.successful = static_cast<Index>(std::llround(successful / c));
  mean.total_cm /= c;
  mean.train_loss /= c;
  mean.test_loss /= c;
  mean.classification_rate /= c;
  return mean;
}

void write_summary_csv(std::ostream& out, const std::vector<RunSummary>& runs,
                       const RunSummary& mean) {
  out << "run,seed,status,iterations,successful,total_cm,train_loss,test_loss,classification_rate\n";
  auto row = [&](const std::string& run, const std::string& seed, const RunSummary& r) {
    std::string status = r.status;
    for (char& ch : status) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << run << ',' << seed << ',' << status << ',' << r.iterations << ',' << r.successful
        << ',' << format_real(r.total_cm) << ',' << format_real(r.train_loss) << ','
        << format_real(r.test_loss) << ',' << format_real(r.classification_rate) << '\n';
  };
  for (const auto& r : runs) row(std::to_string(r.run), std::to_string(r.seed), r);
  row("mean", "", mean);
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  auto train = std::make_shared<Dataset>(load_dataset(config.dataset, config.load));
  std::optional<Dataset> test;
  if (!config.test_dataset.empty()) {
    LoadOptions test_load = config.load;
    if (test_load.format == DataFormat::sparse) test_load.dim = train->dim();
    test = load_dataset(config.test_dataset, test_load);
  }
  if (config.scale == Scaling::minmax) {
    const auto scaler = MinMaxScaler::fit(*train);
    scaler.apply(*train);
    if (test) scaler.apply(*test);
  }
  std::shared_ptr<const Dataset> train_data = train;

  std::filesystem::create_directories(config.out_dir);
  const std::filesystem::path dir(config.out_dir);
  ExperimentResult result;
  for (Index r = 0; r < config.runs; ++r) {
    SolverConfig solver = config.solver;
    solver.seed = config.solver.seed + static_cast<std::uint64_t>(r);
    RunSummary summary;
    try {
      RunOutcome outcome = run_single(train_data, test ? &*test : nullptr, config.hidden, solver,
                                      r, config.exact_loss_max_samples);
      std::ofstream trace_out(dir / ("trace_" + std::to_string(r) + ".csv"), std::ios::binary);
      write_trace_csv(trace_out, outcome.trace);
      summary = outcome.summary;
    } catch (const std::exception& e) {
      summary.run = r;
      summary.seed = solver.seed;
      summary.status = std::string("error: ") + e.what();
      summary.total_cm = summary.train_loss = summary.test_loss = summary.classification_rate = kNaN;
    }
    log << "run " << r << " seed " << summary.seed << ": " << summary.status
        << ", cm " << format_real(summary.total_cm)
        << ", rate " << format_real(summary.classification_rate) << '\n';
    result.runs.push_back(summary);
  }
  result.mean = mean_summary(result.runs);
  std::ofstream summary_out(dir / "summary.csv", std::ios::binary);
  write_summary_csv(summary_out, result.runs, result.mean);
  log << "mean classification rate: " << format_real(result.mean.classification_rate) << '\n';
  return result;
}

}  // namespace iar
