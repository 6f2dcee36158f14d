// Command-line harness: `run` executes an experiment grid over generated
// instance batches, `gen` serializes instance streams for replay or
// cross-implementation comparison, and `replay` runs a learner on a
// previously serialized stream.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "preflearn/experiment.hpp"

using namespace preflearn;

namespace {

struct CliOptions {
  std::string utility = "quad";
  std::string domain = "ck";
  std::string algo = "md-entropy";
  std::string schedule;
  int n = 50;
  int m = 10;
  int T = 500;
  int instances = 50;
  std::string noise = "none";
  std::uint64_t seed = 0;
  std::string out;
  bool plots = false;
  int jobs = 1;
  std::string stream_path;
};

std::string default_out_dir() {
  const char* env = std::getenv("PREFLEARN_OUT");
  return env && *env ? env : "out";
}

Vec read_schedule_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw CLI::ValidationError("--schedule", "cannot open " + path);
  Vec eta;
  double v;
  while (is >> v) eta.push_back(v);
  if (eta.empty()) throw CLI::ValidationError("--schedule", "no step sizes in " + path);
  return eta;
}

ExperimentConfig build_config(const CliOptions& opt) {
  ExperimentConfig cfg;
  cfg.gen.n = opt.n;
  cfg.gen.m = opt.m;
  cfg.gen.T = opt.T;
  cfg.gen.instance_count = opt.instances;
  cfg.gen.seed = opt.seed;
  cfg.gen.utility = utility_kind_from_string(opt.utility);
  cfg.gen.domain = domain_kind_from_string(opt.domain);
  cfg.gen.noise = noise_mode_from_string(opt.noise);
  cfg.algo = algorithm_from_string(opt.algo);
  cfg.jobs = opt.jobs;

  if (opt.schedule.empty()) {
    cfg.schedule = default_schedule(cfg.algo);
  } else if (opt.schedule == "paper") {
    cfg.schedule = ScheduleKind::MdConstantPaper;
  } else if (opt.schedule == "optimal") {
    cfg.schedule = ScheduleKind::MdConstantOptimal;
  } else if (opt.schedule == "sqrt") {
    cfg.schedule = ScheduleKind::ImplicitSqrt;
  } else if (opt.schedule.rfind("file:", 0) == 0) {
    cfg.schedule = ScheduleKind::Custom;
    cfg.custom_steps = read_schedule_file(opt.schedule.substr(5));
  } else {
    throw CLI::ValidationError("--schedule",
                               "expected paper|optimal|sqrt|file:<path>");
  }
  return cfg;
}

int finish_run(const ExperimentResult& result, const std::string& out, bool plots) {
  const Summary summary = aggregate(result);
  EmitOptions emit_opts;
  emit_opts.plots = plots;
  const auto warnings = emit(result, summary, out, emit_opts);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';

  int completed = 0;
  for (const InstanceResult& run : result.instances) {
    if (run.completed)
      ++completed;
    else
      std::cerr << "instance " << run.index << " failed: " << run.diagnostic << '\n';
  }
  std::cout << completed << "/" << result.instances.size()
            << " instances completed; outputs in " << out << '\n';
  if (!result.invariants_ok) {
    for (const std::string& msg : result.invariant_failures)
      std::cerr << "invariant violation: " << msg << '\n';
    return 1;
  }
  return completed == static_cast<int>(result.instances.size()) ? 0 : 1;
}

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--utility", opt.utility, "Utility form")
      ->check(CLI::IsMember({"quad", "ces", "bilinear", "cobb"}));
  cmd->add_option("--domain", opt.domain, "Feasible-region kind")
      ->check(CLI::IsMember({"ck", "cp", "bk", "eck", "interval"}));
  cmd->add_option("--n", opt.n, "Action dimension");
  cmd->add_option("--m", opt.m, "Polytope rows");
  cmd->add_option("--T", opt.T, "Horizon length");
  cmd->add_option("--instances", opt.instances, "Instances per batch");
  cmd->add_option("--seed", opt.seed, "Base seed");
}

void add_run_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--algo", opt.algo, "Learner")
      ->check(CLI::IsMember(
          {"md-entropy", "md-euclid", "implicit-sim", "implicit-pre"}));
  cmd->add_option("--schedule", opt.schedule,
                  "Step schedule: paper|optimal|sqrt|file:<path>");
  cmd->add_option("--noise", opt.noise, "Observation noise")
      ->check(CLI::IsMember({"none", "small", "large", "subopt"}));
  cmd->add_option("--out", opt.out, "Output directory (default $PREFLEARN_OUT or ./out)");
  cmd->add_flag("--plots", opt.plots, "Emit SVG plots");
  cmd->add_option("--jobs", opt.jobs, "Instance-level parallelism");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online learning of utility parameters from revealed actions"};
  app.require_subcommand(1);
  CliOptions opt;

  CLI::App* run = app.add_subcommand("run", "Run an experiment batch");
  add_common_flags(run, opt);
  add_run_flags(run, opt);

  CLI::App* gen = app.add_subcommand("gen", "Serialize instance streams");
  add_common_flags(gen, opt);
  gen->add_option("--out", opt.out, "Output directory");

  CLI::App* replay = app.add_subcommand("replay", "Run a learner on a stream file");
  replay->add_option("--stream", opt.stream_path, "Stream file from `gen`")
      ->required();
  add_run_flags(replay, opt);
  replay->add_option("--seed", opt.seed, "Noise seed");

  CLI11_PARSE(app, argc, argv);
  if (opt.out.empty()) opt.out = default_out_dir();

  try {
    if (run->parsed()) {
      return finish_run(run_experiment(build_config(opt)), opt.out, opt.plots);
    }
    if (gen->parsed()) {
      std::filesystem::create_directories(opt.out);
      GenConfig g = build_config(opt).gen;
      for (int k = 0; k < g.instance_count; ++k) {
        const InstanceStream stream = gen_instance_stream(g, k);
        const std::string path = opt.out + "/stream_" + std::to_string(k) + ".txt";
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + path);
        write_stream(os, stream);
      }
      std::cout << g.instance_count << " streams written to " << opt.out << '\n';
      return 0;
    }
    // replay
    std::ifstream is(opt.stream_path);
    if (!is) throw std::runtime_error("cannot open " + opt.stream_path);
    const InstanceStream stream = read_stream(is);
    ExperimentConfig cfg;
    cfg.gen.T = static_cast<int>(stream.steps.size());
    cfg.gen.n = stream.steps.front().n;
    cfg.gen.instance_count = 1;
    cfg.gen.seed = opt.seed;
    cfg.gen.utility = stream.steps.front().utility.kind;
    cfg.gen.domain = stream.steps.front().domain.kind;
    cfg.gen.noise = noise_mode_from_string(opt.noise);
    cfg.algo = algorithm_from_string(opt.algo);
    cfg.jobs = 1;
    if (!opt.schedule.empty()) {
      const ExperimentConfig parsed = build_config(opt);
      cfg.schedule = parsed.schedule;
      cfg.custom_steps = parsed.custom_steps;
    } else {
      cfg.schedule = default_schedule(cfg.algo);
    }
    return finish_run(run_experiment(cfg, {stream}), opt.out, opt.plots);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
