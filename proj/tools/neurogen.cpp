#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neurogen/errors.hpp"
#include "neurogen/harness.hpp"

namespace {

// Process exit codes.
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDataError = 3;
constexpr int kNumericError = 4;
constexpr int kOtherError = 1;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> conditions;
  std::vector<std::string> overrides;
  bool quiet = false;
};

neurogen::RunConfig resolve(const GlobalOptions& g) {
  neurogen::RunConfig cfg;
  if (!g.config.empty()) {
    cfg = neurogen::RunConfig::load(g.config);
  } else {
    cfg.reseed(cfg.seed);
  }
  for (const auto& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw neurogen::ConfigError("--set expects key=value, got " + kv);
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) cfg.reseed(*g.seed);
  if (!g.out.empty()) cfg.out = g.out;
  if (!g.conditions.empty()) {
    cfg.conditions.clear();
    for (const auto& c : g.conditions) cfg.conditions.push_back(neurogen::parse_condition(c));
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brain-conditioned language generation on synthetic recordings"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Key-value config file")->option_text("PATH");
  app.add_option("--seed", g.seed, "Base seed; re-derives every seed not set explicitly");
  app.add_option("--out", g.out, "Output directory")->option_text("DIR");
  app.add_option("--condition", g.conditions,
                 "Condition to evaluate (BrainLLM, PerBrainLLM, StdLLM); repeatable")
      ->option_text("NAME");
  app.add_option("--set", g.overrides, "Override one config key (key=value); repeatable");
  app.add_flag("-q,--quiet", g.quiet, "Suppress progress output");

  auto* gen = app.add_subcommand("gen-data", "Pretrain the base LM and build the dataset");
  auto* train = app.add_subcommand("train", "Warm-up and main adapter training");
  auto* eval = app.add_subcommand("eval", "Score the test split");
  auto* exp = app.add_subcommand("experiment", "Run one analysis");
  std::string exp_name;
  exp->add_option("name", exp_name, "surprise-bins | prompt-length | data-size | no-prompt | snr-sweep")
      ->required();
  auto* rec = app.add_subcommand("reconstruct", "Full-text reconstruction of the held-out story");
  auto* report = app.add_subcommand("report", "Print a summary of existing outputs");
  auto* show = app.add_subcommand("config", "Print the resolved configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    const auto cfg = resolve(g);
    neurogen::Log log = g.quiet ? nullptr : &std::cerr;
    if (*gen) {
      neurogen::cmd_gen_data(cfg, log);
    } else if (*train) {
      neurogen::cmd_train(cfg, log);
    } else if (*eval) {
      const auto report = neurogen::cmd_eval(cfg, log);
      report.write_json(std::cout);
    } else if (*exp) {
      const auto result = neurogen::cmd_experiment(exp_name, cfg, log);
      result.write_csv(std::cout);
    } else if (*rec) {
      const auto out = neurogen::cmd_reconstruct(cfg, log);
      std::printf("brainllm meteor %.4f bleu1 %.4f wer %.4f\n", out.brain_scores.meteor,
                  out.brain_scores.bleu1, out.brain_scores.wer);
      std::printf("null     meteor %.4f bleu1 %.4f wer %.4f\n", out.null_scores.meteor,
                  out.null_scores.bleu1, out.null_scores.wer);
    } else if (*report) {
      neurogen::cmd_report(cfg, std::cout);
    } else if (*show) {
      std::cout << cfg.write();
    }
    return kOk;
  } catch (const neurogen::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const neurogen::PlanError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const neurogen::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const neurogen::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOtherError;
  }
}
