#include "neurogen/harness.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "neurogen/corpus.hpp"
#include "neurogen/csv.hpp"
#include "neurogen/errors.hpp"
#include "neurogen/pretrain.hpp"
#include "neurogen/text_metrics.hpp"

namespace neurogen {
namespace fs = std::filesystem;
namespace {

void log_line(Log log, const std::string& msg) {
  if (log) *log << msg << std::endl;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  ensure_dir(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  return os;
}

void write_config(const RunConfig& config, const fs::path& path) {
  auto os = open_out(path);
  os << config.write();
}

void require(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) {
    throw DataError("expected " + path.string() + " (run `neurogen " + producer +
                    "` with the same --out first)");
  }
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Dataset load_run_dataset(const RunPaths& paths) {
  require(paths.data() / "manifest.json", "gen-data");
  return load_dataset(paths.data());
}

LanguageModel load_run_lm(const RunPaths& paths) {
  require(paths.lm(), "gen-data");
  LanguageModel lm = LanguageModel::load(paths.lm());
  lm.set_trainable(false);
  return lm;
}

BrainAdapter load_run_adapter(const RunPaths& paths, const Dataset& data, const LanguageModel& lm) {
  require(paths.adapter(), "train");
  BrainAdapter adapter = BrainAdapter::load(paths.adapter());
  if (adapter.channels() != data.channels() || adapter.width() != lm.d_model() ||
      adapter.frames() != data.frames()) {
    std::ostringstream msg;
    msg << "adapter checkpoint (c=" << adapter.channels() << ", d=" << adapter.width()
        << ", t=" << adapter.frames() << ") does not match the run (c=" << data.channels()
        << ", d=" << lm.d_model() << ", t=" << data.frames() << ")";
    throw ConfigError(msg.str());
  }
  return adapter;
}

void cmd_gen_data(const RunConfig& config, Log log) {
  config.validate();
  const RunPaths paths{config.out};
  ensure_dir(config.out);
  write_config(config, paths.config());

  const StoryGrammar grammar(config.data.grammar);
  LMConfig lm_config = config.lm;
  lm_config.vocab_size = grammar.vocabulary().size();
  log_line(log, "vocabulary: " + std::to_string(lm_config.vocab_size) + " tokens");

  const auto stories = synth_corpus(grammar, config.lm_corpus_seed, config.lm_stories,
                                    config.lm_story_len);
  log_line(log, "pretraining base LM on " + std::to_string(stories.size()) + " stories");
  PretrainResult pre = train_base_lm(story_documents(stories), lm_config, config.pretrain);
  {
    auto os = open_out(paths.lm_trace());
    os << "epoch,loss\n";
    for (std::size_t e = 0; e < pre.epoch_loss.size(); ++e) {
      os << e << ',' << format_double(pre.epoch_loss[e]) << '\n';
      log_line(log, "lm epoch " + std::to_string(e) + " loss " + format_double(pre.epoch_loss[e]));
    }
  }
  pre.model.save(paths.lm());

  const Dataset data = build_dataset(config.data, grammar, pre.model);
  log_line(log, "samples train/valid/test: " + std::to_string(data.train.size()) + "/" +
                    std::to_string(data.valid.size()) + "/" + std::to_string(data.test.size()));
  save_dataset(data, paths.data());
}

TrainTrace cmd_train(const RunConfig& config, Log log) {
  config.validate();
  const RunPaths paths{config.out};
  const Dataset data = load_run_dataset(paths);
  const LanguageModel lm = load_run_lm(paths);

  TrainTrace trace;
  const BrainAdapter adapter =
      fit_adapter(config, lm, data, data.train, data.train, data.valid, &trace, log);
  ensure_dir(paths.train());
  adapter.save(paths.adapter());
  {
    auto os = open_out(paths.train() / "trace.csv");
    trace.write_csv(os);
  }
  nlohmann::ordered_json j;
  j["warmup_epochs"] = trace.stage("warmup").size();
  j["main_epochs"] = trace.stage("main").size();
  j["best_epoch"] = trace.best_epoch;
  j["best_valid_loss"] = trace.best_valid;
  j["lm_checksum_before"] = trace.lm_checksum_before;
  j["lm_checksum_after"] = trace.lm_checksum_after;
  j["adapter_parameters"] = adapter_param_count(adapter);
  auto os = open_out(paths.train() / "summary.json");
  os << j.dump(2) << '\n';
  return trace;
}

ScoreReport cmd_eval(const RunConfig& config, Log log) {
  config.validate();
  const RunPaths paths{config.out};
  const Dataset data = load_run_dataset(paths);
  const LanguageModel lm = load_run_lm(paths);
  const BrainAdapter adapter = load_run_adapter(paths, data, lm);
  log_line(log, "evaluating " + std::to_string(data.test.size()) + " test samples");
  ScoreReport report = evaluate(lm, adapter, data.test, config.conditions, config.eval);
  {
    auto os = open_out(paths.eval() / "scores.csv");
    report.write_csv(os, &data.vocab);
  }
  auto os = open_out(paths.eval() / "summary.json");
  report.write_json(os);
  return report;
}

ExperimentResult cmd_experiment(const std::string& name, const RunConfig& config, Log log) {
  config.validate();
  bool known = false;
  for (const auto& n : kExperimentNames) known = known || n == name;
  if (!known) {
    throw ConfigError("unknown experiment '" + name +
                      "' (expected surprise-bins, prompt-length, data-size, no-prompt or snr-sweep)");
  }
  const RunPaths paths{config.out};
  const Dataset data = load_run_dataset(paths);
  const LanguageModel lm = load_run_lm(paths);
  const BrainAdapter adapter = load_run_adapter(paths, data, lm);
  const fs::path dir = paths.experiment(name);
  ensure_dir(dir);
  ExperimentResult result = run_experiment(name, config, lm, data, adapter, dir, log);
  {
    auto os = open_out(dir / "result.csv");
    result.write_csv(os);
  }
  auto os = open_out(dir / "summary.json");
  result.write_json(os);
  return result;
}

ReconstructOutcome cmd_reconstruct(const RunConfig& config, Log log) {
  config.validate();
  const RunPaths paths{config.out};
  const Dataset data = load_run_dataset(paths);
  const LanguageModel lm = load_run_lm(paths);
  const BrainAdapter adapter = load_run_adapter(paths, data, lm);
  if (data.heldout.size() < 2) {
    throw DataError("held-out story has " + std::to_string(data.heldout.size()) +
                    " frames; reconstruction needs at least 2");
  }

  const auto frame_data = [](const std::vector<DataSample>& samples) {
    std::pair<std::vector<Matrix>, std::vector<double>> out;
    for (const DataSample* s : distinct_frames(samples)) {
      out.first.push_back(s->recording);
      out.second.push_back(static_cast<double>(s->tr_budget));
    }
    return out;
  };
  const auto [train_x, train_y] = frame_data(data.train);
  const auto [valid_x, valid_y] = frame_data(data.valid);

  ReconstructOutcome out;
  out.word_rate = select_word_rate(train_x, train_y, valid_x, valid_y, kWordRateLambdas);
  log_line(log, "word-rate lambda " + format_double(out.word_rate.model.lambda));

  for (const auto& f : data.heldout) {
    out.reference.insert(out.reference.end(), f.continuation.begin(), f.continuation.end());
  }
  log_line(log, "reconstructing " + std::to_string(data.heldout.size()) + " frames");
  out.brain = reconstruct_full_text(lm, adapter, data.heldout, out.word_rate.model,
                                    config.reconstruct, Condition::BrainLLM);
  out.null = reconstruct_full_text(lm, adapter, data.heldout, out.word_rate.model,
                                   config.reconstruct, Condition::StdLLM);

  const auto score = [&out](const Reconstruction& r) {
    const auto tokens = r.tokens();
    return ReconstructionScores{bleu1(tokens, out.reference), wer(tokens, out.reference),
                                meteor(tokens, out.reference)};
  };
  out.brain_scores = score(out.brain);
  out.null_scores = score(out.null);

  const fs::path dir = paths.reconstruct();
  {
    auto os = open_out(dir / "frames.csv");
    os << "frame_id,predicted_rate,true_rate,text_brainllm,text_null,reference\n";
    for (std::size_t k = 0; k < data.heldout.size(); ++k) {
      os << csv_row({std::to_string(out.brain.frames[k].frame_id),
                     std::to_string(out.brain.frames[k].predicted_rate),
                     std::to_string(data.heldout[k].tr_budget),
                     detokenize(out.brain.frames[k].tokens, data.vocab),
                     detokenize(out.null.frames[k].tokens, data.vocab),
                     detokenize(data.heldout[k].continuation, data.vocab)})
         << '\n';
    }
  }
  {
    auto os = open_out(dir / "reconstruction.jsonl");
    for (const auto& [name, r] : {std::pair<std::string, const Reconstruction*>{"brainllm", &out.brain},
                                  {"null", &out.null}}) {
      for (const auto& f : r->frames) {
        nlohmann::ordered_json j;
        j["condition"] = name;
        j["frame_id"] = f.frame_id;
        j["predicted_word_rate"] = f.predicted_rate;
        j["tokens"] = f.tokens;
        os << j.dump() << '\n';
      }
    }
  }
  {
    auto os = open_out(dir / "scores.csv");
    os << "condition,tokens,bleu1,wer,meteor\n";
    const auto row = [&os](const std::string& name, const Reconstruction& r,
                           const ReconstructionScores& s) {
      os << csv_row({name, std::to_string(r.tokens().size()), format_double(s.bleu1),
                     format_double(s.wer), format_double(s.meteor)})
         << '\n';
    };
    row("brainllm", out.brain, out.brain_scores);
    row("null", out.null, out.null_scores);
  }
  {
    auto os = open_out(dir / "word_rate.csv");
    os << "lambda,valid_mse\n";
    for (std::size_t i = 0; i < out.word_rate.lambdas.size(); ++i) {
      os << format_double(out.word_rate.lambdas[i]) << ','
         << format_double(out.word_rate.valid_mse[i]) << '\n';
    }
  }
  auto os = open_out(dir / "transcript.txt");
  os << "[reference]\n" << detokenize(out.reference, data.vocab) << "\n\n";
  os << "[brainllm]\n" << detokenize(out.brain.tokens(), data.vocab) << "\n\n";
  os << "[null]\n" << detokenize(out.null.tokens(), data.vocab) << '\n';
  return out;
}

void cmd_report(const RunConfig& config, std::ostream& os) {
  const RunPaths paths{config.out};
  std::ostringstream rep;
  rep << std::fixed << std::setprecision(4);
  bool any = false;

  const fs::path eval_summary = paths.eval() / "summary.json";
  if (fs::exists(eval_summary)) {
    any = true;
    const auto j = nlohmann::json::parse(slurp(eval_summary));
    rep << "== eval (" << j["samples"].get<std::size_t>() << " test samples)\n";
    rep << std::left << std::setw(14) << "condition" << std::right << std::setw(10) << "surprise"
        << std::setw(10) << "bleu1" << std::setw(10) << "rouge1" << std::setw(10) << "rougeL"
        << std::setw(10) << "wer" << '\n';
    for (const auto& [name, c] : j["conditions"].items()) {
      rep << std::left << std::setw(14) << name << std::right << std::setw(10)
          << c["mean_surprise"].get<double>();
      for (const char* k : {"mean_bleu1", "mean_rouge1", "mean_rougel", "mean_wer"}) {
        if (c.contains(k) && c[k].is_number()) {
          rep << std::setw(10) << c[k].get<double>();
        } else {
          rep << std::setw(10) << "-";
        }
      }
      rep << '\n';
    }
    for (const auto& [name, c] : j["comparisons"].items()) {
      rep << name << ": win " << c["win_rate"].get<double>() << ", sign-test p "
          << std::scientific << std::setprecision(3) << c["sign_test_p"].get<double>()
          << ", BH p " << c["bh_adjusted_p"].get<double>() << std::fixed << std::setprecision(4)
          << (c["bh_rejected"].get<bool>() ? " (rejected)" : "") << '\n';
    }
    rep << '\n';
  }

  for (const auto& name : kExperimentNames) {
    const fs::path csv = paths.experiment(name) / "result.csv";
    if (!fs::exists(csv)) continue;
    any = true;
    rep << "== experiment " << name << '\n';
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    const auto header = csv_split(line);
    rep << std::left << std::setw(14) << header.at(0) << std::right << std::setw(6) << "n"
        << std::setw(10) << "win" << std::setw(12) << "p" << std::setw(10) << "bleu1_b"
        << std::setw(10) << "bleu1_p" << '\n';
    while (std::getline(in, line)) {
      const auto f = csv_split(line);
      rep << std::left << std::setw(14) << f.at(0) << std::right << std::setw(6) << f.at(2)
          << std::setw(10) << std::stod(f.at(6)) << std::setw(12) << std::scientific
          << std::setprecision(3) << std::stod(f.at(7)) << std::fixed << std::setprecision(4)
          << std::setw(10) << std::stod(f.at(10)) << std::setw(10) << std::stod(f.at(11)) << '\n';
    }
    const fs::path summary = paths.experiment(name) / "summary.json";
    if (fs::exists(summary)) {
      const auto j = nlohmann::json::parse(slurp(summary));
      if (j.contains("stats")) {
        for (const auto& [k, v] : j["stats"].items()) {
          rep << k << " = " << (v.is_number() ? format_double(v.get<double>()) : "nan") << '\n';
        }
      }
    }
    rep << '\n';
  }

  const fs::path rec = paths.reconstruct() / "scores.csv";
  if (fs::exists(rec)) {
    any = true;
    rep << "== full-text reconstruction\n";
    std::ifstream in(rec);
    std::string line;
    std::getline(in, line);
    rep << std::left << std::setw(14) << "condition" << std::right << std::setw(8) << "tokens"
        << std::setw(10) << "bleu1" << std::setw(10) << "wer" << std::setw(10) << "meteor" << '\n';
    while (std::getline(in, line)) {
      const auto f = csv_split(line);
      rep << std::left << std::setw(14) << f.at(0) << std::right << std::setw(8) << f.at(1)
          << std::setw(10) << std::stod(f.at(2)) << std::setw(10) << std::stod(f.at(3))
          << std::setw(10) << std::stod(f.at(4)) << '\n';
    }
  }

  if (!any) throw DataError("nothing to report under " + config.out.string());
  os << rep.str();
  auto file = open_out(config.out / "report.txt");
  file << rep.str();
}

}  // namespace neurogen
