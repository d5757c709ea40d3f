#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "neurogen/errors.hpp"
#include "neurogen/harness.hpp"
#include "test_support.hpp"

using namespace neurogen;
namespace fs = std::filesystem;

namespace {

RunConfig tiny(const fs::path& out) {
  std::istringstream in(R"(
seed = 5
lm.d_model = 16
lm.stories = 30
lm.story_len = 80
pretrain.epochs = 1
data.stimulus_stories = 6
data.story_len = 60
data.heldout_len = 40
encoder.c_raw = 24
data.pca_dim = 8
train.warmup_epochs = 2
train.max_epochs = 3
train.lr = 1e-3
eval.beam = 2
experiment.data_fractions = 0.5,1
experiment.snr_sigmas = 0.1,1
)");
  RunConfig c = RunConfig::parse(in);
  c.out = out;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void run_all(const RunConfig& c) {
  cmd_gen_data(c);
  cmd_train(c);
  cmd_eval(c);
  cmd_reconstruct(c);
}

}  // namespace

TEST(Harness, EndToEndWritesEveryArtefact) {
  const RunConfig c = tiny(neurogen::testing::scratch_dir("harness_e2e"));
  run_all(c);
  const RunPaths p{c.out};
  for (const fs::path& f : {p.config(), p.lm(), p.lm_trace(), p.data() / "manifest.json",
                            p.adapter(), p.train() / "trace.csv", p.train() / "summary.json",
                            p.eval() / "scores.csv", p.eval() / "summary.json",
                            p.reconstruct() / "scores.csv", p.reconstruct() / "transcript.txt"}) {
    EXPECT_TRUE(fs::exists(f)) << f;
  }
  const ExperimentResult e = cmd_experiment("surprise-bins", c);
  EXPECT_EQ(e.rows.size(), 5u);
  EXPECT_TRUE(fs::exists(p.experiment("surprise-bins") / "result.csv"));
  std::ostringstream report;
  cmd_report(c, report);
  EXPECT_NE(report.str().find("brainllm"), std::string::npos);
}

TEST(Harness, CheckpointReloadReproducesValidationLoss) {
  const RunConfig c = tiny(neurogen::testing::scratch_dir("harness_reload"));
  cmd_gen_data(c);
  const TrainTrace trace = cmd_train(c);
  const RunPaths p{c.out};
  const Dataset data = load_run_dataset(p);
  const LanguageModel lm = load_run_lm(p);
  const BrainAdapter adapter = load_run_adapter(p, data, lm);
  EXPECT_NEAR(mean_main_loss(adapter, lm, data.valid), trace.best_valid, 1e-9);
}

TEST(Harness, MissingDatasetNamesPathAndVerb) {
  const RunConfig c = tiny(neurogen::testing::scratch_dir("harness_missing"));
  try {
    cmd_train(c);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find((c.out / "data").string()), std::string::npos) << msg;
    EXPECT_NE(msg.find("gen-data"), std::string::npos) << msg;
  }
}

TEST(Harness, RerunIsByteIdentical) {
  const RunConfig a = tiny(neurogen::testing::scratch_dir("harness_det_a"));
  const RunConfig b = tiny(neurogen::testing::scratch_dir("harness_det_b"));
  run_all(a);
  run_all(b);
  for (const char* rel : {"eval/scores.csv", "train/trace.csv", "reconstruct/scores.csv",
                          "lm/pretrain.csv", "data/manifest.json"}) {
    EXPECT_EQ(slurp(a.out / rel), slurp(b.out / rel)) << rel;
  }
}
