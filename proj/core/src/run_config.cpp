#include "neurogen/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "neurogen/csv.hpp"
#include "neurogen/errors.hpp"
#include "neurogen/random.hpp"

namespace neurogen {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& part : csv_split(v)) out.push_back(to_double(key, trim(part)));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

// Salts for derived seeds; changing one changes every run that relies on it.
struct SeedSlot {
  const char* key;
  std::uint64_t salt;
  std::uint64_t RunConfig::*direct;
};

}  // namespace

namespace {
std::vector<std::pair<const char*, std::uint64_t>> seed_salts() {
  return {{"grammar.seed", 1},    {"lm.seed", 2},         {"lm.corpus_seed", 3},
          {"pretrain.seed", 4},   {"data.stimulus_seed", 5}, {"data.heldout_seed", 6},
          {"encoder.seed", 7},    {"split.seed", 8},      {"adapter.seed", 9},
          {"train.seed", 10},     {"eval.permutation_seed", 11}};
}
}  // namespace

void RunConfig::reseed(std::uint64_t base) {
  seed = base;
  auto slot = [this](const std::string& key) -> std::uint64_t& {
    if (key == "grammar.seed") return data.grammar.seed;
    if (key == "lm.seed") return lm.seed;
    if (key == "lm.corpus_seed") return lm_corpus_seed;
    if (key == "pretrain.seed") return pretrain.seed;
    if (key == "data.stimulus_seed") return data.stimulus_seed;
    if (key == "data.heldout_seed") return data.heldout_seed;
    if (key == "encoder.seed") return data.encoder.seed;
    if (key == "split.seed") return data.split.seed;
    if (key == "adapter.seed") return adapter_seed;
    if (key == "train.seed") return train.seed;
    return eval.permutation_seed;
  };
  for (const auto& [key, salt] : seed_salts()) {
    if (!explicit_seeds_[key]) slot(key) = mix_seed(base, salt);
  }
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  auto u = [&] { return to_u64(key, v); };
  auto d = [&] { return to_double(key, v); };
  for (const auto& [name, salt] : seed_salts()) {
    if (key == name) explicit_seeds_[key] = true;
  }

  if (key == "seed") {
    reseed(u());
  } else if (key == "out") {
    out = v;
  } else if (key == "grammar.seed") {
    data.grammar.seed = u();
  } else if (key == "grammar.topics") {
    data.grammar.topics = u();
  } else if (key == "grammar.nouns") {
    data.grammar.nouns = u();
  } else if (key == "grammar.verbs") {
    data.grammar.verbs = u();
  } else if (key == "grammar.adjectives") {
    data.grammar.adjectives = u();
  } else if (key == "grammar.names") {
    data.grammar.names = u();
  } else if (key == "lm.d_model") {
    lm.d_model = u();
  } else if (key == "lm.layers") {
    lm.layers = u();
  } else if (key == "lm.heads") {
    lm.heads = u();
  } else if (key == "lm.context_len") {
    lm.context_len = u();
  } else if (key == "lm.ffn_mult") {
    lm.ffn_mult = u();
  } else if (key == "lm.seed") {
    lm.seed = u();
  } else if (key == "lm.stories") {
    lm_stories = u();
  } else if (key == "lm.story_len") {
    lm_story_len = u();
  } else if (key == "lm.corpus_seed") {
    lm_corpus_seed = u();
  } else if (key == "pretrain.lr") {
    pretrain.lr = d();
  } else if (key == "pretrain.epochs") {
    pretrain.epochs = u();
  } else if (key == "pretrain.batch") {
    pretrain.batch = u();
  } else if (key == "pretrain.window") {
    pretrain.window = u();
  } else if (key == "pretrain.seed") {
    pretrain.seed = u();
  } else if (key == "data.stimulus_stories") {
    data.stimulus_stories = u();
  } else if (key == "data.story_len") {
    data.story_len = u();
  } else if (key == "data.stimulus_seed") {
    data.stimulus_seed = u();
  } else if (key == "data.heldout_len") {
    data.heldout_len = u();
  } else if (key == "data.heldout_seed") {
    data.heldout_seed = u();
  } else if (key == "data.mode") {
    data.mode = parse_sample_mode(v);
  } else if (key == "data.window") {
    data.window = u();
  } else if (key == "data.pca_dim") {
    data.pca_dim = u();
  } else if (key == "encoder.c_raw") {
    data.encoder.c_raw = u();
  } else if (key == "encoder.h") {
    data.encoder.h = to_list(key, v);
  } else if (key == "encoder.noise_sigma") {
    data.encoder.noise_sigma = d();
  } else if (key == "encoder.signal_scale") {
    data.encoder.signal_scale = d();
  } else if (key == "encoder.seed") {
    data.encoder.seed = u();
  } else if (key == "split.train") {
    data.split.train = d();
  } else if (key == "split.valid") {
    data.split.valid = d();
  } else if (key == "split.test") {
    data.split.test = d();
  } else if (key == "split.seed") {
    data.split.seed = u();
  } else if (key == "adapter.seed") {
    adapter_seed = u();
  } else if (key == "train.lr") {
    train.lr = d();
  } else if (key == "train.batch") {
    train.batch = u();
  } else if (key == "train.warmup_epochs") {
    train.warmup_epochs = u();
  } else if (key == "train.patience") {
    train.patience = u();
  } else if (key == "train.max_epochs") {
    train.max_epochs = u();
  } else if (key == "train.seed") {
    train.seed = u();
  } else if (key == "eval.beam") {
    eval.beam = u();
  } else if (key == "eval.max_new_tokens") {
    eval.max_new_tokens = u();
  } else if (key == "eval.permutation_seed") {
    eval.permutation_seed = u();
  } else if (key == "eval.identity_permutation") {
    eval.identity_permutation = to_bool(key, v);
  } else if (key == "eval.generate") {
    eval.generate = to_bool(key, v);
  } else if (key == "eval.tie_eps") {
    eval.tie_eps = d();
  } else if (key == "eval.fdr_q") {
    eval.fdr_q = d();
  } else if (key == "eval.conditions") {
    conditions.clear();
    for (const auto& part : csv_split(v)) conditions.push_back(parse_condition(trim(part)));
  } else if (key == "reconstruct.window") {
    reconstruct.window = u();
  } else if (key == "reconstruct.beam") {
    reconstruct.beam = u();
  } else if (key == "experiment.data_fractions") {
    data_fractions = to_list(key, v);
  } else if (key == "experiment.snr_sigmas") {
    snr_sigmas = to_list(key, v);
  } else if (key == "experiment.surprise_bins") {
    surprise_bins = u();
  } else if (key == "experiment.no_prompt_adapter") {
    if (v != "shared" && v != "retrain") {
      throw ConfigError("experiment.no_prompt_adapter must be shared or retrain");
    }
    no_prompt_adapter = v;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig RunConfig::parse(std::istream& in, const std::string& origin) {
  RunConfig cfg;
  cfg.reseed(cfg.seed);
  std::string line;
  std::size_t lineno = 0;
  // `seed` is applied first so explicit component seeds always win.
  std::vector<std::pair<std::string, std::string>> entries;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  for (const auto& [k, v] : entries) {
    if (k == "seed") cfg.set(k, v);
  }
  for (const auto& [k, v] : entries) {
    if (k != "seed") cfg.set(k, v);
  }
  cfg.reseed(cfg.seed);
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

void RunConfig::validate() const {
  LMConfig probe = lm;
  probe.vocab_size = Vocabulary::kReserved;
  probe.validate();
  data.encoder.validate();
  data.split.validate();
  train.validate();
  if (lm_stories == 0) throw ConfigError("lm.stories must be >= 1");
  if (data.stimulus_stories == 0) throw ConfigError("data.stimulus_stories must be >= 1");
  if (data.pca_dim == 0) throw ConfigError("data.pca_dim must be >= 1");
  if (data.window == 0 || data.window > 3) throw ConfigError("data.window must be 1, 2 or 3");
  if (eval.beam == 0 || eval.max_new_tokens == 0) throw ConfigError("eval.beam and eval.max_new_tokens must be >= 1");
  if (reconstruct.window == 0 || reconstruct.beam == 0) {
    throw ConfigError("reconstruct.window and reconstruct.beam must be >= 1");
  }
  if (surprise_bins == 0) throw ConfigError("experiment.surprise_bins must be >= 1");
  for (double f : data_fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("experiment.data_fractions must lie in (0, 1]");
  }
  for (double s : snr_sigmas) {
    if (!(s >= 0.0)) throw ConfigError("experiment.snr_sigmas must be >= 0");
  }
  if (pretrain.window + 1 > lm.context_len) throw ConfigError("pretrain.window must be < lm.context_len");
}

std::string RunConfig::write() const {
  std::ostringstream os;
  auto kv = [&os](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto n = [](std::uint64_t v) { return std::to_string(v); };
  auto f = [](double v) { return format_double(v); };
  std::string conds;
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    if (i) conds += ',';
    conds += condition_name(conditions[i]);
  }
  kv("seed", n(seed));
  kv("out", out.string());
  kv("grammar.seed", n(data.grammar.seed));
  kv("grammar.topics", n(data.grammar.topics));
  kv("grammar.nouns", n(data.grammar.nouns));
  kv("grammar.verbs", n(data.grammar.verbs));
  kv("grammar.adjectives", n(data.grammar.adjectives));
  kv("grammar.names", n(data.grammar.names));
  kv("lm.d_model", n(lm.d_model));
  kv("lm.layers", n(lm.layers));
  kv("lm.heads", n(lm.heads));
  kv("lm.context_len", n(lm.context_len));
  kv("lm.ffn_mult", n(lm.ffn_mult));
  kv("lm.seed", n(lm.seed));
  kv("lm.stories", n(lm_stories));
  kv("lm.story_len", n(lm_story_len));
  kv("lm.corpus_seed", n(lm_corpus_seed));
  kv("pretrain.lr", f(pretrain.lr));
  kv("pretrain.epochs", n(pretrain.epochs));
  kv("pretrain.batch", n(pretrain.batch));
  kv("pretrain.window", n(pretrain.window));
  kv("pretrain.seed", n(pretrain.seed));
  kv("data.stimulus_stories", n(data.stimulus_stories));
  kv("data.story_len", n(data.story_len));
  kv("data.stimulus_seed", n(data.stimulus_seed));
  kv("data.heldout_len", n(data.heldout_len));
  kv("data.heldout_seed", n(data.heldout_seed));
  kv("data.mode", sample_mode_name(data.mode));
  kv("data.window", n(data.window));
  kv("data.pca_dim", n(data.pca_dim));
  kv("encoder.c_raw", n(data.encoder.c_raw));
  kv("encoder.h", join(data.encoder.h));
  kv("encoder.noise_sigma", f(data.encoder.noise_sigma));
  kv("encoder.signal_scale", f(data.encoder.signal_scale));
  kv("encoder.seed", n(data.encoder.seed));
  kv("split.train", f(data.split.train));
  kv("split.valid", f(data.split.valid));
  kv("split.test", f(data.split.test));
  kv("split.seed", n(data.split.seed));
  kv("adapter.seed", n(adapter_seed));
  kv("train.lr", f(train.lr));
  kv("train.batch", n(train.batch));
  kv("train.warmup_epochs", n(train.warmup_epochs));
  kv("train.patience", n(train.patience));
  kv("train.max_epochs", n(train.max_epochs));
  kv("train.seed", n(train.seed));
  kv("eval.beam", n(eval.beam));
  kv("eval.max_new_tokens", n(eval.max_new_tokens));
  kv("eval.permutation_seed", n(eval.permutation_seed));
  kv("eval.identity_permutation", eval.identity_permutation ? "true" : "false");
  kv("eval.generate", eval.generate ? "true" : "false");
  kv("eval.tie_eps", f(eval.tie_eps));
  kv("eval.fdr_q", f(eval.fdr_q));
  kv("eval.conditions", conds);
  kv("reconstruct.window", n(reconstruct.window));
  kv("reconstruct.beam", n(reconstruct.beam));
  kv("experiment.data_fractions", join(data_fractions));
  kv("experiment.snr_sigmas", join(snr_sigmas));
  kv("experiment.surprise_bins", n(surprise_bins));
  kv("experiment.no_prompt_adapter", no_prompt_adapter);
  return os.str();
}

}  // namespace neurogen
