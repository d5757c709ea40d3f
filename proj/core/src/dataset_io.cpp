#include "neurogen/dataset_io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "neurogen/checksum.hpp"
#include "neurogen/errors.hpp"

namespace neurogen {
namespace {

using nlohmann::json;

constexpr std::uint64_t kHeldoutFrameBase = 1ULL << 32;
const char* const kSplitNames[] = {"train", "valid", "test", "heldout"};

std::vector<StimulusUnit> units_of(const std::vector<Story>& stories, SampleMode mode,
                                   std::uint64_t id_base) {
  std::vector<StimulusUnit> units;
  for (std::size_t s = 0; s < stories.size(); ++s) {
    const auto& parts = mode == SampleMode::Continuous ? stories[s].frames : stories[s].sentences;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      StimulusUnit u;
      u.frame_id = id_base + units.size();
      u.story = static_cast<std::uint32_t>(s);
      u.index_in_story = static_cast<std::uint32_t>(i);
      u.tokens = parts[i];
      units.push_back(std::move(u));
    }
  }
  return units;
}

void project_all(std::vector<DataSample>& samples, const PcaBasis& pca) {
  for (auto& s : samples) s.recording = pca_project(pca, s.recording);
}

json encoder_json(const EncoderSpec& e) {
  return {{"c_raw", e.c_raw},
          {"h", e.h},
          {"noise_sigma", e.noise_sigma},
          {"signal_scale", e.signal_scale},
          {"seed", e.seed}};
}

EncoderSpec encoder_from_json(const json& j) {
  EncoderSpec e;
  e.c_raw = j.at("c_raw").get<std::size_t>();
  e.h = j.at("h").get<std::vector<double>>();
  e.noise_sigma = j.at("noise_sigma").get<double>();
  e.signal_scale = j.at("signal_scale").get<double>();
  e.seed = j.at("seed").get<std::uint64_t>();
  return e;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

SampleMode parse_sample_mode(const std::string& name) {
  if (name == "continuous") return SampleMode::Continuous;
  if (name == "sentencewise") return SampleMode::Sentencewise;
  throw ConfigError("unknown sample mode '" + name + "' (expected continuous or sentencewise)");
}

std::string sample_mode_name(SampleMode m) {
  return m == SampleMode::Continuous ? "continuous" : "sentencewise";
}

Dataset build_dataset(const DataConfig& config, const StoryGrammar& grammar,
                      const LanguageModel& lm) {
  config.encoder.validate();
  const auto stories =
      synth_corpus(grammar, config.stimulus_seed, config.stimulus_stories, config.story_len);
  auto units = units_of(stories, config.mode, 0);
  if (units.empty()) throw DataError("stimulus corpus produced no frames");

  std::vector<std::vector<TokenId>> texts;
  for (const auto& u : units) texts.push_back(u.tokens);
  const double scale = semantic_rms(lm, texts);
  const BrainEncoder encoder(config.encoder, lm.d_model(), scale);
  for (auto& u : units) u.recording = encoder.encode(u.tokens, lm, u.frame_id);

  Dataset data;
  data.vocab = grammar.vocabulary();
  data.encoder = config.encoder;
  data.mode = config.mode;
  std::vector<DataSample> samples;
  if (config.mode == SampleMode::Continuous) {
    samples = build_samples_continuous(units, config.window);
  } else {
    auto sw = build_samples_sentencewise(units);
    samples = std::move(sw.samples);
    data.skipped_sentences = sw.skipped;
  }
  auto split = split_dataset(samples, config.split);
  data.train = std::move(split.train);
  data.valid = std::move(split.valid);
  data.test = std::move(split.test);
  if (data.train.empty() || data.valid.empty() || data.test.empty()) {
    throw DataError("split left an empty partition; generate more stimulus stories");
  }

  const auto train_frames = distinct_frames(data.train);
  const std::size_t t = config.encoder.frames();
  Matrix rows(train_frames.size() * t, config.encoder.c_raw);
  for (std::size_t k = 0; k < train_frames.size(); ++k) {
    for (std::size_t i = 0; i < t; ++i) rows.set_row(k * t + i, train_frames[k]->recording.row(i));
  }
  data.pca = fit_pca(rows, config.pca_dim);
  project_all(data.train, data.pca);
  project_all(data.valid, data.pca);
  project_all(data.test, data.pca);

  Rng held_rng(mix_seed(config.heldout_seed, 0x4E1D));
  const std::vector<Story> held{grammar.generate(held_rng, config.heldout_len)};
  for (const auto& u : units_of(held, SampleMode::Continuous, kHeldoutFrameBase)) {
    DataSample s;
    s.frame_id = u.frame_id;
    s.story = 0;
    s.continuation = u.tokens;
    s.tr_budget = u.tokens.size();
    s.recording = pca_project(data.pca, encoder.encode(u.tokens, lm, u.frame_id));
    data.heldout.push_back(std::move(s));
  }
  return data;
}

std::vector<const DataSample*> distinct_frames(const std::vector<DataSample>& samples) {
  std::vector<const DataSample*> out;
  std::set<std::uint64_t> seen;
  for (const auto& s : samples) {
    if (seen.insert(s.frame_id).second) out.push_back(&s);
  }
  return out;
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::ostringstream features(std::ios::binary);
  std::map<std::uint64_t, std::uint64_t> offset;
  const std::vector<DataSample>* splits[4] = {&data.train, &data.valid, &data.test, &data.heldout};
  json manifest;
  manifest["format"] = "neurogen-dataset 1";
  manifest["mode"] = sample_mode_name(data.mode);
  manifest["t"] = data.frames();
  manifest["c"] = data.channels();
  manifest["encoder"] = encoder_json(data.encoder);
  manifest["skipped_sentences"] = data.skipped_sentences;
  manifest["pca_explained"] = data.pca.explained_variance_ratio();

  for (int k = 0; k < 4; ++k) {
    std::string lines;
    for (const auto& s : *splits[k]) {
      auto [it, fresh] = offset.emplace(s.frame_id, static_cast<std::uint64_t>(features.tellp()));
      if (fresh) write_binary(features, s.recording);
      json j = {{"frame_id", s.frame_id},       {"story", s.story},
                {"prompt", s.prompt},           {"continuation", s.continuation},
                {"recording_offset", it->second}, {"tr_budget", s.tr_budget}};
      lines += j.dump() + "\n";
    }
    write_text(dir / (std::string(kSplitNames[k]) + ".jsonl"), lines);
    manifest["samples"][kSplitNames[k]] = splits[k]->size();
    manifest["frames"][kSplitNames[k]] = distinct_frames(*splits[k]).size();
  }
  write_text(dir / "features.bin", features.str());
  {
    std::ofstream out(dir / "pca.bin", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "pca.bin").string());
    data.pca.write(out);
  }
  data.vocab.save(dir / "vocab.txt");

  for (const char* file : {"train.jsonl", "valid.jsonl", "test.jsonl", "heldout.jsonl",
                           "features.bin", "pca.bin", "vocab.txt"}) {
    manifest["checksums"][file] = checksum_file(dir / file);
  }
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream mf(manifest_path);
  if (!mf) {
    throw DataError("no dataset at " + dir.string() + " (expected " + manifest_path.string() +
                    "; run gen-data first)");
  }
  json manifest;
  try {
    manifest = json::parse(mf);
  } catch (const json::exception& e) {
    throw DataError("malformed " + manifest_path.string() + ": " + e.what());
  }
  for (const auto& [file, sum] : manifest.at("checksums").items()) {
    if (!std::filesystem::exists(dir / file)) throw DataError("dataset file missing: " + file);
    const std::string actual = checksum_file(dir / file);
    if (actual != sum.get<std::string>()) {
      throw DataError("checksum mismatch for " + (dir / file).string() + ": manifest " +
                      sum.get<std::string>() + ", file " + actual);
    }
  }

  Dataset data;
  data.mode = parse_sample_mode(manifest.at("mode").get<std::string>());
  data.encoder = encoder_from_json(manifest.at("encoder"));
  data.skipped_sentences = manifest.value("skipped_sentences", std::size_t{0});
  data.vocab = Vocabulary::load(dir / "vocab.txt");
  {
    std::ifstream in(dir / "pca.bin", std::ios::binary);
    data.pca = PcaBasis::read(in);
  }
  std::ifstream features(dir / "features.bin", std::ios::binary);
  std::map<std::uint64_t, Matrix> cache;
  std::vector<DataSample>* splits[4] = {&data.train, &data.valid, &data.test, &data.heldout};
  for (int k = 0; k < 4; ++k) {
    std::ifstream in(dir / (std::string(kSplitNames[k]) + ".jsonl"));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        const json j = json::parse(line);
        DataSample s;
        s.frame_id = j.at("frame_id").get<std::uint64_t>();
        s.story = j.at("story").get<std::uint32_t>();
        s.prompt = j.at("prompt").get<std::vector<TokenId>>();
        s.continuation = j.at("continuation").get<std::vector<TokenId>>();
        s.tr_budget = j.at("tr_budget").get<std::size_t>();
        const auto off = j.at("recording_offset").get<std::uint64_t>();
        auto it = cache.find(off);
        if (it == cache.end()) {
          features.seekg(static_cast<std::streamoff>(off));
          it = cache.emplace(off, read_binary(features)).first;
        }
        s.recording = it->second;
        if (s.continuation.empty() || s.tr_budget != s.continuation.size()) {
          throw DataError("continuation/tr_budget mismatch");
        }
        splits[k]->push_back(std::move(s));
      } catch (const json::exception& e) {
        throw DataError(std::string(kSplitNames[k]) + ".jsonl line " + std::to_string(lineno) +
                        ": " + e.what());
      }
    }
  }
  return data;
}

}  // namespace neurogen
