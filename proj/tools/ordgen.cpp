// Command-line driver: one subcommand per pipeline stage. Every stage is
// deterministic given (config, seed), writes its artifacts plus a manifest,
// and holds a lockfile so two stages cannot share an output directory.
//
// Exit codes: 0 success, 1 usage/config, 2 data, 3 checkpoint mismatch.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ordgen/checksum.hpp"
#include "ordgen/corpus.hpp"
#include "ordgen/generator.hpp"
#include "ordgen/lexicon.hpp"
#include "ordgen/metrics.hpp"
#include "ordgen/policy.hpp"
#include "ordgen/synthetic.hpp"
#include "ordgen/teacher.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ordgen;

namespace {

struct Lockfile {
  fs::path path;
  explicit Lockfile(const fs::path& dir) : path(dir / ".ordgen.lock") {
    std::error_code ec;
    fs::create_directories(dir, ec);
    FILE* f = std::fopen(path.string().c_str(), "wx");
    if (f == nullptr) {
      throw std::invalid_argument("output directory is locked (stale lock? remove " +
                                  path.string() + ")");
    }
    std::fclose(f);
  }
  ~Lockfile() {
    std::error_code ec;
    fs::remove(path, ec);
  }
};

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw DataError("cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

void write_manifest(const fs::path& out_dir, const std::string& stage, json manifest,
                    std::chrono::steady_clock::time_point started) {
  manifest["stage"] = stage;
  manifest["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  write_atomic(out_dir / (stage + "-manifest.json"), manifest.dump(2) + "\n");
}

Vocab vocab_from_meta(const json& meta) {
  return Vocab::from_tokens(meta.at("vocab").at("tokens").get<std::vector<std::string>>(),
                            meta.at("vocab").at("delimiters").get<std::vector<std::string>>());
}

std::string join_tokens(const std::vector<std::string>& toks) {
  std::string out;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i) out += " ";
    out += toks[i];
  }
  return out;
}

std::vector<SegmentedDoc> segment_corpus(const std::vector<RecipeRecord>& records,
                                         const Vocab& vocab) {
  std::vector<SegmentedDoc> docs;
  docs.reserve(records.size());
  for (const auto& r : records) {
    docs.push_back(split_sentences(vocab.encode(r.body_tokens), vocab.delimiter_ids()));
  }
  return docs;
}

// --- shared stage options --------------------------------------------------

struct CommonPaths {
  std::string corpus;
  std::string dev;
  std::string out_dir;
  uint64_t seed = 1;
};

void add_common(CLI::App* cmd, CommonPaths& p, bool needs_dev = true) {
  cmd->add_option("--corpus", p.corpus, "training corpus (jsonl)")->required();
  if (needs_dev) cmd->add_option("--dev", p.dev, "development corpus (jsonl)")->required();
  cmd->add_option("--out", p.out_dir, "output directory")->required();
  cmd->add_option("--seed", p.seed, "master seed");
  cmd->add_option("--config")->description("key=value config file (flags win)");
}

// Flat key=value config files: `--config FILE` expands to `--key=value`
// tokens for every key the command line does not already set, so explicit
// flags always win. Unknown keys surface as normal parse errors.
std::vector<std::string> apply_config_overlay(std::vector<std::string> args) {
  std::string config_path;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(std::string("--config=").size());
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw DataError("cannot open config file: " + config_path);
  auto already_set = [&](const std::string& key) {
    const std::string flag = "--" + key;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line is not key=value: " + line);
    }
    const std::string key = line.substr(0, eq);
    if (key == "config" || already_set(key)) continue;
    args.push_back("--" + key + "=" + line.substr(eq + 1));
  }
  return args;
}

int run_make_synthetic(const std::string& out_dir, size_t n_train, size_t n_dev, size_t n_test,
                       uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  Lockfile lock(out_dir);
  const SyntheticGrammar grammar = SyntheticGrammar::standard();
  const auto all = generate_synthetic_corpus(seed, n_train + n_dev + n_test, grammar);
  const std::vector<RawRecipe> train(all.begin(), all.begin() + static_cast<long>(n_train));
  const std::vector<RawRecipe> dev(all.begin() + static_cast<long>(n_train),
                                   all.begin() + static_cast<long>(n_train + n_dev));
  const std::vector<RawRecipe> test(all.begin() + static_cast<long>(n_train + n_dev), all.end());
  save_corpus(fs::path(out_dir) / "train.jsonl", train);
  save_corpus(fs::path(out_dir) / "dev.jsonl", dev);
  save_corpus(fs::path(out_dir) / "test.jsonl", test);
  synthetic_lexicon().save((fs::path(out_dir) / "lexicon.tsv").string());

  json manifest;
  manifest["seed"] = seed;
  manifest["config"] = {{"train", n_train}, {"dev", n_dev}, {"test", n_test}};
  manifest["outputs"] = {
      {"train.jsonl", checksum_hex(file_checksum((fs::path(out_dir) / "train.jsonl").string()))},
      {"dev.jsonl", checksum_hex(file_checksum((fs::path(out_dir) / "dev.jsonl").string()))},
      {"test.jsonl", checksum_hex(file_checksum((fs::path(out_dir) / "test.jsonl").string()))},
      {"lexicon.tsv", checksum_hex(file_checksum((fs::path(out_dir) / "lexicon.tsv").string()))}};
  write_manifest(out_dir, "make-synthetic", manifest, started);
  std::cout << "wrote " << all.size() << " records to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ordgen: teacher-guided order-aware text generation pipeline"};
  app.require_subcommand(1);

  int exit_code = 0;

  // ---- make-synthetic ------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("make-synthetic", "generate the scripted synthetic corpus");
    auto opts = std::make_shared<std::tuple<std::string, size_t, size_t, size_t, uint64_t>>(
        "", 500, 100, 100, 7);
    cmd->add_option("--out", std::get<0>(*opts), "output directory")->required();
    cmd->add_option("--train", std::get<1>(*opts), "training records");
    cmd->add_option("--dev", std::get<2>(*opts), "dev records");
    cmd->add_option("--test", std::get<3>(*opts), "test records");
    cmd->add_option("--seed", std::get<4>(*opts), "corpus seed");
    cmd->add_option("--config")->description("key=value config file (flags win)");
    cmd->callback([opts, &exit_code] {
      exit_code = run_make_synthetic(std::get<0>(*opts), std::get<1>(*opts), std::get<2>(*opts),
                                     std::get<3>(*opts), std::get<4>(*opts));
    });
  }

  // ---- train-teacher -------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("train-teacher", "train an ordering teacher");
    auto paths = std::make_shared<CommonPaths>();
    auto cfg = std::make_shared<TeacherConfig>();
    auto kind = std::make_shared<std::string>("relative");
    auto min_count = std::make_shared<int>(1);
    auto delims = std::make_shared<std::vector<std::string>>(
        std::vector<std::string>{".", "!", ";"});
    add_common(cmd, *paths);
    cmd->add_option("--kind", *kind, "absolute|relative")
        ->check(CLI::IsMember({"absolute", "relative"}));
    cmd->add_option("--embedding-dim", cfg->embedding_dim);
    cmd->add_option("--hidden-dim", cfg->hidden_dim);
    cmd->add_option("--dropout", cfg->dropout)->check(CLI::Range(0.0, 0.999));
    cmd->add_option("--lr", cfg->lr);
    cmd->add_option("--epochs", cfg->epochs);
    cmd->add_option("--patience", cfg->patience);
    cmd->add_option("--batch-size", cfg->batch_size);
    cmd->add_option("--lmin", cfg->l_min);
    cmd->add_option("--lmax", cfg->l_max);
    cmd->add_option("--windows", cfg->windows_per_doc, "subsequences sampled per recipe");
    cmd->add_option("--min-count", *min_count);
    cmd->add_option("--delimiters", *delims, "sentence delimiter tokens");
    cmd->callback([paths, cfg, kind, min_count, delims, &exit_code] {
      const auto started = std::chrono::steady_clock::now();
      if (cfg->l_min > cfg->l_max) {
        throw std::invalid_argument("lmin must not exceed lmax");
      }
      cfg->kind = parse_teacher_kind(*kind);
      cfg->seed = paths->seed;
      const auto train = load_corpus(paths->corpus);
      const auto dev = load_corpus(paths->dev);
      fs::create_directories(paths->out_dir);
      Lockfile lock(paths->out_dir);
      const Vocab vocab = Vocab::build(train, *min_count, *delims);
      const auto result =
          train_teacher(segment_corpus(train, vocab), segment_corpus(dev, vocab), vocab.size(),
                        *cfg);
      const fs::path ckpt_path =
          fs::path(paths->out_dir) / ("teacher-" + *kind + ".ckpt");
      result.params.to_checkpoint(vocab, cfg->seed).save(ckpt_path.string());

      json manifest;
      manifest["seed"] = cfg->seed;
      manifest["config"] = {{"kind", *kind},
                            {"embedding_dim", cfg->embedding_dim},
                            {"hidden_dim", cfg->hidden_dim},
                            {"dropout", cfg->dropout},
                            {"lr", cfg->lr},
                            {"epochs", cfg->epochs},
                            {"patience", cfg->patience},
                            {"batch_size", cfg->batch_size},
                            {"l_min", cfg->l_min},
                            {"l_max", cfg->l_max},
                            {"windows_per_doc", cfg->windows_per_doc},
                            {"min_count", *min_count}};
      manifest["checkpoints"] = {
          {ckpt_path.filename().string(), checksum_hex(file_checksum(ckpt_path.string()))}};
      manifest["dev_scores"] = {{"untrained_loss", result.untrained_dev_loss},
                                {"per_epoch_loss", result.dev_losses},
                                {"best_epoch", result.best_epoch}};
      write_manifest(paths->out_dir, "train-teacher", manifest, started);
      std::cout << "teacher (" << *kind << ") dev loss " << result.untrained_dev_loss << " -> "
                << (result.dev_losses.empty() ? result.untrained_dev_loss
                                              : result.dev_losses[result.best_epoch])
                << ", checkpoint " << ckpt_path.string() << "\n";
      exit_code = 0;
    });
  }

  // ---- pretrain --------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("pretrain", "MLE-pretrain the recipe generator");
    auto paths = std::make_shared<CommonPaths>();
    auto cfg = std::make_shared<PretrainConfig>();
    auto min_count = std::make_shared<int>(1);
    auto delims = std::make_shared<std::vector<std::string>>(
        std::vector<std::string>{".", "!", ";"});
    add_common(cmd, *paths);
    cmd->add_option("--embedding-dim", cfg->model.embedding_dim);
    cmd->add_option("--encoder-hidden", cfg->model.encoder_hidden);
    cmd->add_option("--decoder-hidden", cfg->model.decoder_hidden);
    cmd->add_option("--dropout", cfg->model.dropout)->check(CLI::Range(0.0, 0.999));
    cmd->add_flag("--title-sum", cfg->model.title_sum, "title bag uses sum instead of mean");
    cmd->add_option("--lr", cfg->lr);
    cmd->add_option("--epochs", cfg->epochs);
    cmd->add_option("--patience", cfg->patience);
    cmd->add_option("--batch-size", cfg->batch_size);
    cmd->add_option("--min-count", *min_count);
    cmd->add_option("--delimiters", *delims, "sentence delimiter tokens");
    cmd->callback([paths, cfg, min_count, delims, &exit_code] {
      const auto started = std::chrono::steady_clock::now();
      cfg->seed = paths->seed;
      const auto train = load_corpus(paths->corpus);
      const auto dev = load_corpus(paths->dev);
      fs::create_directories(paths->out_dir);
      Lockfile lock(paths->out_dir);
      const Vocab vocab = Vocab::build(train, *min_count, *delims);
      const auto result = pretrain(train, dev, vocab, *cfg);
      const fs::path ckpt_path = fs::path(paths->out_dir) / "generator.ckpt";
      result.params.to_checkpoint(vocab, cfg->seed).save(ckpt_path.string());

      json manifest;
      manifest["seed"] = cfg->seed;
      manifest["config"] = {{"embedding_dim", cfg->model.embedding_dim},
                            {"encoder_hidden", cfg->model.encoder_hidden},
                            {"decoder_hidden", cfg->model.decoder_hidden},
                            {"dropout", cfg->model.dropout},
                            {"title_sum", cfg->model.title_sum},
                            {"lr", cfg->lr},
                            {"epochs", cfg->epochs},
                            {"patience", cfg->patience},
                            {"batch_size", cfg->batch_size},
                            {"min_count", *min_count}};
      manifest["checkpoints"] = {
          {"generator.ckpt", checksum_hex(file_checksum(ckpt_path.string()))}};
      manifest["dev_scores"] = {{"untrained_loss", result.untrained_dev_loss},
                                {"per_epoch_loss", result.dev_losses},
                                {"best_epoch", result.best_epoch}};
      write_manifest(paths->out_dir, "pretrain", manifest, started);
      std::cout << "generator dev loss " << result.untrained_dev_loss << " -> "
                << (result.dev_losses.empty() ? result.untrained_dev_loss
                                              : result.dev_losses[result.best_epoch])
                << ", checkpoint " << ckpt_path.string() << "\n";
      exit_code = 0;
    });
  }

  // ---- train-policy ----------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("train-policy", "self-critical fine-tuning");
    auto paths = std::make_shared<CommonPaths>();
    auto cfg = std::make_shared<PolicyConfig>();
    auto kind = std::make_shared<std::string>("RO");
    auto generator_path = std::make_shared<std::string>();
    auto teacher_path = std::make_shared<std::string>();
    add_common(cmd, *paths);
    cmd->add_option("--generator", *generator_path, "pretrained generator checkpoint")
        ->required();
    cmd->add_option("--teacher", *teacher_path, "teacher checkpoint (AO/RO/RO+B4 kinds)");
    cmd->add_option("--kind", *kind, "AO|RO|RO+B4|BLEU-1|BLEU-4|ROUGE-L");
    cmd->add_option("--gamma", cfg->gamma)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--lmin", cfg->l_min);
    cmd->add_option("--lmax", cfg->l_max);
    cmd->add_option("--lr", cfg->lr);
    cmd->add_option("--beta", cfg->beta, "sampling temperature");
    cmd->add_option("--max-len", cfg->max_decode_len);
    cmd->add_option("--epochs", cfg->epochs);
    cmd->add_option("--batch-size", cfg->batch_size);
    cmd->callback([paths, cfg, kind, generator_path, teacher_path, &exit_code] {
      const auto started = std::chrono::steady_clock::now();
      cfg->kind = parse_reward_kind(*kind);
      cfg->seed = paths->seed;
      cfg->validate();

      const Checkpoint gen_ck = Checkpoint::load(*generator_path);
      GeneratorParams pretrained = GeneratorParams::from_checkpoint(gen_ck);
      const Vocab vocab = vocab_from_meta(gen_ck.meta);

      Teachers teachers;
      uint64_t teacher_checksum = 0;
      const auto needed = required_teacher_kind(cfg->kind);
      if (needed.has_value()) {
        if (teacher_path->empty()) {
          throw std::invalid_argument("reward kind " + *kind + " needs --teacher");
        }
        const Checkpoint t_ck = Checkpoint::load(*teacher_path);
        TeacherParams tp = TeacherParams::from_checkpoint(t_ck);
        if (tp.kind != *needed) {
          throw CheckpointError("reward kind " + *kind + " needs a " +
                                teacher_kind_name(*needed) + " teacher, but " + *teacher_path +
                                " holds kind '" + t_ck.kind() + "'");
        }
        if (t_ck.vocab_checksum() != gen_ck.vocab_checksum()) {
          throw CheckpointError(
              "vocab checksum mismatch: teacher " + checksum_hex(t_ck.vocab_checksum()) +
              " vs generator " + checksum_hex(gen_ck.vocab_checksum()));
        }
        teacher_checksum = tp.checksum();
        if (*needed == TeacherKind::kAbsolute) {
          teachers.absolute = std::move(tp);
        } else {
          teachers.relative = std::move(tp);
        }
      }

      const auto train = load_corpus(paths->corpus);
      const auto dev = load_corpus(paths->dev);
      fs::create_directories(paths->out_dir);
      Lockfile lock(paths->out_dir);

      std::ofstream batch_log(fs::path(paths->out_dir) / "policy-train-log.jsonl",
                              std::ios::binary | std::ios::trunc);
      const auto result = train_policy(pretrained, teachers, train, dev, vocab, *cfg, &batch_log);
      const fs::path ckpt_path = fs::path(paths->out_dir) / "policy.ckpt";
      result.params.to_checkpoint(vocab, cfg->seed).save(ckpt_path.string());

      json manifest;
      manifest["seed"] = cfg->seed;
      manifest["config"] = {{"kind", *kind},           {"gamma", cfg->gamma},
                            {"l_min", cfg->l_min},     {"l_max", cfg->l_max},
                            {"lr", cfg->lr},           {"beta", cfg->beta},
                            {"max_len", cfg->max_decode_len}, {"epochs", cfg->epochs},
                            {"batch_size", cfg->batch_size}};
      manifest["inputs"] = {{"generator", checksum_hex(file_checksum(*generator_path))}};
      if (!teacher_path->empty()) {
        manifest["inputs"]["teacher"] = checksum_hex(file_checksum(*teacher_path));
        manifest["inputs"]["teacher_params"] = checksum_hex(teacher_checksum);
      }
      manifest["checkpoints"] = {
          {"policy.ckpt", checksum_hex(file_checksum(ckpt_path.string()))}};
      json epochs = json::array();
      for (const auto& e : result.epochs) {
        epochs.push_back({{"dev_reward", e.dev_reward},
                          {"dev_mle", e.dev_mle},
                          {"dev_mean_len", e.dev_mean_len},
                          {"selection", e.selection}});
      }
      manifest["dev_scores"] = {
          {"pretrained",
           {{"dev_reward", result.pretrained.dev_reward},
            {"dev_mle", result.pretrained.dev_mle},
            {"dev_mean_len", result.pretrained.dev_mean_len},
            {"selection", result.pretrained.selection}}},
          {"per_epoch", epochs},
          {"best_epoch", result.best_epoch}};
      manifest["selection"] = {{"metric", *kind}, {"value", result.best_selection}};
      write_manifest(paths->out_dir, "train-policy", manifest, started);
      std::cout << "policy (" << *kind << ", gamma=" << cfg->gamma << ") selection "
                << result.pretrained.selection << " -> " << result.best_selection
                << ", checkpoint " << ckpt_path.string() << "\n";
      exit_code = 0;
    });
  }

  // ---- generate ---------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("generate", "decode recipes for a corpus");
    auto corpus_path = std::make_shared<std::string>();
    auto generator_path = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto mode = std::make_shared<std::string>("greedy");
    auto beta = std::make_shared<double>(2.0);
    auto max_len = std::make_shared<size_t>(150);
    auto seed = std::make_shared<uint64_t>(1);
    cmd->add_option("--corpus", *corpus_path, "records to condition on (jsonl)")->required();
    cmd->add_option("--generator", *generator_path, "generator checkpoint")->required();
    cmd->add_option("--out", *out_path, "output file (jsonl)")->required();
    cmd->add_option("--mode", *mode)->check(CLI::IsMember({"greedy", "sample"}));
    cmd->add_option("--beta", *beta, "sampling temperature");
    cmd->add_option("--max-len", *max_len);
    cmd->add_option("--seed", *seed);
    cmd->add_option("--config")->description("key=value config file (flags win)");
    cmd->callback([corpus_path, generator_path, out_path, mode, beta, max_len, seed,
                   &exit_code] {
      const Checkpoint ck = Checkpoint::load(*generator_path);
      GeneratorParams params = GeneratorParams::from_checkpoint(ck);
      const Vocab vocab = vocab_from_meta(ck.meta);
      const auto records = load_corpus(*corpus_path);
      Rng rng(*seed);
      std::ostringstream body;
      for (const auto& r : records) {
        Tape tape(false);
        GeneratorNet net = bind_generator(tape, params, false, nullptr);
        const EncodedContext ctx = net.encode(encode_record(r, vocab));
        const DecodeResult d = *mode == "greedy"
                                   ? greedy_decode(net, ctx, *max_len)
                                   : sample_decode(net, ctx, *beta, *max_len, rng);
        json j;
        j["title"] = join_tokens(r.title_tokens);
        j["generated"] = join_tokens(vocab.decode(d.text_tokens()));
        j["gold"] = join_tokens(r.body_tokens);
        body << j.dump() << "\n";
      }
      write_atomic(*out_path, body.str());
      std::cout << "wrote " << records.size() << " generations to " << *out_path << "\n";
      exit_code = 0;
    });
  }

  // ---- evaluate -----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("evaluate", "score generations against golds");
    auto gen_path = std::make_shared<std::string>();
    auto lexicon_path = std::make_shared<std::string>();
    auto gold_path = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--generations", *gen_path, "generation file (jsonl)")->required();
    cmd->add_option("--lexicon", *lexicon_path, "event lexicon (tsv)")->required();
    cmd->add_option("--gold", *gold_path, "optional gold corpus overriding the gold field");
    cmd->add_option("--out", *out_path, "report output (json)");
    cmd->add_option("--config")->description("key=value config file (flags win)");
    cmd->callback([gen_path, lexicon_path, gold_path, out_path, &exit_code] {
      const EventLexicon lexicon = EventLexicon::load(*lexicon_path);
      std::ifstream in(*gen_path);
      if (!in) throw DataError("cannot open generations file: " + *gen_path);
      std::vector<std::vector<std::string>> gens, golds;
      std::string line;
      size_t lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
          j = json::parse(line);
        } catch (const json::exception& e) {
          throw DataError(*gen_path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        gens.push_back(tokenize(j.at("generated").get<std::string>()));
        if (j.contains("gold")) golds.push_back(tokenize(j.at("gold").get<std::string>()));
      }
      if (!gold_path->empty()) {
        golds.clear();
        for (const auto& r : load_corpus(*gold_path)) golds.push_back(r.body_tokens);
      }
      const ScoreReport report = evaluate_corpus(gens, golds, lexicon);
      std::cout << report.format_table();
      if (!out_path->empty()) write_atomic(*out_path, report.to_json().dump(2) + "\n");
      exit_code = 0;
    });
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_config_overlay(std::move(args));
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
