// qctc: dataset construction, statistics, training, generation and scoring.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "qctc/cli/pipeline.hpp"
#include "qctc/forge/stats.hpp"

namespace fs = std::filesystem;
using namespace qctc;

namespace {

struct Options {
  std::optional<std::uint64_t> seed;
  std::string strategy = "auto";
  std::size_t max_caption_len = 30;
  std::size_t max_query_len = 20;
  std::size_t max_objects = 100;
  std::size_t max_ocr = 50;

  std::string input, parses, output, rejects, question_types, templates;
  std::string dataset, objects, csv;
  std::string regions, checkpoint, vocab, loss_curve;
  std::string predictions;

  std::size_t steps = 500;
  std::size_t batch_size = 8;
  double learning_rate = 3e-3;
  std::string optimizer = "adam";
  double clip_norm = 1.0;
  std::size_t d_model = 64;
  std::size_t heads = 4;
  std::size_t ffn_dim = 128;
  std::size_t geometry_layers = 1;
  std::size_t text_layers = 1;
  std::size_t fusion_layers = 2;
  bool no_geometry = false;
  bool scale_question_attention = false;
  std::size_t min_count = 1;
  double max_skip_rate = 0.1;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  if (path.empty()) throw std::runtime_error("missing output path");
  if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw std::runtime_error(std::string("missing --") + flag);
}

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw std::runtime_error("--seed is required for this command");
  return *o.seed;
}

std::vector<forge::DatasetRecord> load_dataset(const Options& o) {
  require(o.dataset, "dataset");
  std::ifstream in(o.dataset);
  if (!in) throw std::runtime_error("cannot open " + o.dataset);
  return forge::read_dataset(in);
}

cli::SampleSet load_samples(const Options& o) {
  require(o.regions, "regions");
  return cli::make_samples(load_dataset(o), load_region_file(o.regions));
}

int build_dataset(const Options& o) {
  require(o.input, "input");
  std::ifstream in(o.input);
  if (!in) throw std::runtime_error("cannot open " + o.input);

  std::vector<forge::RawRecord> raw;
  std::vector<forge::Rejection> skipped;
  std::string line;
  std::size_t line_no = 0, lines = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++lines;
    try {
      raw.push_back(forge::parse_raw_record(line));
    } catch (const std::exception& e) {
      skipped.push_back({"line " + std::to_string(line_no), std::string("malformed: ") + e.what()});
      std::cerr << "line " << line_no << ": skipped: " << e.what() << "\n";
    }
  }

  forge::ParseIndex parses;
  if (!o.parses.empty()) parses = forge::index_parses(forge::parse_conllu(slurp(o.parses)));
  forge::PhraseTable types, templates;
  forge::ForgeOptions fo;
  if (!o.question_types.empty()) {
    types = forge::PhraseTable::parse(slurp(o.question_types));
    fo.types = &types;
  }
  if (!o.templates.empty()) {
    templates = forge::PhraseTable::parse(slurp(o.templates));
    fo.templates = &templates;
  }

  const auto report = forge::forge_dataset(raw, parses, fo);
  auto out = open_out(o.output);
  for (const auto& r : report.records) out << forge::to_json_line(r) << "\n";
  if (!o.rejects.empty()) {
    auto rej = open_out(o.rejects);
    for (const auto& r : skipped) rej << r.id << "\t" << r.reason << "\n";
    for (const auto& r : report.rejected) rej << r.id << "\t" << r.reason << "\n";
  }
  std::cout << "records " << report.records.size() << ", rejected " << report.rejected.size() << ", skipped "
            << skipped.size() << " of " << lines << " lines\n";
  if (lines > 0 && static_cast<double>(skipped.size()) > o.max_skip_rate * static_cast<double>(lines)) {
    std::cerr << "error: more than " << 100.0 * o.max_skip_rate << "% of input lines skipped\n";
    return 2;
  }
  return 0;
}

int stats(const Options& o) {
  const auto records = load_dataset(o);
  std::optional<std::set<std::string>> lexicon;
  if (!o.objects.empty()) lexicon = forge::parse_word_list(slurp(o.objects));
  const auto s = forge::dataset_stats(records, lexicon ? &*lexicon : nullptr);
  std::cout << forge::stats_table(s);
  if (!o.csv.empty()) open_out(o.csv) << forge::stats_csv(s);
  return 0;
}

int train_cmd(const Options& o) {
  const std::uint64_t seed = require_seed(o);
  require(o.checkpoint, "checkpoint");
  require(o.vocab, "vocab");
  const auto set = load_samples(o);
  if (set.samples.empty()) throw std::runtime_error("dataset is empty");
  const Vocabulary vocab = cli::build_vocabulary(set.samples, o.min_count);

  ModelConfig mc;
  mc.vocab_size = vocab.size();
  mc.feature_dim = set.samples[0].regions.object_features.cols();
  mc.d_model = o.d_model;
  mc.heads = o.heads;
  mc.ffn_dim = o.ffn_dim;
  mc.geometry_layers = o.geometry_layers;
  mc.text_layers = o.text_layers;
  mc.fusion_layers = o.fusion_layers;
  mc.max_query_len = o.max_query_len;
  mc.max_caption_len = o.max_caption_len;
  mc.max_objects = o.max_objects;
  mc.max_ocr = o.max_ocr;
  mc.use_geometry = !o.no_geometry;
  mc.scale_question_attention = o.scale_question_attention;
  mc.validate();

  TrainConfig tc;
  tc.strategy = parse_strategy(o.strategy);
  if (o.optimizer == "adam")
    tc.optimizer = Optimizer::kAdam;
  else if (o.optimizer == "sgd")
    tc.optimizer = Optimizer::kSgd;
  else
    throw std::runtime_error("unknown optimizer '" + o.optimizer + "'");
  tc.learning_rate = o.learning_rate;
  tc.steps = o.steps;
  tc.batch_size = o.batch_size;
  tc.seed = seed;
  tc.clip_norm = o.clip_norm;

  GqamModel model(mc, seed);
  const auto result = train(model, set.samples, vocab, tc);
  if (const auto dir = fs::path(o.checkpoint).parent_path(); !dir.empty()) fs::create_directories(dir);
  save_checkpoint(o.checkpoint, model);
  vocab.save(o.vocab);
  if (!o.loss_curve.empty()) write_loss_curve(o.loss_curve, result.losses);
  std::printf("trained %zu steps, loss %.6f -> %.6f\n", result.losses.size(), result.losses.front(),
              result.losses.back());
  return 0;
}

int generate_cmd(const Options& o) {
  require_seed(o);
  require(o.checkpoint, "checkpoint");
  require(o.vocab, "vocab");
  const auto model = load_checkpoint(o.checkpoint);
  const Vocabulary vocab = Vocabulary::load(o.vocab);
  cli::check_compatible(*model, vocab);
  const auto set = load_samples(o);
  auto out = open_out(o.output);
  for (const auto& p : cli::generate(*model, vocab, set)) out << cli::to_json_line(p) << "\n";
  std::cout << "generated " << set.samples.size() << " captions\n";
  return 0;
}

std::vector<metrics::EvalPair> load_predictions(const Options& o) {
  require(o.predictions, "predictions");
  std::ifstream in(o.predictions);
  if (!in) throw std::runtime_error("cannot open " + o.predictions);
  return metrics::read_eval_pairs(in);
}

int evaluate_cmd(const Options& o) {
  const auto report = metrics::evaluate(load_predictions(o));
  std::cout << metrics::report_table(report);
  if (!o.output.empty()) open_out(o.output) << metrics::report_json(report) << "\n";
  return 0;
}

int diversity_cmd(const Options& o) {
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& p : load_predictions(o)) groups[p.group_id.empty() ? p.id : p.group_id].push_back(p.candidate);
  std::vector<std::vector<std::string>> sets;
  for (auto& [g, c] : groups) sets.push_back(std::move(c));
  auto show = [](const std::optional<double>& v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v ? *v : 0.0);
    return v ? std::string(buf) : std::string("-");
  };
  const auto d1 = metrics::div_n(sets, 1), d2 = metrics::div_n(sets, 2);
  const auto sc = metrics::self_cider(sets);
  std::cout << "Div-1  Div-2  SelfCIDEr\n" << show(d1) << "  " << show(d2) << "  " << show(sc) << "\n";
  if (!o.output.empty()) {
    auto j = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string("null"); };
    open_out(o.output) << "{\"Div-1\": " << j(d1) << ", \"Div-2\": " << j(d2) << ", \"SelfCIDEr\": " << j(sc)
                       << "}\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question-controlled text-aware captioning toolkit"};
  app.set_config("--config", "", "flat key = value file; flags of the same name override it");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Options o;

  app.add_option("--seed", o.seed, "random seed (required for train and generate)");
  app.add_option("--strategy", o.strategy, "initial caption used in training")
      ->check(CLI::IsMember({"auto", "pseudo", "rand"}));
  app.add_option("--max-caption-len", o.max_caption_len)->capture_default_str();
  app.add_option("--max-query-len", o.max_query_len)->capture_default_str();
  app.add_option("--max-objects", o.max_objects)->capture_default_str();
  app.add_option("--max-ocr", o.max_ocr)->capture_default_str();

  app.add_option("--input", o.input, "raw JSON-lines records");
  app.add_option("--parses", o.parses, "CoNLL-U sidecar");
  app.add_option("--output", o.output, "output file");
  app.add_option("--rejects", o.rejects, "rejected records with reasons (TSV)");
  app.add_option("--question-types", o.question_types, "question type rule table");
  app.add_option("--templates", o.templates, "question template table");
  app.add_option("--max-skip-rate", o.max_skip_rate)->capture_default_str();
  app.add_option("--dataset", o.dataset, "dataset JSON-lines");
  app.add_option("--objects", o.objects, "object word list for P_obj");
  app.add_option("--csv", o.csv, "also write statistics as CSV");
  app.add_option("--regions", o.regions, "region JSON-lines file");
  app.add_option("--checkpoint", o.checkpoint);
  app.add_option("--vocab", o.vocab);
  app.add_option("--loss-curve", o.loss_curve, "CSV of the per-step loss");
  app.add_option("--predictions", o.predictions, "generated captions (JSON-lines)");

  app.add_option("--steps", o.steps)->capture_default_str();
  app.add_option("--batch-size", o.batch_size)->capture_default_str();
  app.add_option("--learning-rate", o.learning_rate)->capture_default_str();
  app.add_option("--optimizer", o.optimizer)->check(CLI::IsMember({"sgd", "adam"}))->capture_default_str();
  app.add_option("--clip-norm", o.clip_norm)->capture_default_str();
  app.add_option("--d-model", o.d_model)->capture_default_str();
  app.add_option("--heads", o.heads)->capture_default_str();
  app.add_option("--ffn-dim", o.ffn_dim)->capture_default_str();
  app.add_option("--geometry-layers", o.geometry_layers)->capture_default_str();
  app.add_option("--text-layers", o.text_layers)->capture_default_str();
  app.add_option("--fusion-layers", o.fusion_layers)->capture_default_str();
  app.add_flag("--no-geometry", o.no_geometry, "drop the geometry encoder");
  app.add_flag("--scale-question-attention", o.scale_question_attention);
  app.add_option("--min-count", o.min_count, "minimum count for vocabulary words")->capture_default_str();

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"build-dataset", "detect, prune, filter, clean and classify raw records"},
      {"stats", "dataset statistics"},
      {"train", "train a model and write checkpoint and vocabulary"},
      {"generate", "greedy captions for a dataset"},
      {"evaluate", "caption metrics for generated captions"},
      {"diversity", "Div-n and SelfCIDEr per image"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "build-dataset") return build_dataset(o);
    if (cmd == "stats") return stats(o);
    if (cmd == "train") return train_cmd(o);
    if (cmd == "generate") return generate_cmd(o);
    if (cmd == "evaluate") return evaluate_cmd(o);
    return diversity_cmd(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
