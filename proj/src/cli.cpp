#include "toxic/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "toxic/error.hpp"
#include "toxic/grid_search.hpp"
#include "toxic/io.hpp"
#include "toxic/pipeline.hpp"

namespace toxic::cli {

int percent(double p) { return static_cast<int>(std::floor(100.0 * p + 0.5)); }

std::string format_prediction_table(const std::vector<std::string>& inputs, const std::vector<Probabilities>& probs) {
  std::ostringstream os;
  os << "label";
  for (const auto& s : inputs) os << '\t' << s;
  os << '\n';
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    os << kLabelNames[l];
    for (const auto& p : probs) os << '\t' << percent(p[l]) << '%';
    os << '\n';
  }
  return os.str();
}

namespace {

struct ModelFlags {
  std::string model = "cnn";
  std::string embedding = "random";
  std::string embedding_file;
  std::uint64_t seed = 42;
  std::size_t epochs = 5;
  std::size_t batch = 32;
  double lr = 1e-3;
  double val_fraction = 0.2;
  std::size_t filters = 64;
  std::size_t units = 32;
  std::size_t kernel = 3;
  std::size_t hidden = 64;
  std::size_t dim = 50;
  bool freeze_embedding = false;
  double alpha = 1.0;
  std::size_t ngram_min = 1;
  std::size_t ngram_max = 2;
  std::size_t max_features = 50000;
  std::size_t workers = default_workers();

  void attach(CLI::App* app) {
    app->add_option("--embedding", embedding, "glove | fasttext | random")->capture_default_str();
    app->add_option("--embedding-file", embedding_file, "pretrained vectors (.txt GloVe or .vec FastText)");
    app->add_option("--seed", seed, "seed for initialization and shuffling")->capture_default_str();
    app->add_option("--epochs", epochs)->capture_default_str();
    app->add_option("--batch", batch)->capture_default_str();
    app->add_option("--lr", lr, "Adam learning rate")->capture_default_str();
    app->add_option("--val-fraction", val_fraction)->capture_default_str();
    app->add_option("--filters", filters, "CNN filters")->capture_default_str();
    app->add_option("--units", units, "CNN dense units")->capture_default_str();
    app->add_option("--kernel", kernel, "CNN kernel size")->capture_default_str();
    app->add_option("--hidden", hidden, "LSTM hidden units")->capture_default_str();
    app->add_option("--dim", dim, "embedding dimension for random embeddings")->capture_default_str();
    app->add_flag("--freeze-embedding", freeze_embedding, "do not update embedding rows");
    app->add_option("--alpha", alpha, "Naive Bayes smoothing")->capture_default_str();
    app->add_option("--ngram-min", ngram_min)->capture_default_str();
    app->add_option("--ngram-max", ngram_max)->capture_default_str();
    app->add_option("--max-features", max_features)->capture_default_str();
    app->add_option("--workers", workers, "threads; results do not depend on it")->capture_default_str();
  }

  ModelConfig model_config() const {
    ModelConfig c;
    c.kind = parse_model_kind(model);
    c.embedding = parse_embedding_source(embedding);
    c.seed = seed;
    c.filters = filters;
    c.dense_units = units;
    c.kernel = kernel;
    c.hidden = hidden;
    c.embedding_dim = dim;
    c.trainable_embedding = !freeze_embedding;
    c.nb.alpha = alpha;
    c.nb.ngrams = {ngram_min, ngram_max};
    c.nb.max_features = max_features;
    if (c.nb.ngrams.lo < 1 || c.nb.ngrams.hi < c.nb.ngrams.lo) throw UsageError("invalid n-gram range");
    if (!(alpha > 0.0)) throw UsageError("--alpha must be positive");
    return c;
  }

  TrainConfig train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.batch_size = batch;
    t.learning_rate = lr;
    t.validation_fraction = val_fraction;
    t.shuffle_seed = seed;
    t.workers = workers;
    return t;
  }

  std::optional<EmbeddingTable> embeddings(const ModelConfig& c) const {
    if (c.kind == ModelKind::nb || c.embedding == EmbeddingSource::random) return std::nullopt;
    if (embedding_file.empty()) throw UsageError("--embedding " + embedding + " needs --embedding-file");
    return load_embeddings(embedding_file, c.embedding == EmbeddingSource::glove ? EmbeddingFormat::glove
                                                                                  : EmbeddingFormat::fasttext_vec);
  }
};

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return std::string{std::istreambuf_iterator<char>(in), {}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-label toxic comment classification"};
  app.name("toxic");
  app.require_subcommand(1);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "normalize, tokenize and encode a CSV corpus");
  std::string pre_in, pre_out;
  PreprocessConfig pre_cfg;
  bool unlabeled = false;
  pre->add_option("--in", pre_in, "input CSV")->required();
  pre->add_option("--out", pre_out, "output corpus file")->required();
  pre->add_option("--maxlen", pre_cfg.maxlen)->capture_default_str()->check(CLI::PositiveNumber);
  pre->add_option("--vocab-size", pre_cfg.vocab_size)->capture_default_str()->check(CLI::Range(2, 1 << 30));
  pre->add_option("--min-count", pre_cfg.min_count)->capture_default_str();
  pre->add_flag("--unlabeled", unlabeled, "input has no label columns");

  // train
  auto* tr = app.add_subcommand("train", "train a model on a preprocessed corpus");
  ModelFlags train_flags;
  std::string train_data, train_out;
  tr->add_option("--model", train_flags.model, "nb | cnn | lstm")->required();
  tr->add_option("--data", train_data, "corpus file")->required();
  tr->add_option("--out", train_out, "model file")->required();
  train_flags.attach(tr);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score a model on a labeled corpus");
  std::string ev_model, ev_data, ev_report;
  std::size_t ev_workers = default_workers();
  ev->add_option("--model", ev_model)->required();
  ev->add_option("--data", ev_data)->required();
  ev->add_option("--report", ev_report, "also write the report to this file");
  ev->add_option("--workers", ev_workers)->capture_default_str();

  // predict
  auto* pr = app.add_subcommand("predict", "print per-label percentages for comments");
  std::string pr_model, pr_file;
  std::vector<std::string> pr_texts;
  pr->add_option("--model", pr_model)->required();
  auto* text_opt = pr->add_option("--text", pr_texts, "comment text (repeatable)");
  auto* file_opt = pr->add_option("--file", pr_file, "one comment per line");
  text_opt->excludes(file_opt);

  // gridsearch
  auto* gs = app.add_subcommand("gridsearch", "exhaustive hyperparameter search");
  ModelFlags grid_flags;
  std::string gs_grid, gs_data, gs_out, gs_metric = "accuracy";
  std::size_t gs_folds = 3;
  gs->add_option("--model", grid_flags.model, "nb | cnn | lstm")->required();
  gs->add_option("--grid", gs_grid, "JSON object: parameter -> array of values")->required();
  gs->add_option("--data", gs_data)->required();
  gs->add_option("--out", gs_out, "results CSV")->required();
  gs->add_option("--folds", gs_folds, "cross-validation folds; 1 = single holdout")->capture_default_str();
  gs->add_option("--metric", gs_metric, "accuracy | auc")->capture_default_str();
  grid_flags.attach(gs);

  std::vector<std::string> argv_storage{"toxic"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    err << "error: " << one_line(msg.empty() ? "invalid arguments" : msg) << '\n';
    return 1;
  }

  try {
    if (pre->parsed()) {
      const auto rows = load_dataset(pre_in, !unlabeled);
      const auto corpus = preprocess(rows, pre_cfg);
      save_corpus(corpus, pre_out);
      out << "rows: " << corpus.size() << "\nvocabulary: " << corpus.vocab.size() << "\nmaxlen: " << corpus.maxlen
          << '\n';
    } else if (tr->parsed()) {
      const auto mc = train_flags.model_config();
      const auto tc = train_flags.train_config();
      const auto table = train_flags.embeddings(mc);
      const auto corpus = load_corpus(train_data);
      const auto split = holdout_split(corpus.size(), tc.validation_fraction, tc.shuffle_seed);
      const auto result =
          train_text_model(corpus, mc, tc, split, table ? &*table : nullptr, [&](std::size_t epoch, const EpochRecord& r) {
            out << "epoch " << (epoch + 1) << '/' << tc.epochs << std::fixed << std::setprecision(4)
                << "  train_loss " << r.train_loss << "  val_loss " << r.validation_loss << std::setprecision(1)
                << "  val_acc " << 100.0 * r.mean_validation_accuracy << "%\n"
                << std::defaultfloat << std::setprecision(6);
            return true;
          });
      if (mc.kind != ModelKind::nb) {
        out << "embedding coverage: " << result.model.embedding_found << " found, " << result.model.embedding_missing
            << " missing\n";
      }
      out << "validation (" << split.validation.size() << " held out):\n"
          << format_report(evaluate_model(result.model, corpus, split.validation, tc.workers));
      save_model(result.model, train_out);
    } else if (ev->parsed()) {
      const auto model = load_model(ev_model);
      const auto corpus = load_corpus(ev_data);
      const auto report = format_report(evaluate_model(model, corpus, ev_workers));
      out << report;
      if (!ev_report.empty()) write_text(ev_report, report);
    } else if (pr->parsed()) {
      const auto model = load_model(pr_model);
      std::vector<std::string> inputs = pr_texts;
      if (!pr_file.empty()) {
        std::istringstream lines(read_file(pr_file));
        for (std::string line; std::getline(lines, line);) {
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (!line.empty()) inputs.push_back(line);
        }
      }
      if (inputs.empty()) throw UsageError("predict needs --text or --file with at least one comment");
      std::vector<Probabilities> probs;
      for (const auto& s : inputs) probs.push_back(model.predict(s));
      out << format_prediction_table(inputs, probs);
    } else if (gs->parsed()) {
      const auto mc = grid_flags.model_config();
      const auto tc = grid_flags.train_config();
      GridMetric metric;
      if (gs_metric == "accuracy") {
        metric = GridMetric::accuracy;
      } else if (gs_metric == "auc") {
        metric = GridMetric::auc;
      } else {
        throw UsageError("--metric must be accuracy or auc");
      }
      const auto spec = GridSpec::from_json(read_file(gs_grid));
      const auto table = grid_flags.embeddings(mc);
      const auto corpus = load_corpus(gs_data);
      const auto result = grid_search(spec, corpus.size(),
                                      make_fold_evaluator(corpus, mc, tc, table ? &*table : nullptr, metric), gs_folds,
                                      tc.shuffle_seed, tc.validation_fraction);
      std::ofstream csv(gs_out, std::ios::binary);
      if (!csv) throw DataError("cannot write '" + gs_out + "'");
      result.write_csv(csv);
      const auto& best = result.best();
      out << "configurations: " << result.rows.size() << "\nbest: config " << best.config_id;
      for (const auto& [name, v] : best.config) out << ' ' << name << '=' << format_number(v);
      out << "  " << gs_metric << ' ' << format_number(best.metric) << '\n';
    }
  } catch (const UsageError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 2;
  }
  return 0;
}

}  // namespace toxic::cli
