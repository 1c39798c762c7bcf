#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "synthetic.hpp"
#include "toxic/cli.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kData = TOXIC_TEST_DATA_DIR;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = toxic::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("toxic_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

bool single_error_line(const std::string& err) {
  return err.rfind("error: ", 0) == 0 && err.find('\n') == err.size() - 1;
}

// Planted-keyword rows as CSV, plus a quoted multi-line row.
void write_fixture(const std::string& path, std::size_t n, std::uint64_t seed) {
  auto rows = synthetic::planted_keyword(n, seed);
  rows.push_back({"q1", "He said \"hello\",\nthen left", toxic::LabelVector{}});
  std::ofstream out(path, std::ios::binary);
  toxic::write_dataset(out, rows);
}

}  // namespace

TEST_CASE("prediction table format") {
  CHECK(toxic::cli::percent(0.5) == 50);
  CHECK(toxic::cli::percent(0.004) == 0);
  CHECK(toxic::cli::percent(0.006) == 1);
  CHECK(toxic::cli::percent(1.0) == 100);
  const auto table =
      toxic::cli::format_prediction_table({"a b", "c"}, {{0.5, 0.25, 0, 1, 0.126, 0.9}, {0, 0, 0, 0, 0, 0}});
  CHECK(table ==
        "label\ta b\tc\n"
        "toxic\t50%\t0%\n"
        "severe_toxic\t25%\t0%\n"
        "obscene\t0%\t0%\n"
        "threat\t100%\t0%\n"
        "insult\t13%\t0%\n"
        "identity_hate\t90%\t0%\n");
}

TEST_CASE("preprocess, train, evaluate and predict") {
  TempDir dir("flow");
  write_fixture(dir / "train.csv", 40, 1);

  auto r = run({"preprocess", "--in", dir / "train.csv", "--out", dir / "corpus.bin", "--maxlen", "30"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("rows: 41\n") != std::string::npos);
  CHECK(r.out.find("maxlen: 30\n") != std::string::npos);

  SUBCASE("naive bayes trains, predicts and saves") {
    r = run({"train", "--model", "nb", "--data", dir / "corpus.bin", "--out", dir / "nb.bin"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("validation (9 held out):") != std::string::npos);
    CHECK(fs::exists(dir / "nb.bin"));

    r = run({"predict", "--model", dir / "nb.bin", "--text", "what an IDIOT", "--text", "thanks for the edit"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string header, toxic_row;
    std::getline(lines, header);
    std::getline(lines, toxic_row);
    CHECK(header == "label\twhat an IDIOT\tthanks for the edit");
    int first = 0, second = 0;
    REQUIRE(std::sscanf(toxic_row.c_str(), "toxic\t%d%%\t%d%%", &first, &second) == 2);
    CHECK(first > second);
  }

  SUBCASE("an untrained network predicts 50% everywhere") {
    for (const std::string kind : {"cnn", "lstm"}) {
      CAPTURE(kind);
      r = run({"train", "--model", kind, "--data", dir / "corpus.bin", "--out", dir / "net.bin", "--epochs", "0",
               "--dim", "8", "--filters", "4", "--units", "4", "--hidden", "4"});
      REQUIRE(r.code == 0);
      CHECK(r.out.find("embedding coverage: 0 found") != std::string::npos);
      write(dir / "comments.txt", "you idiot\r\n\nhello there\n");
      r = run({"predict", "--model", dir / "net.bin", "--file", dir / "comments.txt"});
      REQUIRE(r.code == 0);
      CHECK(r.out ==
            "label\tyou idiot\thello there\n"
            "toxic\t50%\t50%\n"
            "severe_toxic\t50%\t50%\n"
            "obscene\t50%\t50%\n"
            "threat\t50%\t50%\n"
            "insult\t50%\t50%\n"
            "identity_hate\t50%\t50%\n");
    }
  }

  SUBCASE("training prints one line per epoch") {
    r = run({"train", "--model", "cnn", "--data", dir / "corpus.bin", "--out", dir / "cnn.bin", "--epochs", "2",
             "--dim", "8", "--filters", "4", "--units", "4"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("epoch 1/2  train_loss ", 0) == 0);
    CHECK(r.out.find("epoch 2/2  train_loss ") != std::string::npos);
  }

  SUBCASE("pretrained vectors report their coverage") {
    r = run({"train", "--model", "lstm", "--data", dir / "corpus.bin", "--out", dir / "glove.bin", "--epochs", "1",
             "--hidden", "4", "--embedding", "glove", "--embedding-file", (kData / "vectors.glove.txt").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("embedding coverage: ") != std::string::npos);
    CHECK(r.out.find("embedding coverage: 0 found") == std::string::npos);
  }
}

TEST_CASE("evaluate on a separable fixture reports perfect scores") {
  TempDir dir("perfect");
  REQUIRE(run({"preprocess", "--in", (kData / "perfect.csv").string(), "--out", dir / "c.bin"}).code == 0);
  REQUIRE(run({"train", "--model", "nb", "--data", dir / "c.bin", "--out", dir / "nb.bin"}).code == 0);
  const auto r =
      run({"evaluate", "--model", dir / "nb.bin", "--data", dir / "c.bin", "--report", dir / "report.txt"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("toxic               100.0%    1.0000\n") != std::string::npos);
  CHECK(r.out.find("mean                100.0%    1.0000\n") != std::string::npos);
  CHECK(r.out.find("examples: 10\n") != std::string::npos);
  CHECK(r.out.find("auc skipped (single class): severe_toxic obscene threat identity_hate\n") != std::string::npos);
  CHECK(slurp(dir / "report.txt") == r.out);
}

TEST_CASE("repeated runs produce identical files and reports") {
  TempDir dir("repeat");
  write_fixture(dir / "train.csv", 30, 2);
  std::vector<std::string> reports, models;
  for (int round = 0; round < 2; ++round) {
    const auto tag = std::to_string(round);
    REQUIRE(run({"preprocess", "--in", dir / "train.csv", "--out", dir / ("c" + tag), "--maxlen", "24"}).code == 0);
    REQUIRE(run({"train", "--model", "lstm", "--data", dir / ("c" + tag), "--out", dir / ("m" + tag), "--epochs",
                 "2", "--dim", "6", "--hidden", "5", "--workers", round == 0 ? "1" : "3"})
                .code == 0);
    const auto r = run({"evaluate", "--model", dir / ("m" + tag), "--data", dir / ("c" + tag)});
    REQUIRE(r.code == 0);
    reports.push_back(r.out);
    models.push_back(slurp(dir / ("m" + tag)));
    CHECK(slurp(dir / "c0") == slurp(dir / ("c" + tag)));
  }
  CHECK(models[0] == models[1]);
  CHECK(reports[0] == reports[1]);
}

TEST_CASE("gridsearch writes a ranked CSV") {
  TempDir dir("grid");
  write_fixture(dir / "train.csv", 30, 3);
  REQUIRE(run({"preprocess", "--in", dir / "train.csv", "--out", dir / "c.bin"}).code == 0);
  write(dir / "grid.json", R"({"alpha": [0.5, 1.0], "ngram_max": [1, 2]})");
  auto r = run({"gridsearch", "--model", "nb", "--grid", dir / "grid.json", "--data", dir / "c.bin", "--out",
                dir / "grid.csv", "--metric", "auc"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("configurations: 4\nbest: config ", 0) == 0);
  const auto csv = slurp(dir / "grid.csv");
  CHECK(csv.rfind("config_id,alpha,ngram_max,metric,rank\n0,0.5,1,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  REQUIRE(run({"gridsearch", "--model", "nb", "--grid", dir / "grid.json", "--data", dir / "c.bin", "--out",
               dir / "grid2.csv", "--metric", "auc"})
              .code == 0);
  CHECK(slurp(dir / "grid2.csv") == csv);

  write(dir / "bad.json", R"({"dropout": [0.1]})");
  r = run({"gridsearch", "--model", "nb", "--grid", dir / "bad.json", "--data", dir / "c.bin", "--out",
           dir / "x.csv"});
  CHECK(r.code == 2);
  CHECK(single_error_line(r.err));
}

TEST_CASE("usage errors exit 1, other failures exit 2") {
  TempDir dir("errors");
  auto r = run({});
  CHECK(r.code == 1);
  CHECK(single_error_line(r.err));

  r = run({"fly"});
  CHECK(r.code == 1);
  CHECK(single_error_line(r.err));

  r = run({"train", "--model", "nb"});
  CHECK(r.code == 1);
  CHECK(single_error_line(r.err));

  r = run({"train", "--model", "svm", "--data", "x", "--out", "y"});
  CHECK(r.code == 1);
  CHECK(r.err.find("svm") != std::string::npos);

  r = run({"predict", "--model", dir / "missing.bin", "--text", "hi"});
  CHECK(r.code == 2);
  CHECK(single_error_line(r.err));

  write(dir / "garbage.bin", "not a model at all");
  r = run({"predict", "--model", dir / "garbage.bin", "--text", "hi"});
  CHECK(r.code == 2);
  CHECK(r.err.find("not a model file") != std::string::npos);

  write(dir / "bad.csv", "id,comment_text\n1,hello\n");
  r = run({"preprocess", "--in", dir / "bad.csv", "--out", dir / "c.bin"});
  CHECK(r.code == 2);
  CHECK(single_error_line(r.err));

  r = run({"preprocess", "--in", dir / "bad.csv", "--out", dir / "c.bin", "--unlabeled"});
  CHECK(r.code == 0);
  r = run({"train", "--model", "nb", "--data", dir / "c.bin", "--out", dir / "m.bin"});
  CHECK(r.code == 2);
  CHECK(single_error_line(r.err));

  r = run({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("preprocess") != std::string::npos);
}
