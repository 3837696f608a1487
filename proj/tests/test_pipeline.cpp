#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "udforest/forest_io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kBin = UDFOREST_BIN;
const std::string kData = UDFOREST_DATA_DIR;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "udforest_pipeline_tests";
  fs::create_directories(dir);
  return dir;
}

// Runs the CLI through the shell, capturing exit code and both streams.
RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path dir = scratch_dir();
  const fs::path out_file = dir / ("stdout." + std::to_string(counter));
  const fs::path err_file = dir / ("stderr." + std::to_string(counter));
  ++counter;
  const std::string cmd = args + " >" + out_file.string() + " 2>" +
                          err_file.string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  REQUIRE(status != -1);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_file);
  result.err = slurp(err_file);
  return result;
}

std::string toy_args() {
  return " --src " + kData + "/toys/src.conllu --tgt " + kData +
         "/toys/tgt.conllu --align " + kData + "/toys/align.tsv";
}

std::string corpus_args() {
  return " --src " + kData + "/corpus/src.conllu --tgt " + kData +
         "/corpus/tgt.conllu --align " + kData + "/corpus/align.tsv";
}

}  // namespace

TEST_CASE("merge reproduces the pinned toy outputs") {
  const std::string relations = " --relations " + kData +
                                "/toys/relations.jsonl";
  SUBCASE("theta 0.5 merges and carries the annotations") {
    const RunResult r =
        run(kBin + " merge" + toy_args() + relations + " --theta 0.5");
    CHECK(r.code == 0);
    CHECK(r.out == slurp(kData + "/golden/merge_theta05.jsonl"));
    CHECK(r.err.find("sentences:       2") != std::string::npos);
    CHECK(r.err.find("merge rate:      45.5%") != std::string::npos);
  }
  SUBCASE("theta 1.0 degenerates to the disjoint union") {
    const RunResult r =
        run(kBin + " merge" + toy_args() + relations + " --theta 1.0");
    CHECK(r.code == 0);
    CHECK(r.out == slurp(kData + "/golden/merge_theta10.jsonl"));
    CHECK(r.err.find("2 relation(s) dropped (projection failed)") !=
          std::string::npos);
    CHECK(r.err.find("merge rate:      0.0%") != std::string::npos);
  }
}

TEST_CASE("export renders the pinned DOT graphs") {
  const fs::path dir = scratch_dir();
  const fs::path forests = dir / "toys_theta05.jsonl";
  RunResult merged = run(kBin + " merge" + toy_args() + " --relations " +
                         kData + "/toys/relations.jsonl --theta 0.5 --out " +
                         forests.string());
  REQUIRE(merged.code == 0);

  SUBCASE("dot format") {
    const RunResult r =
        run(kBin + " export " + forests.string() + " --format dot");
    CHECK(r.code == 0);
    CHECK(r.out == slurp(kData + "/golden/forest_theta05.dot"));
  }
  SUBCASE("graph jsonl format") {
    const RunResult r =
        run(kBin + " export " + forests.string() + " --format jsonl");
    CHECK(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
      const auto j = nlohmann::json::parse(line);
      CHECK(j.at("n").get<int>() ==
            static_cast<int>(j.at("forms").size()));
      CHECK(j.at("edges").size() == j.at("forms").size() - 1);
      ++count;
    }
    CHECK(count == 2);
  }
}

TEST_CASE("stats reports the pooled toy rates") {
  const RunResult r = run(kBin + " stats" + toy_args() + " --relations " +
                          kData + "/toys/relations.jsonl --theta 0.5" +
                          " --group-by-root-upos");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("theta").get<double>() == doctest::Approx(0.5));
  CHECK(j.at("bias").at("misaligned_word_rate").get<double>() ==
        doctest::Approx(1.0 / 11.0));
  CHECK(j.at("bias").at("mismatched_edge_rate").get<double>() ==
        doctest::Approx(0.0));
  CHECK(j.at("bias").at("mismatched_path_rate").get<double>() ==
        doctest::Approx(0.0));
  CHECK(j.at("bias").at("sentence_count").get<int>() == 2);
  CHECK(j.at("distances").at("src").at("mean_sequential_distance")
            .get<double>() == doctest::Approx(1.5));
  CHECK(j.at("distances").at("src").at("mean_syntactic_distance")
            .get<double>() == doctest::Approx(1.5));
  CHECK(j.at("distances").at("src").at("instance_count").get<int>() == 2);
  CHECK(j.at("distances").at("tgt").at("instance_count").get<int>() == 0);
  CHECK(j.at("merge").at("merge_rate").get<double>() ==
        doctest::Approx(5.0 / 11.0));
  CHECK(j.at("merge").at("mean_forest_len").get<double>() ==
        doctest::Approx(3.0));
  REQUIRE(j.contains("by_root_upos"));
  CHECK(j.at("by_root_upos").at("VERB").at("sentence_count").get<int>() == 2);
}

TEST_CASE("mean merged count falls as theta rises") {
  double prev = 1e18;
  for (const std::string theta : {"0.1", "0.3", "0.5", "0.7", "0.9", "1.0"}) {
    const RunResult r =
        run(kBin + " stats" + corpus_args() + " --theta " + theta);
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    const double mean_merged = j.at("merge").at("mean_merged").get<double>();
    CHECK(mean_merged <= prev);
    prev = mean_merged;
  }
  CHECK(prev == 0.0);  // the merge bound is strict, so 1.0 admits nothing
}

TEST_CASE("stats handles target-side relations") {
  const fs::path dir = scratch_dir();
  const fs::path rels = dir / "tgt_side.jsonl";
  spit(rels,
       "{\"sent_id\":\"s1\",\"subj_span\":[1,1],\"obj_span\":[3,3],"
       "\"label\":\"R\",\"side\":\"TGT\"}\n");
  const RunResult r = run(kBin + " stats" + toy_args() + " --relations " +
                          rels.string() + " --theta 0.5");
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("distances").at("src").at("instance_count").get<int>() == 0);
  CHECK(j.at("distances").at("tgt").at("instance_count").get<int>() == 1);
  CHECK(j.at("distances").at("tgt").at("mean_sequential_distance")
            .get<double>() == doctest::Approx(2.0));
}

TEST_CASE("strict mode demands agreeing sentence ids") {
  const fs::path dir = scratch_dir();
  const fs::path src = dir / "strict_src.conllu";
  const fs::path tgt = dir / "strict_tgt.conllu";
  const fs::path align = dir / "strict_align.tsv";
  spit(src,
       "# sent_id = s1\n"
       "1\taa\t_\tNOUN\t_\t_\t2\tnsubj\t_\t_\n"
       "2\tbb\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
       "\n"
       "# sent_id = s2\n"
       "1\tcc\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
       "\n");
  spit(tgt,
       "# sent_id = s1\n"
       "1\txx\t_\tNOUN\t_\t_\t2\tnsubj\t_\t_\n"
       "2\tyy\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
       "\n");
  spit(align, "s1\t1\t1\t0.9\ns1\t2\t2\t0.9\ns2\t1\t1\t0.9\n");

  const std::string args = " --src " + src.string() + " --tgt " +
                           tgt.string() + " --align " + align.string();
  SUBCASE("mismatch is its own exit code") {
    const RunResult r = run(kBin + " merge" + args);
    CHECK(r.code == 2);
    CHECK(r.err.find("sent_id sets disagree") != std::string::npos);
    CHECK(r.err.find("s2 (missing in tgt)") != std::string::npos);
    CHECK(r.out.empty());
  }
  SUBCASE("lenient mode narrows to the shared sentences") {
    const RunResult r = run(kBin + " merge" + args + " --lenient");
    CHECK(r.code == 0);
    const auto records = udforest::read_forest_jsonl(r.out);
    REQUIRE(records.size() == 1);
    CHECK(records[0].forest.sent_id == "s1");
  }
}

TEST_CASE("duplicate sentence ids are rejected") {
  const fs::path dir = scratch_dir();
  const fs::path src = dir / "dup_src.conllu";
  spit(src,
       "# sent_id = d1\n"
       "1\taa\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
       "\n"
       "# sent_id = d1\n"
       "1\tbb\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
       "\n");
  const RunResult r = run(kBin + " merge --src " + src.string() + " --tgt " +
                          src.string() + " --align " + kData +
                          "/toys/align.tsv --lenient");
  CHECK(r.code == 1);
  CHECK(r.err.find("duplicate sent_id \"d1\"") != std::string::npos);
}

TEST_CASE("bad invocations fail fast") {
  SUBCASE("missing input file") {
    const RunResult r = run(kBin + " merge --src /nonexistent.conllu --tgt " +
                            kData + "/toys/tgt.conllu --align " + kData +
                            "/toys/align.tsv");
    CHECK(r.code != 0);
  }
  SUBCASE("theta outside [0, 1]") {
    const RunResult r = run(kBin + " merge" + toy_args() + " --theta 1.5");
    CHECK(r.code != 0);
  }
  SUBCASE("no subcommand") {
    const RunResult r = run(kBin);
    CHECK(r.code != 0);
  }
  SUBCASE("unknown export format") {
    const RunResult r = run(kBin + " export " + kData +
                            "/golden/merge_theta05.jsonl --format svg");
    CHECK(r.code != 0);
  }
}

TEST_CASE("thread counts do not change the output") {
  const std::string cmd =
      kBin + " merge" + corpus_args() + " --relations " + kData +
      "/corpus/relations.jsonl --theta 0.6";
  const RunResult one = run("UDFOREST_THREADS=1 " + cmd);
  const RunResult four = run("UDFOREST_THREADS=4 " + cmd);
  REQUIRE(one.code == 0);
  REQUIRE(four.code == 0);
  CHECK(!one.out.empty());
  CHECK(one.out == four.out);
  CHECK(one.err == four.err);
}

TEST_CASE("merge output on the large corpus satisfies the record schema") {
  const RunResult r = run(kBin + " merge" + corpus_args() + " --relations " +
                          kData + "/corpus/relations.jsonl --theta 0.5");
  REQUIRE(r.code == 0);
  const auto records = udforest::read_forest_jsonl(r.out);  // strict reader
  CHECK(records.size() == 50);
  for (const auto& rec : records) {
    CHECK(rec.forest.nodes.size() ==
          1 + static_cast<std::size_t>(rec.forest.src_len +
                                       rec.forest.tgt_len -
                                       rec.forest.merged_count));
  }
}

TEST_CASE("project rewrites spans onto the other side") {
  const RunResult r = run(kBin + " project" + toy_args() + " --relations " +
                          kData + "/toys/relations.jsonl --theta 0.5");
  REQUIRE(r.code == 0);
  CHECK(r.out ==
        "{\"sent_id\":\"s1\",\"subj_span\":[1,1],\"obj_span\":[3,3],"
        "\"label\":\"REL-A\",\"side\":\"TGT\"}\n"
        "{\"sent_id\":\"s2\",\"subj_span\":[1,1],\"obj_span\":[2,2],"
        "\"label\":\"REL-B\",\"side\":\"TGT\"}\n");
}

TEST_CASE("projection failures drop or keep the original") {
  const fs::path dir = scratch_dir();
  const fs::path src = dir / "proj_src.conllu";
  const fs::path tgt = dir / "proj_tgt.conllu";
  const fs::path align = dir / "proj_align.tsv";
  const fs::path rels = dir / "proj_rels.jsonl";
  spit(src,
       "# sent_id = p1\n"
       "1\taa\t_\tNOUN\t_\t_\t2\tnsubj\t_\t_\n"
       "2\tbb\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
       "\n");
  spit(tgt,
       "# sent_id = p1\n"
       "1\txx\t_\tNOUN\t_\t_\t2\tnsubj\t_\t_\n"
       "2\tyy\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
       "\n");
  spit(align, "p1\t1\t1\t0.9\n");
  spit(rels,
       "{\"sent_id\":\"p1\",\"subj_span\":[1,1],\"obj_span\":[2,2],"
       "\"label\":\"R\"}\n");
  const std::string args = " --src " + src.string() + " --tgt " +
                           tgt.string() + " --align " + align.string() +
                           " --relations " + rels.string() + " --theta 0.5";
  SUBCASE("dropped by default") {
    const RunResult r = run(kBin + " project" + args);
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    CHECK(r.err.find("1 projection(s) failed") != std::string::npos);
  }
  SUBCASE("kept verbatim on request") {
    const RunResult r = run(kBin + " project" + args + " --keep-unprojected");
    CHECK(r.code == 0);
    CHECK(r.out ==
          "{\"sent_id\":\"p1\",\"subj_span\":[1,1],\"obj_span\":[2,2],"
          "\"label\":\"R\",\"side\":\"SRC\"}\n");
  }
}

TEST_CASE("score is deterministic and honours zero-init") {
  const fs::path dir = scratch_dir();
  const fs::path forests = dir / "score_input.jsonl";
  const RunResult merged = run(kBin + " merge" + toy_args() +
                               " --relations " + kData +
                               "/toys/relations.jsonl --theta 0.5 --out " +
                               forests.string());
  REQUIRE(merged.code == 0);

  SUBCASE("zero parameters spread mass uniformly") {
    const RunResult r = run(kBin + " score " + forests.string() +
                            " --dim 16 --zero-init");
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
      const auto j = nlohmann::json::parse(line);
      CHECK(j.at("probs").at("REL-A").get<double>() == doctest::Approx(0.5));
      CHECK(j.at("probs").at("REL-B").get<double>() == doctest::Approx(0.5));
      ++count;
    }
    CHECK(count == 2);
  }
  SUBCASE("equal seeds give byte-equal scores, different seeds do not") {
    const std::string cmd =
        kBin + " score " + forests.string() + " --dim 24 --layers 2 --seed 7";
    const RunResult a = run(cmd);
    const RunResult b = run(cmd);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(!a.out.empty());
    const RunResult c = run(kBin + " score " + forests.string() +
                            " --dim 24 --layers 2 --seed 8");
    REQUIRE(c.code == 0);
    CHECK(c.out != a.out);
  }
  SUBCASE("probabilities sum to one per relation") {
    const RunResult r =
        run(kBin + " score " + forests.string() + " --dim 8 --seed 3");
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string line;
    while (std::getline(lines, line)) {
      const auto j = nlohmann::json::parse(line);
      double total = 0.0;
      for (const auto& [label, p] : j.at("probs").items()) {
        CHECK(p.get<double>() > 0.0);
        total += p.get<double>();
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("score refuses a corpus with no annotations") {
  const RunResult r =
      run(kBin + " score " + kData + "/golden/merge_theta10.jsonl");
  CHECK(r.code == 1);
  CHECK(r.err.find("no relations to score") != std::string::npos);
}

TEST_CASE("export rejects malformed forest files") {
  const fs::path dir = scratch_dir();
  const fs::path bad = dir / "bad.jsonl";
  spit(bad, "{not json\n");
  const RunResult r = run(kBin + " export " + bad.string());
  CHECK(r.code == 1);
  CHECK(r.err.find("invalid JSON") != std::string::npos);
}
