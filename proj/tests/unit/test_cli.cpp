#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lmcot/cli.hpp"
#include "lmcot/image.hpp"

using namespace lmcot;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("lmcot_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& leaf) const { return (dir / leaf).string(); }
};

std::string noisy_face(const Scratch& s, const std::string& leaf, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> px(0, 255);
  GrayImage img(40, 40);
  for (double& v : img.pixels) v = px(rng);
  const std::string path = s / leaf;
  write_pgm(path, img);
  return path;
}

}  // namespace

TEST_CASE("check-examples") {
  const Run ok = cli({"check-examples"});
  CHECK(ok.code == kOk);
  CHECK(ok.out.find("FAIL") == std::string::npos);
  const Run tampered = cli({"check-examples", "--m", "0.2"});
  CHECK(tampered.code == kCheckFailed);
  CHECK(tampered.out.find("FAIL") != std::string::npos);
  const Run records = cli({"check-examples", "--format", "record"});
  CHECK(records.out.find("loss=lmcot") != std::string::npos);

  const auto checks = check_examples();
  REQUIRE(checks.size() == 5);
  for (const auto& c : checks) CHECK(c.pass);
}

TEST_CASE("gradcheck command") {
  CHECK(cli({"gradcheck", "--loss", "arcface", "--trials", "5"}).code == kOk);
  CHECK(cli({"gradcheck", "--loss", "lmcot", "--trials", "3", "--step", "1"}).code == kCheckFailed);
  CHECK(cli({"gradcheck", "--loss", "nonsense"}).code == kUsage);
}

TEST_CASE("train writes byte-identical reports") {
  Scratch s("train");
  const std::vector<std::string> base{"train", "--steps", "20", "--per-class", "10", "--classes", "4"};
  auto a = base;
  a.insert(a.end(), {"--out", s / "a"});
  auto b = base;
  b.insert(b.end(), {"--out", s / "b"});
  const Run ra = cli(a);
  const Run rb = cli(b);
  REQUIRE(ra.code == kOk);
  REQUIRE(rb.code == kOk);
  CHECK(ra.out == rb.out);
  CHECK(slurp(s / "a/report.txt") == slurp(s / "b/report.txt"));
  CHECK(slurp(s / "a/model.txt") == slurp(s / "b/model.txt"));
  CHECK(ra.out.find("eer initial=") != std::string::npos);

  const Run binary = cli({"train", "--loss", "double+margin-ce", "--steps", "10", "--per-class", "10"});
  CHECK(binary.code == kOk);
  CHECK(binary.out.find("auc initial=") != std::string::npos);
}

TEST_CASE("usage errors leave no files behind") {
  Scratch s("usage");
  CHECK(cli({"train", "--steps", "-3", "--out", s / "run"}).code == kUsage);
  CHECK(cli({"train", "--loss", "bogus", "--out", s / "run"}).code == kUsage);
  CHECK_FALSE(fs::exists(s / "run/report.txt"));
  CHECK(cli({}).code == kUsage);
  CHECK(cli({"no-such-command"}).code == kUsage);
  CHECK(cli({"--help"}).code == kOk);
}

TEST_CASE("eval and retrieval-eval") {
  Scratch s("eval");
  {
    std::ofstream f(s / "scores.csv");
    f << "label,score\n1,0.9\n1,0.8\n0,0.1\n0,0.2\n";
  }
  const Run ev = cli({"eval", s / "scores.csv", "--out", s / "out", "--format", "record"});
  CHECK(ev.code == kOk);
  CHECK(ev.out.find("eer=0") != std::string::npos);
  CHECK(ev.out.find("auc=1") != std::string::npos);
  CHECK(fs::exists(s / "out/sweep.csv"));
  CHECK(fs::exists(s / "out/histogram.csv"));
  CHECK(cli({"eval", s / "missing.csv"}).code == kIo);

  {
    std::ofstream f(s / "ranked.csv");
    f << "query,rank,correct,confidence\nq1,1,1,0.9\nq1,2,0,0.5\nq1,3,1,0.4\n";
  }
  const Run rt = cli({"retrieval-eval", s / "ranked.csv", "--format", "record"});
  CHECK(rt.code == kOk);
  CHECK(rt.out.find("map_at_100=0.83333333333333") != std::string::npos);

  std::istringstream ranked("q1,1,1,0.9\nq2,1,0,0.8\n");
  const RetrievalData data = parse_ranked_file(ranked);
  CHECK(gap(data.top_predictions, 2) == 0.5);
}

TEST_CASE("enroll and auth") {
  Scratch s("face");
  const std::string gallery = s / "gallery.txt";

  SUBCASE("blank image is rejected as blurry") {
    GrayImage blank(40, 40, 128.0);
    write_pgm(s / "blank.pgm", blank);
    const Run r = cli({"enroll", "--gallery", gallery, "--name", "ana", s / "blank.pgm"});
    CHECK(r.code == kCheckFailed);
    CHECK(r.out.find("rejected-blurry") != std::string::npos);
    CHECK_FALSE(fs::exists(gallery));
  }
  SUBCASE("six images store five") {
    std::vector<std::string> args{"enroll", "--gallery", gallery, "--name", "ana"};
    for (unsigned k = 0; k < 6; ++k) args.push_back(noisy_face(s, "f" + std::to_string(k) + ".pgm", k));
    const Run r = cli(args);
    CHECK(r.code == kOk);
    CHECK(r.out.find("(5 of 5)") != std::string::npos);
    CHECK(r.out.find("rejected-capacity") != std::string::npos);
    const Gallery g = Gallery::load(fs::path(gallery));
    CHECK(g.find("ana")->embeddings.size() == 5);

    const Run accepted = cli({"auth", "--gallery", gallery, s / "f0.pgm"});
    CHECK(accepted.code == kOk);
    CHECK(accepted.out.rfind("Accepted identity=ana", 0) == 0);

    const Run spoof = cli({"auth", "--gallery", gallery, s / "f0.pgm", "--spoof-score", "0.65"});
    CHECK(spoof.code == kCheckFailed);
    CHECK(spoof.out.rfind("InvalidFace", 0) == 0);

    const Run closed = cli({"auth", "--gallery", gallery, s / "f0.pgm", "--left-eye-open", "0.1",
                            "--right-eye-open", "0.2"});
    CHECK(closed.out.rfind("EyesClosed", 0) == 0);
  }
  SUBCASE("empty gallery gives a stranger") {
    noisy_face(s, "probe.pgm", 42);
    const Run r = cli({"auth", "--gallery", s / "none.txt", s / "probe.pgm"});
    CHECK(r.code == kCheckFailed);
    CHECK(r.out.rfind("Stranger", 0) == 0);
    CHECK(r.err.find("not found") != std::string::npos);
  }
}
