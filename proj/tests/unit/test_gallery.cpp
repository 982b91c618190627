#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "lmcot/errors.hpp"
#include "lmcot/gallery.hpp"

using namespace lmcot;
using doctest::Approx;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v(k) = g(rng);
  return v.normalized();
}

}  // namespace

TEST_CASE("enrollment cap and blur rejection") {
  Gallery g(3);
  for (int k = 0; k < 5; ++k) CHECK(g.enroll("ana", vec({1, 0, 0.1 * k}), true, k) == EnrollStatus::stored);
  CHECK(g.enroll("ana", vec({1, 0, 0}), true, 5) == EnrollStatus::rejected_capacity);
  CHECK(g.find("ana")->embeddings.size() == 5);

  CHECK(g.enroll("bo", vec({0, 1, 0}), false, 6) == EnrollStatus::rejected_blurry);
  CHECK(g.find("bo") == nullptr);
  CHECK(g.enroll("bo", vec({0, 3, 0}), true, 7) == EnrollStatus::stored);
  CHECK(g.find("bo")->embeddings[0].norm() == Approx(1.0));
  CHECK(g.total_embeddings() == 6);
  CHECK(g.last_timestamp() == 7);

  CHECK_THROWS_AS(g.enroll("bo", vec({1, 0}), true, 8), InputError);
  CHECK_THROWS_AS(g.enroll("", vec({1, 0, 0}), true, 8), InputError);
  CHECK_THROWS_AS(g.enroll("zero", vec({0, 0, 0}), true, 8), Error);
  CHECK(to_string(EnrollStatus::rejected_capacity) == "rejected-capacity");
}

TEST_CASE("match") {
  Gallery empty(2);
  const MatchResult none = empty.match(vec({1, 0}), 0.5);
  CHECK_FALSE(none.identity.has_value());

  Gallery g(2);
  g.enroll("a", vec({1, 0}), true, 1);
  g.enroll("b", vec({0.6, 0.8}), true, 2);
  const MatchResult exact = g.match(vec({0.6, 0.8}), 0.5);
  REQUIRE(exact.identity.has_value());
  CHECK(*exact.identity == "b");
  CHECK(exact.best_similarity == Approx(1.0));

  Gallery orth(3);
  orth.enroll("a", vec({1, 0, 0}), true, 1);
  const MatchResult stranger = orth.match(vec({0, 0, 1}), 0.5);
  CHECK_FALSE(stranger.identity.has_value());
  CHECK(stranger.best_similarity == Approx(0.0));

  SUBCASE("threshold is inclusive") {
    CHECK(g.match(vec({1, 0}), 1.0).identity.has_value());
  }
  SUBCASE("ties go to the earliest identity") {
    Gallery t(2);
    t.enroll("first", vec({1, 1}), true, 1);
    t.enroll("second", vec({1, 1}), true, 2);
    CHECK(*t.match(vec({1, 1}), 0.5).identity == "first");
  }
  SUBCASE("every enrolled embedding matches itself") {
    std::mt19937_64 rng(4);
    Gallery r(16);
    for (int k = 0; k < 20; ++k) r.enroll("id" + std::to_string(k % 7), random_unit(rng, 16), true, k);
    for (const Identity& id : r.identities())
      for (const auto& e : id.embeddings) {
        const MatchResult m = r.match(e, 0.5);
        CHECK(m.best_similarity >= 1.0 - 1e-9);
      }
  }
}

TEST_CASE("gallery file round trip") {
  std::mt19937_64 rng(21);
  Gallery g(8);
  for (int k = 0; k < 9; ++k) g.enroll(k % 2 ? "with space" : "plain", random_unit(rng, 8), true, 100 + k);
  std::stringstream buf;
  g.save(buf);
  const std::string first = buf.str();
  const Gallery back = Gallery::load(buf);
  CHECK(back == g);
  std::ostringstream again;
  back.save(again);
  CHECK(again.str() == first);

  const auto path = std::filesystem::temp_directory_path() / "lmcot_test_gallery.txt";
  g.save(path);
  CHECK(Gallery::load(path) == g);
  std::filesystem::remove(path);

  std::istringstream bad("LMCOT-GALLERY\nversion 9\n");
  CHECK_THROWS_AS(Gallery::load(bad), IoError);
}
