#pragma once

// Enrolled identities and nearest-neighbour matching by cosine similarity.
//
// Single-writer contract: enroll mutates, match and save only read. Callers
// that share a gallery across threads must serialize writers themselves.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lmcot {

struct Identity {
  std::string name;
  std::vector<Eigen::VectorXd> embeddings;  ///< unit-norm, enrollment order
  std::vector<std::int64_t> timestamps;     ///< one per embedding
};

enum class EnrollStatus { stored, rejected_blurry, rejected_capacity };

std::string_view to_string(EnrollStatus status);

struct MatchResult {
  /// Empty for a stranger.
  std::optional<std::string> identity;
  /// Best cosine similarity over every enrolled embedding; -1 for an empty gallery.
  double best_similarity = -1.0;
};

class Gallery {
 public:
  static constexpr std::size_t kMaxPerIdentity = 5;

  Gallery() = default;
  /// dim == 0 adopts the dimension of the first enrolled embedding.
  explicit Gallery(Eigen::Index dim) : dim_(dim) {}

  /// Stores a re-normalized copy unless the sharpness gate failed or the
  /// identity is full. Throws InputError for an empty name, a name with
  /// line breaks, a dimension mismatch or a zero vector.
  EnrollStatus enroll(const std::string& name, const Eigen::VectorXd& embedding, bool sharp,
                      std::int64_t timestamp);

  /// Ties resolve to the identity enrolled first. The identity is reported
  /// only when best_similarity >= threshold.
  MatchResult match(const Eigen::VectorXd& probe, double threshold) const;

  const std::vector<Identity>& identities() const { return identities_; }
  const Identity* find(const std::string& name) const;
  Eigen::Index dim() const { return dim_; }
  std::size_t total_embeddings() const;
  /// Largest stored timestamp, or -1 when empty.
  std::int64_t last_timestamp() const;

  /// Text format with 17 significant digits; load(save(g)) == g bit for bit.
  void save(std::ostream& out) const;
  /// Throws IoError on malformed input.
  static Gallery load(std::istream& in);

  void save(const std::filesystem::path& path) const;
  static Gallery load(const std::filesystem::path& path);

  friend bool operator==(const Gallery& a, const Gallery& b);

 private:
  Eigen::Index dim_ = 0;
  std::vector<Identity> identities_;
};

}  // namespace lmcot
