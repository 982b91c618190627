#include "lmcot/gallery.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "lmcot/angular.hpp"
#include "lmcot/errors.hpp"
#include "lmcot/train.hpp"

namespace lmcot {

namespace {

constexpr const char* kMagic = "LMCOT-GALLERY";
constexpr int kVersion = 1;

}  // namespace

std::string_view to_string(EnrollStatus status) {
  switch (status) {
    case EnrollStatus::stored: return "stored";
    case EnrollStatus::rejected_blurry: return "rejected-blurry";
    case EnrollStatus::rejected_capacity: return "rejected-capacity";
  }
  return "unknown";
}

EnrollStatus Gallery::enroll(const std::string& name, const Eigen::VectorXd& embedding, bool sharp,
                             std::int64_t timestamp) {
  if (name.empty() || name.find_first_of("\r\n") != std::string::npos)
    throw InputError("identity name must be a non-empty single line");
  if (dim_ != 0 && embedding.size() != dim_) throw InputError("embedding dimension mismatch");
  if (embedding.size() == 0) throw InputError("empty embedding");
  Eigen::VectorXd unit = l2_normalize(embedding);

  if (!sharp) return EnrollStatus::rejected_blurry;
  auto it = std::find_if(identities_.begin(), identities_.end(),
                         [&name](const Identity& id) { return id.name == name; });
  if (it != identities_.end() && it->embeddings.size() >= kMaxPerIdentity)
    return EnrollStatus::rejected_capacity;
  if (it == identities_.end()) {
    identities_.push_back({name, {}, {}});
    it = std::prev(identities_.end());
  }
  if (dim_ == 0) dim_ = embedding.size();
  it->embeddings.push_back(std::move(unit));
  it->timestamps.push_back(timestamp);
  return EnrollStatus::stored;
}

MatchResult Gallery::match(const Eigen::VectorXd& probe, double threshold) const {
  MatchResult result;
  if (identities_.empty()) return result;
  if (probe.size() != dim_) throw InputError("probe dimension mismatch");
  const Eigen::VectorXd unit = l2_normalize(probe);
  const Identity* best = nullptr;
  for (const Identity& id : identities_)
    for (const Eigen::VectorXd& e : id.embeddings) {
      const double sim = unit.dot(e);
      if (best == nullptr || sim > result.best_similarity) {
        result.best_similarity = sim;
        best = &id;
      }
    }
  if (best != nullptr && result.best_similarity >= threshold) result.identity = best->name;
  return result;
}

const Identity* Gallery::find(const std::string& name) const {
  auto it = std::find_if(identities_.begin(), identities_.end(),
                         [&name](const Identity& id) { return id.name == name; });
  return it == identities_.end() ? nullptr : &*it;
}

std::size_t Gallery::total_embeddings() const {
  std::size_t n = 0;
  for (const Identity& id : identities_) n += id.embeddings.size();
  return n;
}

std::int64_t Gallery::last_timestamp() const {
  std::int64_t last = -1;
  for (const Identity& id : identities_)
    for (std::int64_t t : id.timestamps) last = std::max(last, t);
  return last;
}

void Gallery::save(std::ostream& out) const {
  out << kMagic << '\n' << "version " << kVersion << '\n' << "dim " << dim_ << '\n'
      << "identities " << identities_.size() << '\n';
  for (const Identity& id : identities_) {
    out << "identity " << id.embeddings.size() << ' ' << id.name << '\n';
    for (std::size_t k = 0; k < id.embeddings.size(); ++k) {
      out << "embedding " << id.timestamps[k];
      for (Eigen::Index j = 0; j < id.embeddings[k].size(); ++j)
        out << ' ' << format_double(id.embeddings[k](j));
      out << '\n';
    }
  }
}

namespace {

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(std::string("gallery file truncated before ") + what);
  return line;
}

template <typename T>
T keyed_value(std::istream& in, const std::string& key) {
  std::istringstream fields(next_line(in, key.c_str()));
  std::string seen;
  T value{};
  if (!(fields >> seen >> value) || seen != key || !(fields >> std::ws).eof())
    throw IoError("gallery file: expected '" + key + "' line");
  return value;
}

}  // namespace

Gallery Gallery::load(std::istream& in) {
  if (next_line(in, "header") != kMagic) throw IoError("not a gallery file");
  if (keyed_value<int>(in, "version") != kVersion) throw IoError("unsupported gallery version");
  const auto dim = keyed_value<long long>(in, "dim");
  const auto count = keyed_value<long long>(in, "identities");
  if (dim < 0 || count < 0) throw IoError("gallery file: negative size");

  Gallery g(static_cast<Eigen::Index>(dim));
  for (long long i = 0; i < count; ++i) {
    const std::string header = next_line(in, "identity");
    std::istringstream fields(header);
    std::string key;
    long long n = -1;
    if (!(fields >> key >> n) || key != "identity" || n < 0 ||
        n > static_cast<long long>(kMaxPerIdentity) || fields.get() != ' ')
      throw IoError("gallery file: malformed identity line");
    std::string name;
    std::getline(fields, name);
    if (name.empty()) throw IoError("gallery file: empty identity name");
    if (g.find(name) != nullptr) throw IoError("gallery file: duplicate identity " + name);
    Identity id{name, {}, {}};
    for (long long k = 0; k < n; ++k) {
      std::istringstream row(next_line(in, "embedding"));
      std::int64_t ts = 0;
      if (!(row >> key >> ts) || key != "embedding") throw IoError("gallery file: malformed embedding line");
      Eigen::VectorXd e(dim);
      for (Eigen::Index j = 0; j < e.size(); ++j) {
        std::string token;
        if (!(row >> token)) throw IoError("gallery file: short embedding");
        try {
          std::size_t used = 0;
          e(j) = std::stod(token, &used);
          if (used != token.size()) throw IoError("gallery file: bad number " + token);
        } catch (const std::logic_error&) {
          throw IoError("gallery file: bad number " + token);
        }
      }
      if (!(row >> std::ws).eof()) throw IoError("gallery file: long embedding");
      id.embeddings.push_back(std::move(e));
      id.timestamps.push_back(ts);
    }
    g.identities_.push_back(std::move(id));
  }
  return g;
}

void Gallery::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  save(out);
  if (!out) throw IoError("failed writing " + path.string());
}

Gallery Gallery::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return load(in);
}

bool operator==(const Gallery& a, const Gallery& b) {
  if (a.dim_ != b.dim_ || a.identities_.size() != b.identities_.size()) return false;
  for (std::size_t i = 0; i < a.identities_.size(); ++i) {
    const Identity& x = a.identities_[i];
    const Identity& y = b.identities_[i];
    if (x.name != y.name || x.timestamps != y.timestamps || x.embeddings.size() != y.embeddings.size())
      return false;
    for (std::size_t k = 0; k < x.embeddings.size(); ++k)
      if (x.embeddings[k] != y.embeddings[k]) return false;
  }
  return true;
}

}  // namespace lmcot
