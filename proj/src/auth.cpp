#include "lmcot/auth.hpp"

#include <sstream>

#include "lmcot/errors.hpp"

namespace lmcot {

namespace {

template <typename... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <typename... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

std::string describe(const AuthOutcome& outcome) {
  std::ostringstream out;
  out.precision(6);
  std::visit(Overloaded{
                 [&](const NoFace&) { out << "NoFace"; },
                 [&](const InvalidFace& o) { out << "InvalidFace spoof_score=" << o.spoof_score; },
                 [&](const Stranger& o) { out << "Stranger best_similarity=" << o.best_similarity; },
                 [&](const EyesClosed& o) { out << "EyesClosed identity=" << o.identity; },
                 [&](const Accepted& o) {
                   out << "Accepted identity=" << o.identity << " similarity=" << o.similarity;
                 },
             },
             outcome);
  return out.str();
}

bool spoof_gate(double score, double threshold) { return score < threshold; }

AuthOutcome authenticate(const GrayImage& frame, const Gallery& gallery, const AuthModels& models,
                         const AuthThresholds& thresholds) {
  if (!models.detector || !models.spoof || !models.embedder || !models.eye_open)
    throw InputError("authenticate needs all four models");

  const auto face = largest_box(models.detector(frame));
  if (!face || min_face_filter({*face}, frame.width).empty()) return NoFace{};

  const AlignedFace aligned = align(frame, *face);

  const double spoof_score = models.spoof(frame);
  if (!spoof_gate(spoof_score, thresholds.spoof)) return InvalidFace{spoof_score};

  const MatchResult match = gallery.match(models.embedder(aligned.face), thresholds.similarity);
  if (!match.identity) return Stranger{match.best_similarity};

  const auto [left, right] = eye_crops(aligned.face, aligned.landmarks);
  const bool left_open = models.eye_open(left) >= thresholds.eye_open;
  const bool right_open = models.eye_open(right) >= thresholds.eye_open;
  if (!left_open && !right_open) return EyesClosed{*match.identity};

  return Accepted{*match.identity, match.best_similarity};
}

}  // namespace lmcot
