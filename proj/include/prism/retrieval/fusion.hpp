#pragma once

#include <span>
#include <string>
#include <vector>

namespace prism {

// Raw per-modality encoder outputs for one meme, as written by the extractor.
struct ModalEmbeddings {
  std::string id;
  std::vector<float> visual;
  std::vector<float> textual;
};

// Relative importance of the visual and textual modality. alpha + beta = 1.
class FusionWeights {
 public:
  // Defaults to the grid-searched optimum (0.8 visual / 0.2 textual).
  FusionWeights() = default;
  // Throws PreconditionError unless both lie in [0,1] and sum to 1 within 1e-6.
  FusionWeights(float alpha, float beta);

  float alpha() const noexcept { return alpha_; }
  float beta() const noexcept { return beta_; }

  friend bool operator==(const FusionWeights&, const FusionWeights&) = default;

 private:
  float alpha_ = 0.8f;
  float beta_ = 0.2f;
};

// Throws PreconditionError when the modalities differ in dimension or are
// empty, ZeroVector when either modality is all-zero.
void validate(const ModalEmbeddings& modal);

// Each modality is L2-normalized on its own, blended alpha*v + beta*t, and
// the blend renormalized. Throws ZeroVector if any norm falls below 1e-12.
std::vector<float> fuse(const ModalEmbeddings& modal, FusionWeights weights);

// Dot product of two unit vectors, clamped to [-1, 1]. Throws
// DimensionMismatch when the lengths differ.
float cosine(std::span<const float> a, std::span<const float> b);

}  // namespace prism
