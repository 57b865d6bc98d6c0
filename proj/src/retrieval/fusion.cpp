#include "prism/retrieval/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "prism/errors.hpp"

namespace prism {

namespace {

constexpr double kMinNorm = 1e-12;

double l2_norm(std::span<const float> v) {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(sum);
}

}  // namespace

FusionWeights::FusionWeights(float alpha, float beta) : alpha_(alpha), beta_(beta) {
  if (!(alpha >= 0.0f && alpha <= 1.0f && beta >= 0.0f && beta <= 1.0f)) {
    throw PreconditionError("fusion weights must lie in [0, 1]");
  }
  if (std::abs(static_cast<double>(alpha) + static_cast<double>(beta) - 1.0) > 1e-6) {
    throw PreconditionError("fusion weights must sum to 1 (alpha + beta = 1)");
  }
}

void validate(const ModalEmbeddings& modal) {
  if (modal.visual.empty() || modal.textual.empty()) {
    throw PreconditionError("embedding '" + modal.id + "' has an empty modality");
  }
  if (modal.visual.size() != modal.textual.size()) {
    throw PreconditionError("embedding '" + modal.id + "': visual and textual dimensions differ");
  }
  if (l2_norm(modal.visual) < kMinNorm) throw ZeroVector("embedding '" + modal.id + "': visual vector is zero");
  if (l2_norm(modal.textual) < kMinNorm) throw ZeroVector("embedding '" + modal.id + "': textual vector is zero");
}

std::vector<float> fuse(const ModalEmbeddings& modal, FusionWeights weights) {
  if (modal.visual.size() != modal.textual.size()) {
    throw DimensionMismatch("embedding '" + modal.id + "': visual and textual dimensions differ");
  }
  const double vn = l2_norm(modal.visual);
  const double tn = l2_norm(modal.textual);
  if (vn < kMinNorm || tn < kMinNorm) {
    throw ZeroVector("embedding '" + modal.id + "': cannot normalize a zero modality");
  }

  const std::size_t dim = modal.visual.size();
  std::vector<double> blend(dim);
  double bn2 = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    blend[i] = weights.alpha() * (modal.visual[i] / vn) + weights.beta() * (modal.textual[i] / tn);
    bn2 += blend[i] * blend[i];
  }
  const double bn = std::sqrt(bn2);
  if (bn < kMinNorm) throw ZeroVector("embedding '" + modal.id + "': fused vector is zero");

  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(blend[i] / bn);
  return out;
}

float cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("cosine: dimension " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
  float dot = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::clamp(dot, -1.0f, 1.0f);
}

}  // namespace prism
