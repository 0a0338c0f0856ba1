#include "balds/bayes.hpp"

namespace balds {

PosteriorSamples SequencePosterior::frame(int index) const {
  if (passes.empty() || index < 0 || index >= static_cast<int>(passes[0].rows()))
    throw DataError("SequencePosterior::frame: index out of range");
  PosteriorSamples out;
  out.head = head;
  out.samples.resize(static_cast<Eigen::Index>(passes.size()), passes[0].cols());
  for (std::size_t t = 0; t < passes.size(); ++t) out.samples.row(t) = passes[t].row(index);
  return out;
}

PosteriorSamples mc_forward(const NetworkSpec& spec, const ParameterStore& params,
                            const Eigen::Ref<const Vector>& input, int passes,
                            std::uint64_t seed) {
  if (passes < 1) throw ConfigError("mc_forward: pass count must be >= 1");
  PosteriorSamples out;
  out.head = spec.head;
  out.samples.resize(passes, spec.output_dim());
  Matrix row = input.transpose();
  for (int t = 0; t < passes; ++t) {
    DropoutMaskSet masks = sample_masks(spec, seed, t);
    out.samples.row(t) = forward(spec, params, row, &masks);
  }
  return out;
}

std::vector<PosteriorSamples> mc_forward_batch(const NetworkSpec& spec,
                                               const ParameterStore& params,
                                               const Eigen::Ref<const Matrix>& inputs, int passes,
                                               std::uint64_t seed) {
  if (passes < 1) throw ConfigError("mc_forward_batch: pass count must be >= 1");
  std::vector<PosteriorSamples> out(static_cast<std::size_t>(inputs.rows()));
  for (auto& s : out) {
    s.head = spec.head;
    s.samples.resize(passes, spec.output_dim());
  }
  for (int t = 0; t < passes; ++t) {
    DropoutMaskSet masks = sample_masks(spec, seed, t);
    Matrix head = forward(spec, params, inputs, &masks);
    for (Eigen::Index n = 0; n < head.rows(); ++n) out[n].samples.row(t) = head.row(n);
  }
  return out;
}

SequencePosterior mc_forward_sequence(const NetworkSpec& spec, const ParameterStore& params,
                                      const Eigen::Ref<const Matrix>& seq, int passes,
                                      std::uint64_t seed) {
  if (passes < 1) throw ConfigError("mc_forward_sequence: pass count must be >= 1");
  SequencePosterior out;
  out.head = spec.head;
  out.passes.reserve(passes);
  for (int t = 0; t < passes; ++t) {
    DropoutMaskSet masks = sample_masks(spec, seed, t);
    out.passes.push_back(forward_sequence(spec, params, seq, &masks));
  }
  return out;
}

std::vector<SequencePosterior> mc_forward_sequences(const NetworkSpec& spec,
                                                    const ParameterStore& params,
                                                    const std::vector<Matrix>& seqs, int passes,
                                                    std::uint64_t seed) {
  if (passes < 1) throw ConfigError("mc_forward_sequences: pass count must be >= 1");
  std::vector<SequencePosterior> out(seqs.size());
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    out[b].head = spec.head;
    out[b].passes.reserve(passes);
  }
  for (int t = 0; t < passes; ++t) {
    DropoutMaskSet masks = sample_masks(spec, seed, t);
    std::vector<Matrix> heads = forward_sequences(spec, params, seqs, &masks);
    for (std::size_t b = 0; b < seqs.size(); ++b) out[b].passes.push_back(std::move(heads[b]));
  }
  return out;
}

Vector posterior_mean(const PosteriorSamples& samples) {
  if (samples.passes() < 1) throw DataError("posterior_mean: empty sample set");
  return samples.samples.colwise().mean();
}

Matrix posterior_mean(const SequencePosterior& samples) {
  if (samples.pass_count() < 1) throw DataError("posterior_mean: empty sample set");
  Matrix mean = Matrix::Zero(samples.passes[0].rows(), samples.passes[0].cols());
  for (const auto& pass : samples.passes) mean += pass;
  return mean / static_cast<double>(samples.pass_count());
}

}  // namespace balds
