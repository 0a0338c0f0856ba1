#include "balds/train.hpp"

#include <algorithm>
#include <numeric>

#include "balds/rng.hpp"

namespace balds {

Vector inverse_frequency_weights(const IntMatrix& labels) {
  if (labels.rows() == 0) throw DataError("inverse_frequency_weights: no labels");
  Vector weights(labels.cols());
  double n = static_cast<double>(labels.rows());
  for (Eigen::Index c = 0; c < labels.cols(); ++c) {
    double count = labels.col(c).cast<double>().sum();
    weights[c] = n / std::max(count, 1.0);
  }
  // Scale so weights sum to the class count; the loss normalizes anyway.
  weights *= static_cast<double>(labels.cols()) / weights.sum();
  return weights;
}

TrainStats train_frame_model(const NetworkSpec& spec, ParameterStore& params,
                             const Matrix& features, const IntMatrix& labels,
                             const Vector& class_weights, const TrainOptions& options) {
  if (features.rows() == 0) throw DataError("train_frame_model: empty training set");
  if (features.rows() != labels.rows())
    throw DataError("train_frame_model: feature/label row mismatch");
  Eigen::Index n = features.rows();
  Matrix targets = labels.cast<double>();

  Rng shuffle_rng(hash_combine(options.seed, 0x5f1eu));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  TrainStats stats;
  std::int64_t batch_counter = 0;
  for (int epoch = 0; epoch < options.epoch_cap; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_cost = 0.0;
    for (Eigen::Index at = 0; at < n; at += options.batch_size) {
      Eigen::Index size = std::min<Eigen::Index>(options.batch_size, n - at);
      Matrix x(size, features.cols());
      Matrix g(size, targets.cols());
      for (Eigen::Index r = 0; r < size; ++r) {
        x.row(r) = features.row(order[static_cast<std::size_t>(at + r)]);
        g.row(r) = targets.row(order[static_cast<std::size_t>(at + r)]);
      }
      DropoutMaskSet masks = sample_masks(spec, hash_combine(options.seed, 0xba7cu),
                                          batch_counter++);
      ForwardCache cache;
      Matrix pred = forward(spec, params, x, &masks, &cache);
      double loss = dice_loss(pred, g, class_weights);
      epoch_cost += loss * static_cast<double>(size);
      ParamBlocks grads = backward(spec, params, cache, dice_loss_grad(pred, g, class_weights));
      adam_step(params, grads, options.adam);
    }
    epoch_cost /= static_cast<double>(n);
    ensure_finite(epoch_cost, "training cost");
    stats.epochs_run = epoch + 1;
    stats.final_cost = epoch_cost;
    if (epoch_cost < options.cost_threshold) {
      stats.hit_cost_threshold = true;
      break;
    }
  }
  return stats;
}

TrainStats train_sequence_model(const NetworkSpec& spec, ParameterStore& params,
                                const std::vector<SequenceExample>& examples,
                                const TrainOptions& options) {
  if (examples.empty()) throw DataError("train_sequence_model: empty training set");
  std::int64_t annotated_total = 0;
  for (const auto& ex : examples) {
    if (ex.features.rows() != ex.targets.size() ||
        ex.features.rows() != static_cast<Eigen::Index>(ex.mask.size()))
      throw DataError("train_sequence_model: inconsistent example lengths");
    annotated_total += std::accumulate(ex.mask.begin(), ex.mask.end(), std::int64_t{0});
  }
  if (annotated_total == 0) throw DataError("train_sequence_model: no annotated frames");

  Rng shuffle_rng(hash_combine(options.seed, 0x5e9u));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  TrainStats stats;
  std::int64_t batch_counter = 0;
  for (int epoch = 0; epoch < options.epoch_cap; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_cost = 0.0;
    std::int64_t epoch_frames = 0;

    std::size_t at = 0;
    while (at < order.size()) {
      // Pack videos until the batch carries at least batch_size frames.
      std::vector<std::size_t> chosen;
      Eigen::Index frames = 0;
      while (at < order.size() &&
             (chosen.empty() || frames < static_cast<Eigen::Index>(options.batch_size))) {
        chosen.push_back(order[at++]);
        frames += examples[chosen.back()].features.rows();
      }
      std::vector<Matrix> seqs;
      seqs.reserve(chosen.size());
      for (std::size_t idx : chosen) seqs.push_back(examples[idx].features);

      DropoutMaskSet masks = sample_masks(spec, hash_combine(options.seed, 0xba7du),
                                          batch_counter++);
      ForwardCache cache;
      std::vector<Matrix> outs = forward_sequences(spec, params, seqs, &masks, &cache);

      // Masked cost over the batch, normalized by annotated frames.
      std::int64_t annotated = 0;
      for (std::size_t idx : chosen)
        annotated += std::accumulate(examples[idx].mask.begin(), examples[idx].mask.end(),
                                     std::int64_t{0});
      if (annotated == 0) continue;  // nothing to learn from this batch

      double batch_cost = 0.0;
      std::vector<Matrix> d_outs;
      d_outs.reserve(chosen.size());
      for (std::size_t k = 0; k < chosen.size(); ++k) {
        const SequenceExample& ex = examples[chosen[k]];
        Vector costs = cross_entropy_rows(outs[k], ex.targets);
        int video_annotated = 0;
        double mean_cost = masked_sequence_loss(costs, ex.mask, &video_annotated);
        batch_cost += mean_cost * video_annotated;
        Vector row_w = Vector::Zero(costs.size());
        for (Eigen::Index i = 0; i < costs.size(); ++i)
          if (ex.mask[static_cast<std::size_t>(i)])
            row_w[i] = 1.0 / static_cast<double>(annotated);
        d_outs.push_back(cross_entropy_rows_grad(outs[k], ex.targets, row_w));
      }
      ParamBlocks grads = backward_sequences(spec, params, cache, d_outs);
      adam_step(params, grads, options.adam);
      epoch_cost += batch_cost;
      epoch_frames += annotated;
    }

    epoch_cost /= static_cast<double>(epoch_frames);
    ensure_finite(epoch_cost, "training cost");
    stats.epochs_run = epoch + 1;
    stats.final_cost = epoch_cost;
    if (epoch_cost < options.cost_threshold) {
      stats.hit_cost_threshold = true;
      break;
    }
  }
  return stats;
}

}  // namespace balds
