#ifndef SIGNBENCH_NN_TRAIN_HPP
#define SIGNBENCH_NN_TRAIN_HPP

#include <fstream>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "signbench/nn/augment.hpp"
#include "signbench/nn/loss.hpp"
#include "signbench/nn/network.hpp"
#include "signbench/nn/optimizer.hpp"

namespace signbench {

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::size_t patience = 12;
  bool augmentation = true;
  std::uint64_t seed = 0;
  double validation_fraction = 0.2;  // consumed by the harness split
  AdamConfig adam;
  ActivationKind activation = ActivationKind::mish;
  double dropout_keep = 0.5;
  AugmentParams augment_params;

  void validate() const {
    if (patience < 1) throw ConfigError("patience must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
      throw ConfigError("validation fraction must be in (0,1)");
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    if (max_epochs == 0) throw ConfigError("max epochs must be positive");
    if (!(dropout_keep > 0.0 && dropout_keep <= 1.0))
      throw ConfigError("dropout keep probability must be in (0,1]");
  }
};

/// Patience rule on validation loss: stop once `patience` consecutive
/// epochs fail to improve on the best value; the best epoch's weights are
/// the ones to keep. Epochs are 1-based.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {
    if (patience < 1) throw Error("patience must be >= 1");
  }

  /// Returns true when training should stop after this epoch.
  bool observe(double val_loss) {
    ++epoch_;
    if (val_loss < best_) {
      best_ = val_loss;
      best_epoch_ = epoch_;
      since_best_ = 0;
      return false;
    }
    ++since_best_;
    return since_best_ >= patience_;
  }

  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }
  std::size_t epochs_seen() const { return epoch_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t since_best_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0, train_acc = 0, val_loss = 0, val_acc = 0;
};

struct TrainingHistory {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;
  std::size_t stopped_epoch = 0;
};

template <typename T>
struct TrainResult {
  std::vector<Tensor<T>> best_weights;
  TrainingHistory history;
};

namespace detail {

template <typename T>
Tensor<T> assemble_batch(const std::vector<Tensor<T>>& images,
                         const std::vector<std::size_t>& order, std::size_t lo, std::size_t hi,
                         bool augment_batch, const AugmentParams& ap, SeededRng epoch_rng) {
  const Shape& s0 = images[order[lo]].shape();
  Tensor<T> batch({hi - lo, s0[0], s0[1], s0[2]});
  std::size_t img_elems = shape_numel(s0);
  parallel_for(lo, hi, 1, [&](std::size_t a, std::size_t b) {
    for (std::size_t i = a; i < b; ++i) {
      const Tensor<T>& src = images[order[i]];
      if (src.shape() != s0) throw Error("batch images must share one shape");
      T* dst = batch.data() + (i - lo) * img_elems;
      if (augment_batch) {
        SeededRng rng = epoch_rng.substream(order[i]);
        Tensor<T> aug = augment(src, rng, ap);
        std::copy(aug.data(), aug.data() + img_elems, dst);
      } else {
        std::copy(src.data(), src.data() + img_elems, dst);
      }
    }
  });
  return batch;
}

template <typename T>
std::pair<double, std::size_t> batch_metrics(const Tensor<T>& logits,
                                             const std::vector<int>& labels, double loss) {
  std::size_t correct = 0;
  std::size_t c = logits.dim(1);
  for (std::size_t i = 0; i < logits.dim(0); ++i)
    if (argmax_index(logits.data() + i * c, c) == static_cast<std::size_t>(labels[i])) ++correct;
  return {loss, correct};
}

}  // namespace detail

/// Class predictions in inference mode (running BN stats, dropout off).
template <typename T>
std::vector<int> predict(Network<T>& net, const std::vector<Tensor<T>>& images,
                         std::size_t batch_size = 32) {
  std::vector<int> out;
  out.reserve(images.size());
  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t lo = 0; lo < images.size(); lo += batch_size) {
    std::size_t hi = std::min(images.size(), lo + batch_size);
    auto batch = detail::assemble_batch(images, order, lo, hi, false, {}, SeededRng());
    auto logits = net.forward_logits(batch, Mode::infer);
    std::size_t c = logits.dim(1);
    for (std::size_t i = 0; i < logits.dim(0); ++i)
      out.push_back(static_cast<int>(argmax_index(logits.data() + i * c, c)));
  }
  return out;
}

/// (accuracy, mean cross-entropy) in inference mode.
template <typename T>
std::pair<double, double> evaluate(Network<T>& net, const std::vector<Tensor<T>>& images,
                                   const std::vector<int>& labels, std::size_t batch_size = 32) {
  if (images.empty() || images.size() != labels.size())
    throw Error("evaluate: images/labels misaligned or empty");
  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), 0);
  double loss_sum = 0;
  std::size_t correct = 0;
  for (std::size_t lo = 0; lo < images.size(); lo += batch_size) {
    std::size_t hi = std::min(images.size(), lo + batch_size);
    auto batch = detail::assemble_batch(images, order, lo, hi, false, {}, SeededRng());
    auto logits = net.forward_logits(batch, Mode::infer);
    std::vector<int> batch_labels(labels.begin() + lo, labels.begin() + hi);
    auto [loss, grad] = softmax_cross_entropy(logits, batch_labels);
    (void)grad;
    auto [l, c] = detail::batch_metrics(logits, batch_labels, loss);
    loss_sum += l * double(hi - lo);
    correct += c;
  }
  return {double(correct) / double(images.size()), loss_sum / double(images.size())};
}

/// Mini-batch Adam with on-the-fly augmentation (training batches only),
/// per-epoch train/val tracking, early stopping on validation loss and
/// best-epoch weight restoration.
template <typename T>
TrainResult<T> train(Network<T>& net, const std::vector<Tensor<T>>& train_images,
                     const std::vector<int>& train_labels,
                     const std::vector<Tensor<T>>& val_images, const std::vector<int>& val_labels,
                     const TrainConfig& cfg) {
  cfg.validate();
  if (train_images.empty() || val_images.empty())
    throw Error("train: training and validation sets must be non-empty");
  if (train_images.size() != train_labels.size() || val_images.size() != val_labels.size())
    throw Error("train: images/labels misaligned");

  SeededRng root(cfg.seed, 0x545241494e);  // training-loop stream family
  AdamState<T> adam(cfg.adam);
  EarlyStopping stopper(cfg.patience);
  TrainResult<T> result;
  result.best_weights = net.snapshot_weights();

  std::vector<std::size_t> order(train_images.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    SeededRng shuffle_rng = root.substream(2 * epoch);
    SeededRng augment_rng = root.substream(2 * epoch + 1);
    shuffle_rng.shuffle(order);

    double train_loss_sum = 0;
    std::size_t train_correct = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
      std::size_t hi = std::min(order.size(), lo + cfg.batch_size);
      auto batch = detail::assemble_batch(train_images, order, lo, hi, cfg.augmentation,
                                          cfg.augment_params, augment_rng);
      std::vector<int> batch_labels(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) batch_labels[i - lo] = train_labels[order[i]];

      auto logits = net.forward_logits(batch, Mode::train);
      auto [loss, dlogits] = softmax_cross_entropy(logits, batch_labels);
      auto [l, correct] = detail::batch_metrics(logits, batch_labels, loss);
      train_loss_sum += l * double(hi - lo);
      train_correct += correct;

      net.zero_grads();
      net.backward_from_logits(dlogits);
      adam.apply(net.parameters(), net.gradients());
    }

    auto [val_acc, val_loss] = evaluate(net, val_images, val_labels, cfg.batch_size);
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = train_loss_sum / double(train_images.size());
    stats.train_acc = double(train_correct) / double(train_images.size());
    stats.val_loss = val_loss;
    stats.val_acc = val_acc;
    result.history.epochs.push_back(stats);

    bool stop = stopper.observe(val_loss);
    if (stopper.best_epoch() == epoch) result.best_weights = net.snapshot_weights();
    if (stop) break;
  }

  result.history.best_epoch = stopper.best_epoch();
  result.history.stopped_epoch = stopper.epochs_seen();
  net.restore_weights(result.best_weights);
  return result;
}

/// epoch,train_loss,train_acc,val_loss,val_acc (RFC-4180 line endings).
inline void save_history_csv(const TrainingHistory& history, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open for writing: " + path);
  os << "epoch,train_loss,train_acc,val_loss,val_acc\r\n";
  for (const auto& e : history.epochs)
    os << e.epoch << ',' << format_sig(e.train_loss) << ',' << format_sig(e.train_acc) << ','
       << format_sig(e.val_loss) << ',' << format_sig(e.val_acc) << "\r\n";
  if (!os) throw DataError("failed writing history: " + path);
}

}  // namespace signbench

#endif  // SIGNBENCH_NN_TRAIN_HPP
