#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qctc/model/gqam.hpp"

namespace qctc {

enum class Strategy { kAuto, kPseudo, kRand };

Strategy parse_strategy(const std::string& name);  // "auto" | "pseudo" | "rand"
std::string to_string(Strategy s);

// Text whose reads are counted, so tests can prove a code path never touches it.
class TrackedText {
 public:
  TrackedText() = default;
  explicit TrackedText(std::string text) : text_(std::move(text)) {}
  TrackedText(const TrackedText& o) : text_(o.text_) {}
  TrackedText& operator=(const TrackedText& o) {
    text_ = o.text_;
    return *this;
  }

  const std::string& read() const {
    reads_.fetch_add(1, std::memory_order_relaxed);
    return text_;
  }
  std::size_t reads() const { return reads_.load(); }
  void reset_reads() { reads_.store(0); }

 private:
  std::string text_;
  mutable std::atomic<std::size_t> reads_{0};
};

// One training / generation tuple with its regions resolved.
struct TrainingSample {
  std::string id;
  RegionSet regions;
  std::string target;
  std::vector<std::string> questions;
  std::vector<std::string> answers;
  std::string auto_initial;
  TrackedText pseudo_initial;
};

struct TargetStep {
  std::vector<std::size_t> candidates;  // joint ids, ascending
  std::size_t chosen = 0;
};

// One step per target token plus a final EOS step.
struct TargetDistribution {
  std::vector<TargetStep> steps;
  std::size_t joint_size = 0;

  // Decoder input under teacher forcing: BOS followed by every chosen id
  // except the final EOS.
  std::vector<std::size_t> teacher_inputs() const;
  // steps x joint_size one-hot rows.
  Tensor matrix() const;
};

// Candidates per token: its vocabulary id if present, and |V| + k for every
// OCR token k with the same normalized form. Tokens matching nothing fall
// back to UNK. One candidate is drawn uniformly per step.
TargetDistribution build_targets(const std::vector<std::string>& target_tokens,
                                 const Vocabulary& vocab,
                                 const std::vector<std::string>& ocr_tokens, Rng& rng);

// Binary cross-entropy of sigmoid(logits) summed over steps and entries.
Var caption_loss(Var logits, const TargetDistribution& targets, bool literal = false);

// auto -> automatic caption, pseudo -> pseudo caption, rand -> fair coin.
const std::string& select_initial_caption(const TrainingSample& sample, Strategy strategy,
                                          Rng& rng);

// Questions joined by the separator and initial caption, each cut to
// max_query_len; OOV words become UNK.
ModelInput make_model_input(const TrainingSample& sample, const std::string& initial_caption,
                            const Vocabulary& vocab, const ModelConfig& config);

// Inference always uses the automatic initial caption.
ModelInput make_inference_input(const TrainingSample& sample, const Vocabulary& vocab,
                                const ModelConfig& config);

enum class Optimizer { kSgd, kAdam };

struct TrainConfig {
  Strategy strategy = Strategy::kAuto;
  Optimizer optimizer = Optimizer::kSgd;
  double learning_rate = 0.01;
  std::size_t steps = 500;
  std::size_t batch_size = 8;
  std::uint64_t seed = 1;
  double clip_norm = 1.0;  // <= 0 disables clipping
  bool literal_loss = false;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

struct TrainResult {
  std::vector<double> losses;  // mean sample loss per step
};

using StepCallback = std::function<void(std::size_t step, double loss)>;

// Each step draws a batch from a seeded shuffled order, builds targets and
// initial captions sequentially, then runs the per-sample passes in
// parallel and reduces gradients in sample order. Throws std::runtime_error
// if the loss becomes non-finite.
TrainResult train(GqamModel& model, const std::vector<TrainingSample>& samples,
                  const Vocabulary& vocab, const TrainConfig& config,
                  const StepCallback& on_step = {});

void write_loss_curve(const std::filesystem::path& path, const std::vector<double>& losses);

// Header "QCTK", the model configuration text, then one named matrix block
// per parameter. Values are stored as float32.
void save_checkpoint(const std::filesystem::path& path, const GqamModel& model);
std::unique_ptr<GqamModel> load_checkpoint(const std::filesystem::path& path);

}  // namespace qctc
