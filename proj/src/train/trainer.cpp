#include "qctc/train/trainer.hpp"

#include <omp.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "qctc/numeric/matrix_io.hpp"
#include "qctc/text/normalize.hpp"

namespace qctc {

Strategy parse_strategy(const std::string& name) {
  if (name == "auto") return Strategy::kAuto;
  if (name == "pseudo") return Strategy::kPseudo;
  if (name == "rand") return Strategy::kRand;
  throw std::invalid_argument("unknown strategy '" + name + "' (expected auto, pseudo or rand)");
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kAuto: return "auto";
    case Strategy::kPseudo: return "pseudo";
    case Strategy::kRand: return "rand";
  }
  return "?";
}

std::vector<std::size_t> TargetDistribution::teacher_inputs() const {
  std::vector<std::size_t> ids{Vocabulary::kBos};
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) ids.push_back(steps[i].chosen);
  return ids;
}

Tensor TargetDistribution::matrix() const {
  Tensor m(steps.size(), joint_size);
  for (std::size_t i = 0; i < steps.size(); ++i) m(i, steps[i].chosen) = 1.0;
  return m;
}

TargetDistribution build_targets(const std::vector<std::string>& target_tokens,
                                 const Vocabulary& vocab,
                                 const std::vector<std::string>& ocr_tokens, Rng& rng) {
  std::vector<std::string> ocr_norm;
  for (const auto& o : ocr_tokens) ocr_norm.push_back(text::normalize_token(o));
  TargetDistribution d;
  d.joint_size = vocab.size() + ocr_tokens.size();
  for (const auto& raw : target_tokens) {
    const std::string tok = text::normalize_token(raw);
    TargetStep step;
    if (!tok.empty() && vocab.contains(tok)) step.candidates.push_back(vocab.id(tok));
    for (std::size_t k = 0; k < ocr_norm.size(); ++k)
      if (!tok.empty() && ocr_norm[k] == tok) step.candidates.push_back(vocab.size() + k);
    if (step.candidates.empty()) step.candidates.push_back(Vocabulary::kUnk);
    step.chosen = step.candidates.size() == 1 ? step.candidates[0]
                                              : step.candidates[rng.index(step.candidates.size())];
    d.steps.push_back(std::move(step));
  }
  TargetStep eos;
  eos.candidates = {Vocabulary::kEos};
  eos.chosen = Vocabulary::kEos;
  d.steps.push_back(std::move(eos));
  return d;
}

Var caption_loss(Var logits, const TargetDistribution& targets, bool literal) {
  if (logits.rows() != targets.steps.size() || logits.cols() != targets.joint_size)
    throw std::invalid_argument("logits and targets disagree in shape");
  return ad::binary_cross_entropy_logits(logits, targets.matrix(), literal);
}

const std::string& select_initial_caption(const TrainingSample& sample, Strategy strategy,
                                          Rng& rng) {
  switch (strategy) {
    case Strategy::kAuto: return sample.auto_initial;
    case Strategy::kPseudo: return sample.pseudo_initial.read();
    case Strategy::kRand:
      return rng.coin() ? sample.pseudo_initial.read() : sample.auto_initial;
  }
  throw std::logic_error("bad strategy");
}

ModelInput make_model_input(const TrainingSample& sample, const std::string& initial_caption,
                            const Vocabulary& vocab, const ModelConfig& config) {
  ModelInput in;
  in.regions = sample.regions.truncated(config.max_objects, config.max_ocr);
  for (const auto& q : sample.questions) {
    const auto ids = vocab.encode(q);
    if (ids.empty()) continue;
    if (!in.question_ids.empty()) in.question_ids.push_back(Vocabulary::kSep);
    in.question_ids.insert(in.question_ids.end(), ids.begin(), ids.end());
  }
  if (in.question_ids.size() > config.max_query_len) in.question_ids.resize(config.max_query_len);
  in.initial_ids = vocab.encode(initial_caption);
  if (in.initial_ids.size() > config.max_query_len) in.initial_ids.resize(config.max_query_len);
  return in;
}

ModelInput make_inference_input(const TrainingSample& sample, const Vocabulary& vocab,
                                const ModelConfig& config) {
  return make_model_input(sample, sample.auto_initial, vocab, config);
}

namespace {

struct PreparedSample {
  ModelInput input;
  TargetDistribution targets;
};

class AdamState {
 public:
  explicit AdamState(const std::vector<Parameter*>& params) {
    for (const Parameter* p : params) {
      m_.emplace_back(p->value.rows(), p->value.cols());
      v_.emplace_back(p->value.rows(), p->value.cols());
    }
  }

  void update(const std::vector<Parameter*>& params, const TrainConfig& c, double grad_scale) {
    ++t_;
    const double bc1 = 1.0 - std::pow(c.adam_beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(c.adam_beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto value = params[i]->value.data();
      auto grad = params[i]->grad.data();
      auto m = m_[i].data();
      auto v = v_[i].data();
      for (std::size_t k = 0; k < value.size(); ++k) {
        const double g = grad[k] * grad_scale;
        m[k] = c.adam_beta1 * m[k] + (1.0 - c.adam_beta1) * g;
        v[k] = c.adam_beta2 * v[k] + (1.0 - c.adam_beta2) * g * g;
        value[k] -= c.learning_rate * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + c.adam_epsilon);
      }
    }
  }

 private:
  std::vector<Tensor> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace

TrainResult train(GqamModel& model, const std::vector<TrainingSample>& samples,
                  const Vocabulary& vocab, const TrainConfig& config, const StepCallback& on_step) {
  if (samples.empty()) throw std::invalid_argument("training set is empty");
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (vocab.size() != model.config().vocab_size)
    throw std::invalid_argument("vocabulary size does not match the model");
  const ModelConfig& mc = model.config();
  Rng rng(config.seed);
  ParameterSet& ps = model.parameters();
  std::vector<Parameter*> params = ps.all();
  AdamState adam(params);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();

  TrainResult result;
  for (std::size_t step = 0; step < config.steps; ++step) {
    const std::size_t batch = std::min(config.batch_size, samples.size());
    std::vector<PreparedSample> prepared;
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
        cursor = 0;
      }
      const TrainingSample& s = samples[order[cursor++]];
      const std::string& initial = select_initial_caption(s, config.strategy, rng);
      PreparedSample p;
      p.input = make_model_input(s, initial, vocab, mc);
      auto tokens = text::tokenize(s.target);
      if (tokens.size() > mc.max_caption_len) tokens.resize(mc.max_caption_len);
      p.targets = build_targets(tokens, vocab, p.input.regions.ocr_tokens, rng);
      prepared.push_back(std::move(p));
    }

    ps.zero_grad();
    double total = 0.0;
    std::string failure;
    const int n = static_cast<int>(prepared.size());
#pragma omp parallel for ordered schedule(static, 1)
    for (int i = 0; i < n; ++i) {
      Tape tape;
      double value = 0.0;
      std::string error;
      try {
        const Encoded enc = model.encode(tape, prepared[i].input);
        const auto inputs = prepared[i].targets.teacher_inputs();
        Var loss = caption_loss(model.logits(tape, enc, inputs), prepared[i].targets,
                                config.literal_loss);
        value = loss.value()[0];
        tape.backward(loss);
      } catch (const std::exception& e) {
        error = e.what();
      }
#pragma omp ordered
      {
        if (!error.empty() && failure.empty()) failure = error;
        if (error.empty()) {
          tape.flush_parameter_grads();
          total += value;
        }
      }
    }
    if (!failure.empty()) throw std::runtime_error("training step " + std::to_string(step) + ": " + failure);

    const double mean_loss = total / static_cast<double>(prepared.size());
    if (!std::isfinite(mean_loss))
      throw std::runtime_error("loss became non-finite at step " + std::to_string(step));
    result.losses.push_back(mean_loss);
    if (on_step) on_step(step, mean_loss);

    double scale = 1.0 / static_cast<double>(prepared.size());
    const double norm = ps.grad_norm() * scale;
    if (!std::isfinite(norm))
      throw std::runtime_error("gradient became non-finite at step " + std::to_string(step));
    if (config.clip_norm > 0.0 && norm > config.clip_norm) scale *= config.clip_norm / norm;

    if (config.optimizer == Optimizer::kAdam) {
      adam.update(params, config, scale);
    } else {
      for (Parameter* p : params) {
        auto value = p->value.data();
        auto grad = p->grad.data();
        for (std::size_t k = 0; k < value.size(); ++k)
          value[k] -= config.learning_rate * scale * grad[k];
      }
    }
  }
  return result;
}

void write_loss_curve(const std::filesystem::path& path, const std::vector<double>& losses) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "step,loss\n";
  out.precision(17);
  for (std::size_t i = 0; i < losses.size(); ++i) out << i << ',' << losses[i] << '\n';
}

namespace {

constexpr char kCheckpointMagic[4] = {'Q', 'C', 'T', 'K'};

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("truncated checkpoint");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  std::string s(read_u32(in), '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(s.size())))
    throw std::runtime_error("truncated checkpoint");
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const GqamModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, 4);
  write_string(out, model.config().to_text());
  const auto params = model.parameters().all();
  write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    write_string(out, p->name);
    matrix_io::write(out, p->value);
  }
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

std::unique_ptr<GqamModel> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw std::runtime_error(path.string() + " is not a checkpoint");
  auto model = std::make_unique<GqamModel>(ModelConfig::from_text(read_string(in)), 0);
  ParameterSet& ps = model->parameters();
  const std::uint32_t count = read_u32(in);
  if (count != ps.size())
    throw std::runtime_error("checkpoint holds " + std::to_string(count) +
                             " parameters, model expects " + std::to_string(ps.size()));
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = read_string(in);
    if (!ps.contains(name)) throw std::runtime_error("checkpoint has unknown parameter " + name);
    Tensor value = matrix_io::read(in);
    Parameter& p = ps.at(name);
    if (!value.same_shape(p.value))
      throw std::runtime_error("checkpoint parameter " + name + " has the wrong shape");
    p.value = std::move(value);
  }
  return model;
}

}  // namespace qctc
