#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "copydst/checkpoint.hpp"
#include "copydst/config.hpp"
#include "copydst/data.hpp"
#include "copydst/decoder.hpp"
#include "copydst/embeddings.hpp"
#include "copydst/errors.hpp"
#include "copydst/metrics.hpp"
#include "copydst/model.hpp"
#include "copydst/random.hpp"
#include "copydst/tensor.hpp"

namespace copydst {

// ---- optimizer ---------------------------------------------------------------

class Adam {
  public:
    Adam(std::vector<std::pair<std::string, ad::Tensor>> params, double lr, double beta1,
         double beta2, double eps)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (const auto& [name, p] : params_) {
            m_.emplace_back(p.size(), 0.0);
            v_.emplace_back(p.size(), 0.0);
        }
    }

    void zero_grad() {
        for (auto& [name, p] : params_) p.zero_grad();
    }

    void step() {
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& p = params_[i].second;
            auto& values = p.values_mut();
            auto& m = m_[i];
            auto& v = v_[i];
            for (std::size_t j = 0; j < values.size(); ++j) {
                double g = p.has_grad() ? p.grad()[j] : 0.0;
                m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
                v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
                values[j] -= lr_ * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps_);
            }
        }
    }

  private:
    std::vector<std::pair<std::string, ad::Tensor>> params_;
    std::vector<std::vector<double>> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
};

// ---- per-turn loss -------------------------------------------------------------

struct LossStats {
    std::size_t skipped_gold_labels = 0;  // gold values absent from the candidate cache
};

// Sum over slots of a per-candidate binary cross-entropy: the gold value (if
// the turn has one) is the positive target; negatives are every non-gold
// candidate with a token literally present in the input (so the copy path
// learns discrimination) plus k uniformly sampled others. Mean over targets
// within a slot. Returns nothing when no slot contributes a term.
inline std::optional<ad::Tensor> turn_loss(
    const std::vector<std::pair<const SlotDecoder*, SlotScores>>& scored, const Goal& turn_label,
    const std::vector<std::string>& input_tokens, std::size_t k_negatives, Rng& rng,
    LossStats& stats) {
    std::unordered_set<std::string> input_set(input_tokens.begin(), input_tokens.end());
    std::optional<ad::Tensor> total;
    for (const auto& [decoder, scores] : scored) {
        const auto& candidates = decoder->candidates();
        std::optional<std::size_t> gold;
        auto labeled = turn_label.find(decoder->slot);
        if (labeled != turn_label.end()) {
            gold = decoder->find_candidate(labeled->second);
            if (!gold) {
                ++stats.skipped_gold_labels;
                continue;
            }
        }

        std::vector<std::size_t> indices;
        std::vector<double> targets;
        if (gold) {
            indices.push_back(*gold);
            targets.push_back(1.0);
        }
        std::vector<std::size_t> pool;
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            if (gold && j == *gold) continue;
            bool overlaps = std::any_of(candidates[j].tokens.begin(), candidates[j].tokens.end(),
                                        [&](const std::string& t) { return input_set.count(t); });
            if (overlaps) {
                indices.push_back(j);
                targets.push_back(0.0);
            } else {
                pool.push_back(j);
            }
        }
        std::size_t k = std::min(k_negatives, pool.size());
        if (k > 0)
            for (std::size_t pick : rng.sample_without_replacement(pool.size(), k)) {
                indices.push_back(pool[pick]);
                targets.push_back(0.0);
            }
        if (indices.empty()) continue;

        ad::Tensor slot_loss = ad::bce_with_logits(ad::gather(scores.logits, indices), targets);
        total = total ? ad::add(*total, slot_loss) : slot_loss;
    }
    return total;
}

// ---- evaluation ----------------------------------------------------------------

// Scheme A / Schedule 1: predictions accumulate across each dialogue and the
// full goal is scored at every turn. Pure function of (model, corpus).
inline EvalReport evaluate(const TrackerModel& model, const DialogueCorpus& corpus,
                           double threshold,
                           const std::map<std::string, std::set<std::string>>* unseen_values =
                               nullptr) {
    for (const auto& slot : corpus.ontology.slots())
        if (!model.find_decoder(slot))
            throw ContractError("evaluate: corpus slot '" + slot + "' is unknown to the model");

    ad::NoGradGuard guard;
    std::vector<TurnOutcome> outcomes;
    std::vector<const SlotDecoder*> decoders;
    for (const auto& slot : corpus.ontology.slots()) decoders.push_back(model.find_decoder(slot));
    for (const auto& dialogue : corpus.dialogues) {
        Goal predicted;
        for (const auto& turn : dialogue.turns) {
            EncodedTurn encoded = model.encode_turn(turn.system_acts, turn.utterance);
            std::vector<std::pair<const SlotDecoder*, SlotScores>> scored;
            scored.reserve(decoders.size());
            for (const SlotDecoder* d : decoders) scored.emplace_back(d, score_slot(encoded, *d));
            predicted = accumulate_goal(predicted, predict_turn(scored, threshold));
            outcomes.push_back({turn.goal, predicted});
        }
    }
    return compute_metrics(outcomes, corpus.ontology.slots(), unseen_values);
}

inline EvalReport evaluate(const Checkpoint& checkpoint, const DialogueCorpus& corpus,
                           const std::map<std::string, std::set<std::string>>* unseen_values =
                               nullptr) {
    TrackerModel model = checkpoint.restore();
    return evaluate(model, corpus, checkpoint.config.threshold, unseen_values);
}

// ---- training loop --------------------------------------------------------------

struct EpochStats {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double dev_joint = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
    Checkpoint checkpoint;  // best dev-joint epoch (last epoch when no dev split)
    std::vector<EpochStats> history;
    std::size_t best_epoch = 0;
    double best_dev_joint = std::numeric_limits<double>::quiet_NaN();
    std::size_t skipped_gold_labels = 0;
    double first_turn_loss = std::numeric_limits<double>::quiet_NaN();
    double last_turn_loss = std::numeric_limits<double>::quiet_NaN();
};

// Fully seeded: vocabulary and initialization, the dev split, per-epoch turn
// order, dropout masks, and negative sampling all flow from config.seed.
// Embeddings are frozen; only encoder and decoder parameters train.
inline TrainResult train(const DialogueCorpus& corpus, const Ontology& ontology,
                         const TrainConfig& config) {
    config.validate();
    if (corpus.dialogues.empty()) throw ContractError("train: corpus has no dialogues");

    Rng rng(config.seed);

    WordVectorFile words, ngrams;
    const WordVectorFile* words_ptr = nullptr;
    const WordVectorFile* ngrams_ptr = nullptr;
    if (!config.word_vectors.empty()) {
        words = load_word_vectors(config.word_vectors, config.word_dim);
        words_ptr = &words;
    }
    if (!config.ngram_vectors.empty()) {
        ngrams = load_word_vectors(config.ngram_vectors, config.ngram_dim);
        ngrams_ptr = &ngrams;
    }

    Vocabulary vocab = build_vocabulary(corpus, ontology);
    EmbeddingConfig emb_config;
    emb_config.word_dim = config.word_dim;
    emb_config.ngram_dim = config.ngram_dim;
    EmbeddingTable table = EmbeddingTable::build(vocab, emb_config, words_ptr, ngrams_ptr);
    TrackerModel model = TrackerModel::init(ontology, std::move(table), config.hidden, rng);

    // dev split at dialogue granularity
    std::vector<std::size_t> order(corpus.dialogues.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    std::size_t n_dev = static_cast<std::size_t>(
        std::floor(config.dev_fraction * static_cast<double>(order.size()) + 0.5));
    if (n_dev + 1 > order.size()) n_dev = order.size() - 1;
    DialogueCorpus dev;
    dev.ontology = corpus.ontology;
    for (std::size_t i = 0; i < n_dev; ++i) dev.dialogues.push_back(corpus.dialogues[order[i]]);
    std::vector<std::size_t> train_dialogues(order.begin() + static_cast<std::ptrdiff_t>(n_dev),
                                             order.end());

    Adam optimizer(model.named_parameters(), config.learning_rate, config.beta1, config.beta2,
                   config.adam_eps);

    TrainResult result;
    LossStats stats;
    std::optional<Checkpoint> best;
    double best_dev = -1.0;
    std::size_t patience_left = config.patience;
    double last_finite_loss = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<std::pair<std::size_t, std::size_t>> turns;
        for (std::size_t di : train_dialogues)
            for (std::size_t ti = 0; ti < corpus.dialogues[di].turns.size(); ++ti)
                turns.emplace_back(di, ti);
        rng.shuffle(turns);

        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        std::size_t in_batch = 0;
        optimizer.zero_grad();
        for (std::size_t step = 0; step < turns.size(); ++step) {
            const Turn& turn = corpus.dialogues[turns[step].first].turns[turns[step].second];
            EncodedTurn encoded = model.encode_turn(turn.system_acts, turn.utterance, true,
                                                    config.dropout, &rng);
            auto scored = model.score_turn(encoded);
            auto loss = turn_loss(scored, turn.turn_label, encoded.tokens, config.negatives, rng,
                                  stats);
            if (!loss) continue;
            double value = loss->item();
            if (!std::isfinite(value))
                throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) +
                                       ", step " + std::to_string(step) + "; last finite loss " +
                                       std::to_string(last_finite_loss));
            last_finite_loss = value;
            if (std::isnan(result.first_turn_loss)) result.first_turn_loss = value;
            result.last_turn_loss = value;
            loss_sum += value;
            ++loss_count;
            ad::backward(*loss);
            if (++in_batch == config.batch_turns) {
                optimizer.step();
                optimizer.zero_grad();
                in_batch = 0;
            }
        }
        if (in_batch > 0) {
            optimizer.step();
            optimizer.zero_grad();
        }

        EpochStats es;
        es.epoch = epoch;
        es.mean_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        if (!dev.dialogues.empty()) {
            es.dev_joint = evaluate(model, dev, config.threshold).joint.accuracy();
            if (es.dev_joint > best_dev) {
                best_dev = es.dev_joint;
                best = Checkpoint::snapshot(model, config);
                result.best_epoch = epoch;
                patience_left = config.patience;
            } else if (patience_left > 0 && --patience_left == 0) {
                result.history.push_back(es);
                break;
            }
        }
        result.history.push_back(es);
    }

    if (!best) {  // no dev split: keep the final parameters
        best = Checkpoint::snapshot(model, config);
        result.best_epoch = result.history.empty() ? 0 : result.history.back().epoch;
    }
    result.checkpoint = std::move(*best);
    result.best_dev_joint = best_dev >= 0.0 ? best_dev : std::numeric_limits<double>::quiet_NaN();
    result.skipped_gold_labels = stats.skipped_gold_labels;
    return result;
}

}  // namespace copydst
