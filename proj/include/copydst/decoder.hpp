#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "copydst/embeddings.hpp"
#include "copydst/encoder.hpp"
#include "copydst/errors.hpp"
#include "copydst/tensor.hpp"
#include "copydst/tokenize.hpp"

namespace copydst {

struct Candidate {
    std::string value;                // surface form as listed in the ontology
    std::string normalized;           // canonical comparison form
    std::vector<std::string> tokens;  // shared-tokenizer tokens, for copy matching
    std::vector<double> embedding;    // frozen sum of token embeddings
};

// Per-slot scoring head. The candidate list is mutable at inference time:
// extending it appends a column to the embedded-candidate matrix and touches
// no learned parameter, so existing candidates keep bit-identical scores.
//
// Dimension note: the context vector lives in [2h] and candidate transforms
// must dot against it, so the transform output dimension is fixed at 2h.
class SlotDecoder {
  public:
    std::string slot;
    ad::Tensor w_s;  // [2h x d]   candidate embedding transform
    ad::Tensor w_h;  // [2h x 2h]  summary -> slot-specific representation
    ad::Tensor w_c;  // [1 x 4h]   attention scorer over [S ; h_i]

    static SlotDecoder init(const std::string& slot, std::size_t hidden,
                            const std::vector<std::string>& values,
                            const EmbeddingTable& embeddings, Rng& rng) {
        SlotDecoder d;
        d.slot = slot;
        d.emb_dim_ = embeddings.dim();
        double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
        auto uniform_fill = [&](std::size_t n) {
            std::vector<double> v(n);
            for (auto& x : v) x = rng.uniform(-bound, bound);
            return v;
        };
        std::size_t two_h = 2 * hidden;
        d.w_s = ad::Tensor::param({two_h, d.emb_dim_}, uniform_fill(two_h * d.emb_dim_));
        d.w_h = ad::Tensor::param({two_h, two_h}, uniform_fill(two_h * two_h));
        d.w_c = ad::Tensor::param({1, 2 * two_h}, uniform_fill(2 * two_h));
        for (const auto& v : values) d.append_candidate(v, embeddings);
        d.rebuild_candidate_matrix();
        return d;
    }

    const std::vector<Candidate>& candidates() const { return candidates_; }
    const ad::Tensor& candidate_matrix() const { return candidate_matrix_; }  // [d x |V|]

    std::optional<std::size_t> find_candidate(const std::string& value) const {
        std::string norm = normalize_value(value);
        for (std::size_t i = 0; i < candidates_.size(); ++i)
            if (candidates_[i].normalized == norm) return i;
        return std::nullopt;
    }

    // Append a new candidate value. Rejects duplicates (case-normalized),
    // reporting the existing index. No learned parameter changes.
    std::size_t extend(const std::string& value, const EmbeddingTable& embeddings) {
        if (auto existing = find_candidate(value))
            throw ContractError("extend_candidates: '" + value + "' already present in slot '" +
                                slot + "' at index " + std::to_string(*existing));
        append_candidate(value, embeddings);
        rebuild_candidate_matrix();
        return candidates_.size() - 1;
    }

  private:
    void append_candidate(const std::string& value, const EmbeddingTable& embeddings) {
        Candidate c;
        c.value = value;
        c.normalized = normalize_value(value);
        c.tokens = tokenize(value);
        c.embedding = embeddings.embed_value(value);
        candidates_.push_back(std::move(c));
    }

    // Embedded candidates as columns, [d x |V|]. Appending a candidate copies
    // the existing columns verbatim, preserving bit-exact scores.
    void rebuild_candidate_matrix() {
        std::size_t v = candidates_.size();
        if (v == 0) {
            candidate_matrix_ = ad::Tensor();  // score_slot rejects this state up front
            return;
        }
        std::vector<double> m(emb_dim_ * v);
        for (std::size_t j = 0; j < v; ++j)
            for (std::size_t i = 0; i < emb_dim_; ++i)
                m[i * v + j] = candidates_[j].embedding[i];
        candidate_matrix_ = ad::Tensor::constant({emb_dim_, v}, std::move(m));
    }

    std::size_t emb_dim_ = 0;
    std::vector<Candidate> candidates_;
    ad::Tensor candidate_matrix_;
};

// Raw attention scores a_i = tanh(W_c [S ; h_i]), one scalar per input token.
inline ad::Tensor attention_scores(const ad::Tensor& slot_summary,
                                   const std::vector<ad::Tensor>& token_states,
                                   const ad::Tensor& w_c) {
    if (token_states.empty()) throw ContractError("attention_scores: no token states");
    std::vector<ad::Tensor> scores;
    scores.reserve(token_states.size());
    for (const auto& h : token_states)
        scores.push_back(tanh(matmul(w_c, ad::concat({slot_summary, h}, 0))));
    return concat(scores, 0);
}

// Input positions whose token equals any token of the candidate. Each
// position is counted once, however many candidate tokens it matches.
inline std::vector<std::size_t> match_positions(const std::vector<std::string>& input_tokens,
                                                const std::vector<std::string>& candidate_tokens) {
    std::unordered_set<std::string> cand(candidate_tokens.begin(), candidate_tokens.end());
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < input_tokens.size(); ++t)
        if (cand.count(input_tokens[t])) out.push_back(t);
    return out;
}

// Copy score: the sum of raw attention scores at matched positions.
inline double copy_score(const std::vector<double>& attention,
                         const std::vector<std::string>& input_tokens,
                         const std::string& candidate_value) {
    double acc = 0.0;
    for (std::size_t t : match_positions(input_tokens, tokenize(candidate_value)))
        acc += attention[t];
    return acc;
}

// Value scores for every candidate: softmax the raw attention, form the
// context vector, and dot it against the transformed candidate columns.
inline ad::Tensor value_score(const ad::Tensor& attention,
                              const std::vector<ad::Tensor>& token_states,
                              const ad::Tensor& z_s) {
    std::size_t n = token_states.size();
    if (n == 0) throw ContractError("value_score: no token states");
    std::size_t two_h = token_states[0].shape()[0];
    if (z_s.shape().size() != 2 || z_s.shape()[0] != two_h)
        throw DimensionError("value_score: z_s " + ad::shape_str(z_s.shape()) +
                             " incompatible with token states of " +
                             ad::shape_str(token_states[0].shape()));
    ad::Tensor alpha = softmax(attention);
    ad::Tensor h_matrix = reshape(concat(token_states, 0), {n, two_h});
    ad::Tensor context = matmul(reshape(alpha, {1, n}), h_matrix);  // [1 x 2h]
    return reshape(matmul(context, z_s), {z_s.shape()[1]});
}

// Everything score_slot produces for one (turn, slot) pair. Probabilities
// are sigmoid(value + copy) per candidate; no cross-candidate normalization,
// which is what makes candidate-set extension safe.
struct SlotScores {
    ad::Tensor attention;     // raw a, [n]
    ad::Tensor alpha;         // softmax(a), [n]
    ad::Tensor copy_scores;   // psi_c per candidate, [|V|]
    ad::Tensor value_scores;  // psi_p per candidate, [|V|]
    ad::Tensor logits;        // psi_p + psi_c, [|V|]
    ad::Tensor probabilities; // sigmoid(logits), [|V|]
};

inline SlotScores score_slot(const EncodedTurn& encoded, const SlotDecoder& decoder) {
    if (decoder.candidates().empty())
        throw ContractError("score_slot: slot '" + decoder.slot + "' has no candidates");
    std::size_t n = encoded.token_states.size();
    std::size_t v = decoder.candidates().size();

    SlotScores s;
    ad::Tensor slot_summary = tanh(matmul(decoder.w_h, encoded.summary));
    s.attention = attention_scores(slot_summary, encoded.token_states, decoder.w_c);
    s.alpha = softmax(s.attention);

    // Copy path: one 0/1 mask column per candidate, dotted against raw a.
    std::vector<double> masks(n * v, 0.0);
    for (std::size_t j = 0; j < v; ++j)
        for (std::size_t t : match_positions(encoded.tokens, decoder.candidates()[j].tokens))
            masks[t * v + j] = 1.0;
    ad::Tensor mask_matrix = ad::Tensor::constant({n, v}, std::move(masks));
    s.copy_scores = reshape(matmul(reshape(s.attention, {1, n}), mask_matrix), {v});

    // Value path.
    ad::Tensor z_s = matmul(decoder.w_s, decoder.candidate_matrix());  // [2h x |V|]
    s.value_scores = value_score(s.attention, encoded.token_states, z_s);

    s.logits = add(s.value_scores, s.copy_scores);
    s.probabilities = sigmoid(s.logits);
    return s;
}

// Top-prediction rule: the argmax-probability candidate if it crosses the
// threshold, else no prediction. Ties resolve to the lowest candidate index.
inline std::optional<std::size_t> top_prediction(const std::vector<double>& probabilities,
                                                 double threshold) {
    if (probabilities.empty()) return std::nullopt;
    std::size_t best = 0;
    for (std::size_t j = 1; j < probabilities.size(); ++j)
        if (probabilities[j] > probabilities[best]) best = j;
    if (probabilities[best] >= threshold) return best;
    return std::nullopt;
}

// Turn-level decoding across slots.
inline Goal predict_turn(const std::vector<std::pair<const SlotDecoder*, SlotScores>>& scored,
                         double threshold) {
    Goal out;
    for (const auto& [decoder, scores] : scored) {
        auto best = top_prediction(scores.probabilities.values(), threshold);
        if (best) out[decoder->slot] = decoder->candidates()[*best].value;
    }
    return out;
}

}  // namespace copydst
