#pragma once

#include <string>
#include <utility>
#include <vector>

#include "copydst/config.hpp"
#include "copydst/data.hpp"
#include "copydst/decoder.hpp"
#include "copydst/embeddings.hpp"
#include "copydst/encoder.hpp"
#include "copydst/errors.hpp"
#include "copydst/tensor.hpp"

namespace copydst {

// The full tracker: frozen token embeddings, shared bidirectional encoder,
// and one scoring head per informable slot (ontology order).
struct TrackerModel {
    EmbeddingTable embeddings;  // frozen: not part of named_parameters()
    Encoder encoder;
    std::vector<SlotDecoder> decoders;
    std::vector<std::string> slot_order;

    static TrackerModel init(const Ontology& ontology, EmbeddingTable embeddings,
                             std::size_t hidden, Rng& rng) {
        TrackerModel model;
        model.embeddings = std::move(embeddings);
        model.encoder = Encoder::init(hidden, model.embeddings.dim(), rng);
        for (const auto& slot : ontology.slots()) {
            model.decoders.push_back(
                SlotDecoder::init(slot, hidden, ontology.values(slot), model.embeddings, rng));
            model.slot_order.push_back(slot);
        }
        return model;
    }

    std::size_t hidden() const { return encoder.hidden(); }

    const SlotDecoder* find_decoder(const std::string& slot) const {
        for (const auto& d : decoders)
            if (d.slot == slot) return &d;
        return nullptr;
    }
    SlotDecoder* find_decoder(const std::string& slot) {
        return const_cast<SlotDecoder*>(static_cast<const TrackerModel*>(this)->find_decoder(slot));
    }

    // Trainable parameters in a fixed, name-addressable order. The order is
    // part of the checkpoint contract.
    std::vector<std::pair<std::string, ad::Tensor>> named_parameters() const {
        std::vector<std::pair<std::string, ad::Tensor>> out;
        auto add_cell = [&](const std::string& prefix, const LstmCell& cell) {
            out.emplace_back(prefix + ".w_x", cell.w_x);
            out.emplace_back(prefix + ".w_h", cell.w_h);
            out.emplace_back(prefix + ".bias", cell.bias);
        };
        add_cell("encoder.fwd", encoder.fwd);
        add_cell("encoder.bwd", encoder.bwd);
        for (const auto& d : decoders) {
            out.emplace_back("slot." + d.slot + ".w_s", d.w_s);
            out.emplace_back("slot." + d.slot + ".w_h", d.w_h);
            out.emplace_back("slot." + d.slot + ".w_c", d.w_c);
        }
        return out;
    }

    // Linearize, embed (frozen vectors enter the graph as constants), encode.
    // In train mode dropout is applied between layers: on the embedded inputs
    // and on the encoder outputs. `rng` is only consulted in train mode.
    EncodedTurn encode_turn(const std::vector<SystemAct>& acts,
                            const std::vector<std::string>& utterance_tokens,
                            bool train_mode = false, double dropout_rate = 0.0,
                            Rng* rng = nullptr) const {
        LinearizedTurn lin = linearize_turn(acts, utterance_tokens);
        std::vector<ad::Tensor> inputs;
        inputs.reserve(lin.tokens.size());
        for (const auto& tok : lin.tokens) {
            ad::Tensor x = ad::Tensor::constant({embeddings.dim()}, embeddings.embed_token(tok));
            if (train_mode && dropout_rate > 0.0) x = dropout(x, dropout_rate, *rng);
            inputs.push_back(std::move(x));
        }
        EncodedTurn encoded = encoder.encode(inputs, lin.tokens);
        if (train_mode && dropout_rate > 0.0) {
            for (auto& h : encoded.token_states) h = dropout(h, dropout_rate, *rng);
            encoded.summary = dropout(encoded.summary, dropout_rate, *rng);
        }
        return encoded;
    }

    // Score every slot for one encoded turn; pairs line up with `decoders`.
    std::vector<std::pair<const SlotDecoder*, SlotScores>> score_turn(
        const EncodedTurn& encoded) const {
        std::vector<std::pair<const SlotDecoder*, SlotScores>> out;
        out.reserve(decoders.size());
        for (const auto& d : decoders) out.emplace_back(&d, score_slot(encoded, d));
        return out;
    }
};

// Vocabulary over everything the encoder can see: linearized turn tokens plus
// ontology value tokens (so candidate embeddings of in-corpus words share the
// same rows). Deterministic: corpus order, then ontology order.
inline Vocabulary build_vocabulary(const DialogueCorpus& corpus, const Ontology& ontology) {
    Vocabulary vocab;
    for (const auto& d : corpus.dialogues)
        for (const auto& t : d.turns) {
            LinearizedTurn lin = linearize_turn(t.system_acts, t.utterance);
            for (const auto& tok : lin.tokens) vocab.add(tok);
        }
    for (const auto& slot : ontology.slots()) {
        for (const auto& tok : tokenize(slot)) vocab.add(tok);
        for (const auto& value : ontology.values(slot))
            for (const auto& tok : tokenize(value)) vocab.add(tok);
    }
    return vocab;
}

}  // namespace copydst
