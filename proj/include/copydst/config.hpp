#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "copydst/errors.hpp"

namespace copydst {

struct TrainConfig {
    std::size_t hidden = 200;     // LSTM units per direction
    std::size_t word_dim = 300;   // word-vector part of the token embedding
    std::size_t ngram_dim = 100;  // character-n-gram part
    double dropout = 0.2;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t batch_turns = 16;  // gradient-accumulation window
    std::size_t epochs = 30;
    std::size_t patience = 5;      // early-stop patience on dev joint goal
    std::size_t negatives = 5;     // sampled negative candidates per slot per turn
    double dev_fraction = 0.1;     // dialogues carved off for early stopping
    double threshold = 0.5;        // decision threshold on the per-value sigmoid
    std::uint64_t seed = 1;
    std::string word_vectors;   // optional pretrained word-vector file
    std::string ngram_vectors;  // optional pretrained n-gram-vector file

    void validate() const {
        if (hidden == 0) throw ContractError("config: hidden must be positive");
        if (word_dim + ngram_dim == 0) throw ContractError("config: embedding dim must be positive");
        if (!(dropout >= 0.0 && dropout < 1.0))
            throw ContractError("config: dropout must be in [0,1)");
        if (learning_rate < 0.0) throw ContractError("config: learning rate must be >= 0");
        if (batch_turns == 0) throw ContractError("config: batch_turns must be positive");
        if (epochs == 0) throw ContractError("config: epochs must be positive");
        if (!(dev_fraction >= 0.0 && dev_fraction < 1.0))
            throw ContractError("config: dev_fraction must be in [0,1)");
        if (!(threshold > 0.0 && threshold < 1.0))
            throw ContractError("config: threshold must be in (0,1)");
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["hidden"] = hidden;
        j["word_dim"] = word_dim;
        j["ngram_dim"] = ngram_dim;
        j["dropout"] = dropout;
        j["learning_rate"] = learning_rate;
        j["beta1"] = beta1;
        j["beta2"] = beta2;
        j["adam_eps"] = adam_eps;
        j["batch_turns"] = batch_turns;
        j["epochs"] = epochs;
        j["patience"] = patience;
        j["negatives"] = negatives;
        j["dev_fraction"] = dev_fraction;
        j["threshold"] = threshold;
        j["seed"] = seed;
        j["word_vectors"] = word_vectors;
        j["ngram_vectors"] = ngram_vectors;
        return j;
    }

    static TrainConfig from_json(const nlohmann::ordered_json& j) {
        TrainConfig c;
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
        };
        get("hidden", c.hidden);
        get("word_dim", c.word_dim);
        get("ngram_dim", c.ngram_dim);
        get("dropout", c.dropout);
        get("learning_rate", c.learning_rate);
        get("beta1", c.beta1);
        get("beta2", c.beta2);
        get("adam_eps", c.adam_eps);
        get("batch_turns", c.batch_turns);
        get("epochs", c.epochs);
        get("patience", c.patience);
        get("negatives", c.negatives);
        get("dev_fraction", c.dev_fraction);
        get("threshold", c.threshold);
        get("seed", c.seed);
        get("word_vectors", c.word_vectors);
        get("ngram_vectors", c.ngram_vectors);
        return c;
    }
};

}  // namespace copydst
