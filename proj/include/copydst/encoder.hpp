#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "copydst/errors.hpp"
#include "copydst/random.hpp"
#include "copydst/tensor.hpp"
#include "copydst/tokenize.hpp"

namespace copydst {

// One previous-system-action entry; slot and value may be empty.
struct SystemAct {
    std::string act;
    std::string slot;
    std::string value;
};

// Slot -> value assignment; a slot absent from the map means None.
using Goal = std::map<std::string, std::string>;

struct LinearizedTurn {
    std::vector<std::string> tokens;
    bool degenerate = false;  // both action list and utterance were empty
};

// Flatten (previous system actions ; user utterance) into one token
// sequence: per action `act slot value`, actions in dataset order, then the
// utterance. All parts go through the shared tokenizer.
inline LinearizedTurn linearize_turn(const std::vector<SystemAct>& acts,
                                     const std::vector<std::string>& utterance) {
    LinearizedTurn out;
    for (const auto& a : acts) {
        for (const auto& t : tokenize(a.act)) out.tokens.push_back(t);
        for (const auto& t : tokenize(a.slot)) out.tokens.push_back(t);
        for (const auto& t : tokenize(a.value)) out.tokens.push_back(t);
    }
    for (const auto& t : utterance) out.tokens.push_back(t);
    if (out.tokens.empty()) {
        out.tokens.push_back(kPadToken);
        out.degenerate = true;
    }
    return out;
}

// Single-direction LSTM parameters, gates packed in i,f,g,o order.
struct LstmCell {
    ad::Tensor w_x;   // [4h x d_in]
    ad::Tensor w_h;   // [4h x h]
    ad::Tensor bias;  // [4h]
    std::size_t hidden = 0;

    static LstmCell init(std::size_t hidden, std::size_t input_dim, Rng& rng) {
        LstmCell c;
        c.hidden = hidden;
        double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
        auto uniform_fill = [&](std::size_t n) {
            std::vector<double> v(n);
            for (auto& x : v) x = rng.uniform(-bound, bound);
            return v;
        };
        c.w_x = ad::Tensor::param({4 * hidden, input_dim}, uniform_fill(4 * hidden * input_dim));
        c.w_h = ad::Tensor::param({4 * hidden, hidden}, uniform_fill(4 * hidden * hidden));
        std::vector<double> b(4 * hidden, 0.0);
        // forget gate bias starts at 1.0
        for (std::size_t i = hidden; i < 2 * hidden; ++i) b[i] = 1.0;
        c.bias = ad::Tensor::param({4 * hidden}, std::move(b));
        return c;
    }
};

// Standard LSTM recurrence: sigmoid gates, tanh candidate, tanh on the cell
// for the output. Returns (h, c).
inline std::pair<ad::Tensor, ad::Tensor> lstm_step(const LstmCell& cell, const ad::Tensor& prev_h,
                                                   const ad::Tensor& prev_c, const ad::Tensor& x) {
    std::size_t h = cell.hidden;
    ad::Tensor gates = add(add(matmul(cell.w_x, x), matmul(cell.w_h, prev_h)), cell.bias);
    ad::Tensor gi = sigmoid(slice(gates, 0, h));
    ad::Tensor gf = sigmoid(slice(gates, h, h));
    ad::Tensor gg = tanh(slice(gates, 2 * h, h));
    ad::Tensor go = sigmoid(slice(gates, 3 * h, h));
    ad::Tensor c = add(mul(gf, prev_c), mul(gi, gg));
    ad::Tensor hh = mul(go, tanh(c));
    return {hh, c};
}

// Per-token states h_t = [fwd_t ; bwd_t] and the summary [fwd_n ; bwd_1].
struct EncodedTurn {
    std::vector<ad::Tensor> token_states;  // n vectors of [2h]
    ad::Tensor summary;                    // [2h]
    std::vector<std::string> tokens;       // retained for copy matching
};

struct Encoder {
    LstmCell fwd;
    LstmCell bwd;

    static Encoder init(std::size_t hidden, std::size_t input_dim, Rng& rng) {
        Encoder e;
        e.fwd = LstmCell::init(hidden, input_dim, rng);
        e.bwd = LstmCell::init(hidden, input_dim, rng);
        return e;
    }

    std::size_t hidden() const { return fwd.hidden; }

    // Both directions start from zero states each turn; dialogue history is
    // carried by goal accumulation, not recurrent state.
    EncodedTurn encode(const std::vector<ad::Tensor>& inputs,
                       std::vector<std::string> tokens) const {
        if (inputs.empty()) throw ContractError("encode: empty input sequence");
        std::size_t n = inputs.size();
        std::size_t h = fwd.hidden;
        std::vector<ad::Tensor> fwd_states(n), bwd_states(n);
        ad::Tensor hs = ad::Tensor::zeros({h});
        ad::Tensor cs = ad::Tensor::zeros({h});
        for (std::size_t t = 0; t < n; ++t) {
            auto [nh, nc] = lstm_step(fwd, hs, cs, inputs[t]);
            fwd_states[t] = nh;
            hs = nh;
            cs = nc;
        }
        hs = ad::Tensor::zeros({h});
        cs = ad::Tensor::zeros({h});
        for (std::size_t t = n; t-- > 0;) {
            auto [nh, nc] = lstm_step(bwd, hs, cs, inputs[t]);
            bwd_states[t] = nh;
            hs = nh;
            cs = nc;
        }
        EncodedTurn out;
        out.token_states.reserve(n);
        for (std::size_t t = 0; t < n; ++t)
            out.token_states.push_back(ad::concat({fwd_states[t], bwd_states[t]}, 0));
        out.summary = ad::concat({fwd_states[n - 1], bwd_states[0]}, 0);
        out.tokens = std::move(tokens);
        return out;
    }
};

// Inverted dropout: scale kept entries by 1/keep at train time so eval needs
// no rescaling. Returns the input unchanged when rate == 0.
inline ad::Tensor dropout(const ad::Tensor& x, double rate, Rng& rng) {
    if (rate <= 0.0) return x;
    double keep = 1.0 - rate;
    std::vector<double> mask(x.size());
    for (auto& m : mask) m = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    return mul(x, ad::Tensor::constant(x.shape(), std::move(mask)));
}

}  // namespace copydst
