#pragma once

// Independent reference implementations used to check the library:
//  - a central finite-difference gradient checker,
//  - a straight-line (no graph, plain loops) reimplementation of the slot
//    scoring pipeline,
//  - a straight-line single LSTM step.
// These deliberately avoid every library abstraction they are checking.

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <copydst/tensor.hpp>

namespace oracle {

// ---- finite differences -----------------------------------------------------

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t worst_index = 0;
    std::string worst_param;
};

// Central differences against the autodiff gradient. `make_loss` must rebuild
// the whole graph from the parameters' current values each call.
inline GradCheckResult check_gradients(
    std::vector<std::pair<std::string, copydst::ad::Tensor>> params,
    const std::function<copydst::ad::Tensor()>& make_loss, double step = 1e-5,
    double floor = 1e-7) {
    GradCheckResult result;
    for (auto& [name, p] : params) p.zero_grad();
    copydst::ad::Tensor loss = make_loss();
    copydst::ad::backward(loss);
    std::vector<std::vector<double>> analytic;
    for (auto& [name, p] : params)
        analytic.push_back(p.has_grad() ? p.grad() : std::vector<double>(p.size(), 0.0));

    auto loss_value = [&]() {
        copydst::ad::NoGradGuard guard;
        return make_loss().item();
    };
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& values = params[pi].second.values_mut();
        for (std::size_t j = 0; j < values.size(); ++j) {
            double keep = values[j];
            values[j] = keep + step;
            double up = loss_value();
            values[j] = keep - step;
            double down = loss_value();
            values[j] = keep;
            double numeric = (up - down) / (2.0 * step);
            double denom = std::max({std::abs(numeric), std::abs(analytic[pi][j]), floor});
            double rel = std::abs(numeric - analytic[pi][j]) / denom;
            if (rel > result.max_rel_err) {
                result.max_rel_err = rel;
                result.worst_index = j;
                result.worst_param = params[pi].first;
            }
        }
    }
    return result;
}

// ---- straight-line slot scorer -----------------------------------------------

// Everything below is plain doubles and index loops.
struct SlotScoringInstance {
    std::size_t n = 0;      // tokens
    std::size_t two_h = 0;  // token-state width
    std::size_t d = 0;      // candidate embedding dim
    std::size_t v = 0;      // candidates
    std::vector<std::vector<double>> token_states;  // n rows of [two_h]
    std::vector<double> summary;                    // [two_h]
    std::vector<double> w_h;                        // [two_h x two_h], row-major
    std::vector<double> w_c;                        // [2*two_h]
    std::vector<double> w_s;                        // [two_h x d], row-major
    std::vector<std::vector<double>> candidates;    // v rows of [d]
    std::vector<std::vector<int>> membership;       // n rows of [v], 0/1
};

struct SlotScoringOutput {
    std::vector<double> attention;
    std::vector<double> alpha;
    std::vector<double> copy_scores;
    std::vector<double> value_scores;
    std::vector<double> logits;
    std::vector<double> probabilities;
};

inline SlotScoringOutput score_slot_reference(const SlotScoringInstance& in) {
    SlotScoringOutput out;
    // slot summary S = tanh(W_h * h_L)
    std::vector<double> s(in.two_h, 0.0);
    for (std::size_t r = 0; r < in.two_h; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < in.two_h; ++c) acc += in.w_h[r * in.two_h + c] * in.summary[c];
        s[r] = std::tanh(acc);
    }
    // attention a_i = tanh(w_c . [S ; h_i])
    out.attention.resize(in.n);
    for (std::size_t i = 0; i < in.n; ++i) {
        double acc = 0.0;
        for (std::size_t r = 0; r < in.two_h; ++r) acc += in.w_c[r] * s[r];
        for (std::size_t r = 0; r < in.two_h; ++r)
            acc += in.w_c[in.two_h + r] * in.token_states[i][r];
        out.attention[i] = std::tanh(acc);
    }
    // alpha = softmax(a); tanh output is bounded so no stabilization needed
    double z = 0.0;
    out.alpha.resize(in.n);
    for (std::size_t i = 0; i < in.n; ++i) z += std::exp(out.attention[i]);
    for (std::size_t i = 0; i < in.n; ++i) out.alpha[i] = std::exp(out.attention[i]) / z;
    // context C = sum_i alpha_i h_i
    std::vector<double> context(in.two_h, 0.0);
    for (std::size_t i = 0; i < in.n; ++i)
        for (std::size_t r = 0; r < in.two_h; ++r)
            context[r] += out.alpha[i] * in.token_states[i][r];
    // per candidate: z_v = W_s * e_v, psi_p = C . z_v, psi_c = sum of raw a over members
    out.copy_scores.assign(in.v, 0.0);
    out.value_scores.assign(in.v, 0.0);
    out.logits.resize(in.v);
    out.probabilities.resize(in.v);
    for (std::size_t cidx = 0; cidx < in.v; ++cidx) {
        std::vector<double> zv(in.two_h, 0.0);
        for (std::size_t r = 0; r < in.two_h; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < in.d; ++c) acc += in.w_s[r * in.d + c] * in.candidates[cidx][c];
            zv[r] = acc;
        }
        double psi_p = 0.0;
        for (std::size_t r = 0; r < in.two_h; ++r) psi_p += context[r] * zv[r];
        double psi_c = 0.0;
        for (std::size_t i = 0; i < in.n; ++i)
            if (in.membership[i][cidx]) psi_c += out.attention[i];
        out.value_scores[cidx] = psi_p;
        out.copy_scores[cidx] = psi_c;
        out.logits[cidx] = psi_p + psi_c;
        out.probabilities[cidx] = 1.0 / (1.0 + std::exp(-out.logits[cidx]));
    }
    return out;
}

// ---- straight-line LSTM step ---------------------------------------------------

struct LstmStepInstance {
    std::size_t h = 0;
    std::size_t d = 0;
    std::vector<double> w_x;   // [4h x d], gate order i, f, g, o
    std::vector<double> w_h;   // [4h x h]
    std::vector<double> bias;  // [4h]
    std::vector<double> prev_h, prev_c, x;
};

inline std::pair<std::vector<double>, std::vector<double>> lstm_step_reference(
    const LstmStepInstance& in) {
    auto sigma = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
    std::vector<double> pre(4 * in.h, 0.0);
    for (std::size_t r = 0; r < 4 * in.h; ++r) {
        double acc = in.bias[r];
        for (std::size_t c = 0; c < in.d; ++c) acc += in.w_x[r * in.d + c] * in.x[c];
        for (std::size_t c = 0; c < in.h; ++c) acc += in.w_h[r * in.h + c] * in.prev_h[c];
        pre[r] = acc;
    }
    std::vector<double> h_out(in.h), c_out(in.h);
    for (std::size_t j = 0; j < in.h; ++j) {
        double i_g = sigma(pre[j]);
        double f_g = sigma(pre[in.h + j]);
        double g_g = std::tanh(pre[2 * in.h + j]);
        double o_g = sigma(pre[3 * in.h + j]);
        c_out[j] = f_g * in.prev_c[j] + i_g * g_g;
        h_out[j] = o_g * std::tanh(c_out[j]);
    }
    return {h_out, c_out};
}

}  // namespace oracle
