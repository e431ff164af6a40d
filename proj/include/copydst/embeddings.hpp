#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "copydst/errors.hpp"
#include "copydst/random.hpp"
#include "copydst/tokenize.hpp"

namespace copydst {

// Dense token index space. Index 0 is reserved for the padding token.
class Vocabulary {
  public:
    Vocabulary() { add(kPadToken); }

    std::size_t add(const std::string& token) {
        auto it = index_.find(token);
        if (it != index_.end()) return it->second;
        std::size_t id = tokens_.size();
        index_.emplace(token, id);
        tokens_.push_back(token);
        return id;
    }

    std::optional<std::size_t> lookup(const std::string& token) const {
        auto it = index_.find(token);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return tokens_.size(); }
    const std::string& token(std::size_t i) const { return tokens_.at(i); }
    const std::vector<std::string>& tokens() const { return tokens_; }

  private:
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> tokens_;
};

struct EmbeddingConfig {
    std::size_t word_dim = 300;
    std::size_t ngram_dim = 100;
    // Fixed seeds keep the hashed fallback deterministic across runs and
    // decorrelate the word-part fallback from the n-gram part.
    std::uint64_t word_hash_seed = 0x77a3c5d1u;
    std::uint64_t ngram_hash_seed = 0x1b56e9f3u;
};

// Character 3-/4-grams of "^token$", each hashed to a bucket; the vector is
// the average of the bucket unit vectors, scaled by 0.1. Total over any
// nonempty token, so out-of-vocabulary tokens always get an informative,
// deterministic vector.
inline std::vector<double> hashed_char_ngram_vector(const std::string& token, std::size_t dim,
                                                    std::uint64_t seed) {
    std::vector<double> v(dim, 0.0);
    std::string padded = "^" + token + "$";
    std::size_t grams = 0;
    for (std::size_t n : {std::size_t{3}, std::size_t{4}}) {
        if (padded.size() < n) continue;
        for (std::size_t i = 0; i + n <= padded.size(); ++i) {
            std::uint64_t h = fnv1a64(padded.substr(i, n), seed);
            v[h % dim] += 1.0;
            ++grams;
        }
    }
    if (grams > 0)
        for (auto& x : v) x = 0.1 * x / static_cast<double>(grams);
    return v;
}

// Result of reading a word-vector text file: token -> vector plus counters.
struct WordVectorFile {
    std::unordered_map<std::string, std::vector<double>> vectors;
    std::size_t loaded = 0;
    std::size_t malformed_skipped = 0;
    std::size_t duplicates = 0;
};

// Format: one entry per line, `token float float ...`, UTF-8. A line whose
// float count disagrees with expected_dim is a hard error (the file is for
// the wrong dimension); lines with unparseable numbers are skipped and
// counted. Duplicate tokens: last occurrence wins.
inline WordVectorFile load_word_vectors(const std::string& path, std::size_t expected_dim) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open word-vector file: " + path);
    WordVectorFile out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields;
        std::string cur;
        for (char c : line) {
            if (c == ' ' || c == '\t') {
                if (!cur.empty()) fields.push_back(cur), cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) fields.push_back(cur);
        if (fields.empty()) {
            ++out.malformed_skipped;
            continue;
        }
        if (fields.size() != expected_dim + 1)
            throw ParseError(path + ": line " + std::to_string(line_no) + ": expected " +
                             std::to_string(expected_dim) + " floats after token, got " +
                             std::to_string(fields.size() - 1));
        std::vector<double> vec(expected_dim);
        bool ok = true;
        for (std::size_t i = 0; i < expected_dim; ++i) {
            const std::string& f = fields[i + 1];
            char* end = nullptr;
            vec[i] = std::strtod(f.c_str(), &end);
            if (end != f.c_str() + f.size()) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            ++out.malformed_skipped;
            continue;
        }
        auto [it, inserted] = out.vectors.insert_or_assign(fields[0], std::move(vec));
        (void)it;
        if (!inserted) ++out.duplicates;
        ++out.loaded;
    }
    return out;
}

// Frozen per-token embeddings: a word part and a character n-gram part,
// concatenated. In-vocabulary tokens read materialized rows; anything else
// falls back to the hashed scheme, so embed_token is total and every call
// with the same token is bit-identical.
class EmbeddingTable {
  public:
    EmbeddingTable() = default;

    static EmbeddingTable build(const Vocabulary& vocab, const EmbeddingConfig& config,
                                const WordVectorFile* words = nullptr,
                                const WordVectorFile* ngrams = nullptr) {
        EmbeddingTable t;
        t.vocab_ = vocab;
        t.config_ = config;
        t.word_rows_.assign(vocab.size() * config.word_dim, 0.0);
        t.ngram_rows_.assign(vocab.size() * config.ngram_dim, 0.0);
        for (std::size_t i = 1; i < vocab.size(); ++i) {  // row 0 (padding) stays zero
            const std::string& tok = vocab.token(i);
            std::vector<double> w = lookup_or_hash(words, tok, config.word_dim,
                                                   config.word_hash_seed);
            std::vector<double> g = lookup_or_hash(ngrams, tok, config.ngram_dim,
                                                   config.ngram_hash_seed);
            std::copy(w.begin(), w.end(), t.word_rows_.begin() + i * config.word_dim);
            std::copy(g.begin(), g.end(), t.ngram_rows_.begin() + i * config.ngram_dim);
        }
        return t;
    }

    // Reassemble from checkpointed rows.
    static EmbeddingTable from_rows(Vocabulary vocab, const EmbeddingConfig& config,
                                    std::vector<double> word_rows,
                                    std::vector<double> ngram_rows) {
        if (word_rows.size() != vocab.size() * config.word_dim ||
            ngram_rows.size() != vocab.size() * config.ngram_dim)
            throw DimensionError("embedding rows do not match vocabulary size");
        EmbeddingTable t;
        t.vocab_ = std::move(vocab);
        t.config_ = config;
        t.word_rows_ = std::move(word_rows);
        t.ngram_rows_ = std::move(ngram_rows);
        return t;
    }

    std::size_t dim() const { return config_.word_dim + config_.ngram_dim; }
    std::size_t word_dim() const { return config_.word_dim; }
    std::size_t ngram_dim() const { return config_.ngram_dim; }
    const Vocabulary& vocab() const { return vocab_; }
    const EmbeddingConfig& config() const { return config_; }
    const std::vector<double>& word_rows() const { return word_rows_; }
    const std::vector<double>& ngram_rows() const { return ngram_rows_; }

    std::vector<double> embed_token(const std::string& token) const {
        std::vector<double> out(dim());
        if (auto idx = vocab_.lookup(token)) {
            std::copy_n(word_rows_.begin() + *idx * config_.word_dim, config_.word_dim,
                        out.begin());
            std::copy_n(ngram_rows_.begin() + *idx * config_.ngram_dim, config_.ngram_dim,
                        out.begin() + config_.word_dim);
            return out;
        }
        std::vector<double> w = hashed_char_ngram_vector(token, config_.word_dim,
                                                         config_.word_hash_seed);
        std::vector<double> g = hashed_char_ngram_vector(token, config_.ngram_dim,
                                                         config_.ngram_hash_seed);
        std::copy(w.begin(), w.end(), out.begin());
        std::copy(g.begin(), g.end(), out.begin() + config_.word_dim);
        return out;
    }

    // Multi-token candidate values embed as the sum of their token vectors.
    std::vector<double> embed_value(const std::string& value) const {
        auto tokens = tokenize(value);
        if (tokens.empty())
            throw ContractError("embed_value: '" + value + "' tokenizes to zero tokens");
        std::vector<double> out(dim(), 0.0);
        for (const auto& tok : tokens) {
            auto v = embed_token(tok);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
        }
        return out;
    }

  private:
    static std::vector<double> lookup_or_hash(const WordVectorFile* file, const std::string& tok,
                                              std::size_t dim, std::uint64_t seed) {
        if (file) {
            auto it = file->vectors.find(tok);
            if (it != file->vectors.end()) return it->second;
        }
        return hashed_char_ngram_vector(tok, dim, seed);
    }

    Vocabulary vocab_;
    EmbeddingConfig config_;
    std::vector<double> word_rows_;   // [|v| * word_dim]
    std::vector<double> ngram_rows_;  // [|v| * ngram_dim]
};

}  // namespace copydst
