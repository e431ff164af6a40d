#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <copydst/embeddings.hpp>
#include <copydst/tokenize.hpp>

using namespace copydst;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path((std::filesystem::temp_directory_path() / name).string()) {
        std::ofstream out(path, std::ios::binary);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

double norm(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

}  // namespace

TEST_CASE("tokenizer lowercases and strips punctuation") {
    CHECK(tokenize("I want THAI food!") ==
          std::vector<std::string>{"i", "want", "thai", "food"});
    CHECK(tokenize("north   american") == std::vector<std::string>{"north", "american"});
    CHECK(tokenize("what's the address?") ==
          std::vector<std::string>{"what's", "the", "address"});
    CHECK(tokenize("confirm(food=italian)") ==
          std::vector<std::string>{"confirm", "food", "italian"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("  \t ").empty());
    CHECK(tokenize("price-range: $20") == std::vector<std::string>{"price", "range", "20"});
}

TEST_CASE("normalize_value canonicalizes surface forms") {
    CHECK(normalize_value("North  AMERICAN") == "north american");
    CHECK(normalize_value("thai") == "thai");
    CHECK(normalize_value(" Thai ") == "thai");
    CHECK(normalize_value("Modern-European") == "modern european");
}

TEST_CASE("vocabulary reserves pad at index zero and dedupes") {
    Vocabulary v;
    CHECK(v.size() == 1);
    CHECK(v.token(0) == kPadToken);
    CHECK(v.add("thai") == 1);
    CHECK(v.add("food") == 2);
    CHECK(v.add("thai") == 1);  // repeat returns the existing index
    CHECK(v.size() == 3);
    CHECK(v.lookup("food") == std::size_t{2});
    CHECK_FALSE(v.lookup("absent").has_value());
}

TEST_CASE("hashed character n-gram vectors") {
    auto v1 = hashed_char_ngram_vector("thai", 16, 0x1b56e9f3u);
    auto v2 = hashed_char_ngram_vector("thai", 16, 0x1b56e9f3u);
    CHECK(v1 == v2);  // deterministic

    auto v3 = hashed_char_ngram_vector("burmese", 16, 0x1b56e9f3u);
    CHECK(v1 != v3);  // distinct tokens hash differently (generic case)

    SECTION("magnitude is bounded by the 0.1 scale") {
        CHECK(norm(v1) <= 0.1 + 1e-12);
        CHECK(norm(v1) > 0.0);
    }
    SECTION("single-character token still produces n-grams of '^c$'") {
        auto v = hashed_char_ngram_vector("a", 16, 1);
        CHECK(norm(v) > 0.0);
    }
    SECTION("different seeds decorrelate word and n-gram fallbacks") {
        auto a = hashed_char_ngram_vector("thai", 16, 0x77a3c5d1u);
        auto b = hashed_char_ngram_vector("thai", 16, 0x1b56e9f3u);
        CHECK(a != b);
    }
}

TEST_CASE("word-vector file loading") {
    SECTION("well-formed file") {
        TempFile f("copydst_vec_ok.txt",
                   "thai 0.1 0.2 0.3\n"
                   "food -1 2e-1 .5\n");
        auto loaded = load_word_vectors(f.path, 3);
        CHECK(loaded.loaded == 2);
        CHECK(loaded.vectors.at("thai") == std::vector<double>{0.1, 0.2, 0.3});
        CHECK(loaded.vectors.at("food")[2] == 0.5);
        CHECK(loaded.malformed_skipped == 0);
    }
    SECTION("unparseable floats are skipped and counted") {
        TempFile f("copydst_vec_bad.txt",
                   "thai 0.1 0.2 0.3\n"
                   "\n"
                   "food 0.1 oops 0.3\n");
        auto loaded = load_word_vectors(f.path, 3);
        CHECK(loaded.loaded == 1);
        CHECK(loaded.malformed_skipped == 2);
    }
    SECTION("wrong dimension is a hard error naming the line") {
        TempFile f("copydst_vec_dim.txt", "thai 0.1 0.2\n");
        CHECK_THROWS_AS(load_word_vectors(f.path, 3), ParseError);
        CHECK_THROWS_WITH(load_word_vectors(f.path, 3), ContainsSubstring("line 1"));
    }
    SECTION("duplicates: last occurrence wins") {
        TempFile f("copydst_vec_dup.txt",
                   "thai 1 1 1\n"
                   "thai 2 2 2\n");
        auto loaded = load_word_vectors(f.path, 3);
        CHECK(loaded.duplicates == 1);
        CHECK(loaded.vectors.at("thai") == std::vector<double>{2, 2, 2});
    }
    SECTION("missing file") {
        CHECK_THROWS_AS(load_word_vectors("/nonexistent/vectors.txt", 3), IoError);
    }
}

TEST_CASE("embedding table construction and lookup") {
    Vocabulary vocab;
    vocab.add("thai");
    vocab.add("food");
    EmbeddingConfig config;
    config.word_dim = 4;
    config.ngram_dim = 3;

    SECTION("hash-only build: pad row zero, tokens nonzero") {
        auto table = EmbeddingTable::build(vocab, config, nullptr, nullptr);
        CHECK(table.dim() == 7);
        auto pad = table.embed_token(kPadToken);
        CHECK(pad == std::vector<double>(7, 0.0));
        auto thai = table.embed_token("thai");
        CHECK(norm(thai) > 0.0);
    }
    SECTION("loaded word vectors take precedence over hashing") {
        TempFile f("copydst_vec_table.txt", "thai 9 9 9 9\n");
        auto words = load_word_vectors(f.path, 4);
        auto table = EmbeddingTable::build(vocab, config, &words, nullptr);
        auto thai = table.embed_token("thai");
        CHECK(std::vector<double>(thai.begin(), thai.begin() + 4) ==
              std::vector<double>{9, 9, 9, 9});
        // the n-gram part still comes from hashing
        CHECK(norm({thai.begin() + 4, thai.end()}) > 0.0);
        // a token without a loaded vector falls back to the hashed word part
        auto food = table.embed_token("food");
        CHECK(norm({food.begin(), food.begin() + 4}) > 0.0);
    }
    SECTION("out-of-vocabulary tokens embed deterministically") {
        auto table = EmbeddingTable::build(vocab, config, nullptr, nullptr);
        auto a = table.embed_token("burmese");
        auto b = table.embed_token("burmese");
        CHECK(a == b);
        CHECK(norm(a) > 0.0);
    }
    SECTION("value embedding sums its token embeddings") {
        auto table = EmbeddingTable::build(vocab, config, nullptr, nullptr);
        auto north = table.embed_token("north");
        auto american = table.embed_token("american");
        auto value = table.embed_value("north american");
        for (std::size_t i = 0; i < value.size(); ++i)
            CHECK_THAT(value[i], WithinAbs(north[i] + american[i], 1e-15));
        CHECK_THROWS_AS(table.embed_value("!!!"), ContractError);
    }
    SECTION("from_rows round-trips and validates sizes") {
        auto table = EmbeddingTable::build(vocab, config, nullptr, nullptr);
        auto rebuilt = EmbeddingTable::from_rows(table.vocab(), config, table.word_rows(),
                                                 table.ngram_rows());
        CHECK(rebuilt.embed_token("thai") == table.embed_token("thai"));
        CHECK_THROWS_AS(EmbeddingTable::from_rows(table.vocab(), config, {1.0, 2.0},
                                                  table.ngram_rows()),
                        DimensionError);
    }
    SECTION("default dimensions are 300 + 100 = 400") {
        EmbeddingConfig defaults;
        CHECK(defaults.word_dim == 300);
        CHECK(defaults.ngram_dim == 100);
        Vocabulary tiny;
        auto table = EmbeddingTable::build(tiny, defaults, nullptr, nullptr);
        CHECK(table.dim() == 400);
    }
}
