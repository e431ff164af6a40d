#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <copydst/data.hpp>

using namespace copydst;
using Catch::Matchers::ContainsSubstring;

namespace {

Json parse(const char* text) { return Json::parse(text); }

const char* kBasicCorpus = R"({
  "ontology": {"food": ["thai", "indian"], "area": ["north"]},
  "dialogues": [
    {"turns": [
      {"system_acts": [],
       "utterance": "I want Thai food",
       "turn_label": {"food": "thai"},
       "goal": {"food": "thai"}},
      {"system_acts": [{"act": "confirm", "slot": "food", "value": "thai"}],
       "utterance": "yes and in the north",
       "turn_label": {"area": "north"},
       "goal": {"food": "thai", "area": "north"}}
    ]}
  ]
})";

}  // namespace

TEST_CASE("corpus loading from canonical json") {
    auto corpus = corpus_from_json(parse(kBasicCorpus), "mem");
    REQUIRE(corpus.dialogues.size() == 1);
    REQUIRE(corpus.turn_count() == 2);

    const Turn& t0 = corpus.dialogues[0].turns[0];
    CHECK(t0.system_acts.empty());
    CHECK(t0.utterance_raw == "I want Thai food");
    CHECK(t0.utterance == std::vector<std::string>{"i", "want", "thai", "food"});
    CHECK(t0.turn_label == Goal{{"food", "thai"}});
    CHECK(t0.goal == Goal{{"food", "thai"}});
    CHECK_FALSE(t0.goal_mismatch);

    const Turn& t1 = corpus.dialogues[0].turns[1];
    REQUIRE(t1.system_acts.size() == 1);
    CHECK(t1.system_acts[0].act == "confirm");
    CHECK(t1.system_acts[0].slot == "food");
    CHECK(t1.system_acts[0].value == "thai");
    CHECK(t1.goal == Goal{{"food", "thai"}, {"area", "north"}});

    CHECK(corpus.ontology.slots() == std::vector<std::string>{"food", "area"});
    CHECK(corpus.ontology.values("food") == std::vector<std::string>{"thai", "indian"});
    CHECK(corpus.goal_mismatches == 0);
    CHECK(corpus.out_of_ontology_labels == 0);
    CHECK(corpus.warnings.empty());
}

TEST_CASE("corpus load diagnostics") {
    SECTION("labels under unknown slots are skipped with a warning") {
        auto j = parse(kBasicCorpus);
        j["dialogues"][0]["turns"][0]["turn_label"]["price"] = "cheap";
        auto corpus = corpus_from_json(j, "mem");
        CHECK(corpus.skipped_unknown_slot_labels == 1);
        CHECK(corpus.dialogues[0].turns[0].turn_label.count("price") == 0);
        REQUIRE_FALSE(corpus.warnings.empty());
        CHECK_THAT(corpus.warnings[0], ContainsSubstring("price"));
    }
    SECTION("out-of-ontology values are kept but counted") {
        auto j = parse(kBasicCorpus);
        j["dialogues"][0]["turns"][0]["turn_label"]["food"] = "burmese";
        j["dialogues"][0]["turns"][0]["goal"]["food"] = "burmese";
        j["dialogues"][0]["turns"][1]["goal"]["food"] = "burmese";
        auto corpus = corpus_from_json(j, "mem");
        CHECK(corpus.out_of_ontology_labels == 1);
        CHECK(corpus.dialogues[0].turns[0].turn_label.at("food") == "burmese");
    }
    SECTION("a stored goal disagreeing with the label fold is flagged") {
        auto j = parse(kBasicCorpus);
        j["dialogues"][0]["turns"][1]["goal"] = Json{{"food", "indian"},
                                                     {"area", "north"}};
        auto corpus = corpus_from_json(j, "mem");
        CHECK(corpus.goal_mismatches == 1);
        CHECK_FALSE(corpus.dialogues[0].turns[0].goal_mismatch);
        CHECK(corpus.dialogues[0].turns[1].goal_mismatch);
    }
    SECTION("goal comparison is case-normalized, not literal") {
        auto j = parse(kBasicCorpus);
        j["dialogues"][0]["turns"][0]["goal"]["food"] = "THAI";
        auto corpus = corpus_from_json(j, "mem");
        CHECK(corpus.goal_mismatches == 0);
    }
    SECTION("duplicate ontology values are deduplicated with a warning") {
        auto j = parse(kBasicCorpus);
        j["ontology"]["food"].push_back("Thai");
        auto corpus = corpus_from_json(j, "mem");
        CHECK(corpus.ontology.values("food").size() == 2);
        REQUIRE_FALSE(corpus.warnings.empty());
        CHECK_THAT(corpus.warnings[0], ContainsSubstring("duplicate"));
    }
}

TEST_CASE("corpus structural errors name the json path") {
    SECTION("missing utterance") {
        auto j = parse(kBasicCorpus);
        j["dialogues"][0]["turns"][0].erase("utterance");
        CHECK_THROWS_WITH(corpus_from_json(j, "mem"),
                          ContainsSubstring("mem/dialogues/0/turns/0"));
    }
    SECTION("non-array ontology entry") {
        auto j = parse(kBasicCorpus);
        j["ontology"]["food"] = "thai";
        CHECK_THROWS_WITH(corpus_from_json(j, "mem"), ContainsSubstring("mem/ontology/food"));
    }
    SECTION("missing top-level dialogues") {
        auto j = parse(kBasicCorpus);
        j.erase("dialogues");
        CHECK_THROWS_AS(corpus_from_json(j, "mem"), ParseError);
    }
    SECTION("non-string act") {
        auto j = parse(kBasicCorpus);
        j["dialogues"][0]["turns"][1]["system_acts"][0]["act"] = 7;
        CHECK_THROWS_WITH(corpus_from_json(j, "mem"), ContainsSubstring("act"));
    }
}

TEST_CASE("corpus file io") {
    auto path = (std::filesystem::temp_directory_path() / "copydst_corpus.json").string();
    SECTION("save and reload round-trips the content") {
        auto corpus = corpus_from_json(parse(kBasicCorpus), "mem");
        save_corpus(corpus, path);
        auto reloaded = load_corpus(path);
        CHECK(corpus_to_json(reloaded).dump(2) == corpus_to_json(corpus).dump(2));
        std::remove(path.c_str());
    }
    SECTION("malformed json reports the byte offset") {
        {
            std::ofstream out(path);
            out << "{\"ontology\": {}, \"dialogues\": oops}";
        }
        CHECK_THROWS_AS(load_corpus(path), ParseError);
        CHECK_THROWS_WITH(load_corpus(path), ContainsSubstring("byte"));
        std::remove(path.c_str());
    }
    SECTION("missing file") {
        CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.json"), IoError);
    }
}

TEST_CASE("goal accumulation") {
    Goal g;
    g = accumulate_goal(g, {{"food", "thai"}});
    CHECK(g == Goal{{"food", "thai"}});
    g = accumulate_goal(g, {});  // nothing new: carry over
    CHECK(g == Goal{{"food", "thai"}});
    g = accumulate_goal(g, {{"food", "indian"}, {"area", "north"}});  // overwrite + add
    CHECK(g == Goal{{"food", "indian"}, {"area", "north"}});
}

TEST_CASE("unseen-value split") {
    auto [corpus, ontology] = generate_synthetic(GrammarConfig::defaults(), 120, 42);

    SECTION("fraction 0.35 of 40 values holds out 14") {
        auto split = make_unseen_split(corpus, ontology, "food", 0.35, 7);
        CHECK(split.heldout_values.size() == 14);
        // held-out values stay in the training ontology: they must remain predictable
        for (const auto& v : split.heldout_values)
            CHECK(split.train.ontology.has_value("food", v));
        // no training dialogue retains a held-out truth value, as label or goal
        std::set<std::string> heldout;
        for (const auto& v : split.heldout_values) heldout.insert(normalize_value(v));
        for (const auto& d : split.train.dialogues)
            for (const auto& t : d.turns) {
                for (const auto* g : {&t.turn_label, &t.goal}) {
                    auto it = g->find("food");
                    if (it != g->end()) CHECK(heldout.count(normalize_value(it->second)) == 0);
                }
            }
        CHECK(split.train.dialogues.size() + split.discarded_dialogues ==
              corpus.dialogues.size());
        CHECK(split.discarded_dialogues > 0);
    }
    SECTION("rounding is half-up") {
        // 0.5 of 5 area values -> floor(2.5 + 0.5) = 3
        auto split = make_unseen_split(corpus, ontology, "area", 0.5, 7);
        CHECK(split.heldout_values.size() == 3);
    }
    SECTION("the same seed reproduces the split exactly") {
        auto a = make_unseen_split(corpus, ontology, "food", 0.35, 7);
        auto b = make_unseen_split(corpus, ontology, "food", 0.35, 7);
        CHECK(a.heldout_values == b.heldout_values);
        CHECK(a.train.dialogues.size() == b.train.dialogues.size());
        auto c = make_unseen_split(corpus, ontology, "food", 0.35, 8);
        CHECK(c.heldout_values != a.heldout_values);
    }
    SECTION("degenerate fractions are rejected") {
        CHECK_THROWS_AS(make_unseen_split(corpus, ontology, "food", 1.0, 7), ContractError);
        CHECK_THROWS_AS(make_unseen_split(corpus, ontology, "food", 0.0, 7), ContractError);
        // 0.05 of 5 values rounds to zero held out
        CHECK_THROWS_AS(make_unseen_split(corpus, ontology, "area", 0.05, 7), ContractError);
        // 0.9 of 5 rounds to 5: nothing would remain seen
        CHECK_THROWS_AS(make_unseen_split(corpus, ontology, "area", 0.9, 7), ContractError);
        CHECK_THROWS_AS(make_unseen_split(corpus, ontology, "price", 0.35, 7), ContractError);
    }
}

TEST_CASE("seen/unseen split report") {
    auto make = [](std::vector<std::pair<std::string, std::string>> labels) {
        Json j;
        j["ontology"] = {{"food", {"thai", "indian", "burmese", "korean"}}};
        Json turns = Json::array();
        for (auto& [slot, value] : labels) {
            Json t;
            t["utterance"] = "i want " + value + " food";
            t["turn_label"] = {{slot, value}};
            t["goal"] = {{slot, value}};
            turns.push_back(t);
        }
        // one dialogue per label so goals don't need to accumulate
        Json dialogues = Json::array();
        for (auto& t : turns) dialogues.push_back(Json{{"turns", Json::array({t})}});
        j["dialogues"] = dialogues;
        return corpus_from_json(j, "mem");
    };

    auto train = make({{"food", "thai"}, {"food", "indian"}});
    auto test = make({{"food", "thai"}, {"food", "burmese"}, {"food", "korean"}});

    SECTION("totals count distinct test truth values; seen means present in training") {
        auto report = split_report(train, test, test.ontology);
        REQUIRE(report.rows.size() == 1);
        CHECK(report.rows[0].slot == "food");
        CHECK(report.rows[0].total == 3);
        CHECK(report.rows[0].seen == 1);
        CHECK(report.rows[0].unseen == 2);
    }
    SECTION("testing on the training set leaves nothing unseen") {
        auto report = split_report(train, train, train.ontology);
        CHECK(report.rows[0].total == 2);
        CHECK(report.rows[0].unseen == 0);
    }
    SECTION("json rendering") {
        auto j = split_report(train, test, test.ontology).to_json();
        CHECK(j[0]["slot"] == "food");
        CHECK(j[0]["unseen"] == 2);
    }
}

TEST_CASE("synthetic corpus generation") {
    auto config = GrammarConfig::defaults();

    SECTION("the default inventory exposes two slots") {
        auto [corpus, ontology] = generate_synthetic(config, 10, 1);
        CHECK(ontology.slots() == std::vector<std::string>{"food", "area"});
        CHECK(ontology.values("food").size() == 40);
        CHECK(ontology.values("area").size() == 5);
        CHECK(corpus.dialogues.size() == 10);
        for (const auto& d : corpus.dialogues) {
            CHECK(d.turns.size() >= config.min_turns);
            CHECK(d.turns.size() <= config.max_turns);
        }
    }
    SECTION("every gold value is realized verbatim in its utterance") {
        auto [corpus, ontology] = generate_synthetic(config, 300, 5);
        std::size_t labels = 0;
        for (const auto& d : corpus.dialogues)
            for (const auto& t : d.turns) {
                std::set<std::string> toks(t.utterance.begin(), t.utterance.end());
                for (const auto& [slot, value] : t.turn_label) {
                    ++labels;
                    for (const auto& vt : tokenize(value)) {
                        INFO("value '" << value << "' in utterance '" << t.utterance_raw << "'");
                        CHECK(toks.count(vt) == 1);
                    }
                }
            }
        CHECK(labels > 300);  // the grammar actually produces supervision
    }
    SECTION("stored goals equal the fold of turn labels") {
        auto [corpus, ontology] = generate_synthetic(config, 50, 9);
        CHECK(corpus.goal_mismatches == 0);
        for (const auto& d : corpus.dialogues) {
            Goal folded;
            for (const auto& t : d.turns) {
                folded = accumulate_goal(folded, t.turn_label);
                CHECK(t.goal == folded);
            }
        }
    }
    SECTION("generation is reproducible") {
        auto [a, onto_a] = generate_synthetic(config, 25, 77);
        auto [b, onto_b] = generate_synthetic(config, 25, 77);
        CHECK(corpus_to_json(a).dump() == corpus_to_json(b).dump());
        auto [c, onto_c] = generate_synthetic(config, 25, 78);
        CHECK(corpus_to_json(c).dump() != corpus_to_json(a).dump());
    }
    SECTION("grammar round-trips through json") {
        auto j = config.to_json();
        auto back = GrammarConfig::from_json(j);
        CHECK(back.to_json().dump() == j.dump());
        auto [a, onto_a] = generate_synthetic(config, 5, 3);
        auto [b, onto_b] = generate_synthetic(back, 5, 3);
        CHECK(corpus_to_json(a).dump() == corpus_to_json(b).dump());
    }
    SECTION("degenerate grammars are rejected") {
        GrammarConfig empty;
        CHECK_THROWS_AS(generate_synthetic(empty, 5, 1), ContractError);

        GrammarConfig no_values = config;
        no_values.slots[0].values.clear();
        CHECK_THROWS_AS(generate_synthetic(no_values, 5, 1), ContractError);

        GrammarConfig bad_template;
        bad_template.slots.push_back({"food", {"thai"}, {"i want food"}, 1.0});
        CHECK_THROWS_AS(generate_synthetic(bad_template, 5, 1), ContractError);
        CHECK_THROWS_WITH(generate_synthetic(bad_template, 5, 1),
                          ContainsSubstring("VALUE"));
    }
}
