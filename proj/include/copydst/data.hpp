#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "copydst/encoder.hpp"
#include "copydst/errors.hpp"
#include "copydst/random.hpp"
#include "copydst/tokenize.hpp"

namespace copydst {

using Json = nlohmann::ordered_json;

// Informable slots with their ordered candidate value lists. Candidate order
// is load order and is preserved everywhere downstream (decoders, reports).
class Ontology {
  public:
    void add_slot(const std::string& slot) {
        if (values_.count(slot)) return;
        slots_.push_back(slot);
        values_[slot] = {};
    }

    // Returns false (and changes nothing) when the value is already present
    // after case-normalization.
    bool add_value(const std::string& slot, const std::string& value) {
        add_slot(slot);
        std::string norm = normalize_value(value);
        auto& norms = normalized_[slot];
        if (norms.count(norm)) return false;
        norms.insert(norm);
        values_[slot].push_back(value);
        return true;
    }

    bool has_slot(const std::string& slot) const { return values_.count(slot) > 0; }
    bool has_value(const std::string& slot, const std::string& value) const {
        auto it = normalized_.find(slot);
        return it != normalized_.end() && it->second.count(normalize_value(value)) > 0;
    }

    const std::vector<std::string>& slots() const { return slots_; }
    const std::vector<std::string>& values(const std::string& slot) const {
        auto it = values_.find(slot);
        if (it == values_.end()) throw ContractError("ontology: unknown slot '" + slot + "'");
        return it->second;
    }

    Json to_json() const {
        Json j = Json::object();
        for (const auto& s : slots_) j[s] = values_.at(s);
        return j;
    }

  private:
    std::vector<std::string> slots_;
    std::unordered_map<std::string, std::vector<std::string>> values_;
    std::unordered_map<std::string, std::unordered_set<std::string>> normalized_;
};

struct Turn {
    std::vector<SystemAct> system_acts;
    std::string utterance_raw;
    std::vector<std::string> utterance;  // tokenized at load
    Goal turn_label;                     // new constraints expressed this turn
    Goal goal;                           // gold accumulated goal
    bool goal_mismatch = false;          // stored goal disagreed with the fold of labels
};

struct Dialogue {
    std::vector<Turn> turns;
};

struct DialogueCorpus {
    Ontology ontology;
    std::vector<Dialogue> dialogues;

    // load diagnostics
    std::size_t out_of_ontology_labels = 0;
    std::size_t goal_mismatches = 0;
    std::size_t skipped_unknown_slot_labels = 0;
    std::vector<std::string> warnings;

    std::size_t turn_count() const {
        std::size_t n = 0;
        for (const auto& d : dialogues) n += d.turns.size();
        return n;
    }
};

// Goal accumulation: a turn prediction overwrites the slot, otherwise the
// previous value carries over. Slots start as None (absent).
inline Goal accumulate_goal(const Goal& prev, const Goal& turn_prediction) {
    Goal out = prev;
    for (const auto& [slot, value] : turn_prediction) out[slot] = value;
    return out;
}

namespace detail {

inline const Json& require_key(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object())
        throw ParseError(path + ": expected object");
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(path + ": missing key '" + key + "'");
    return *it;
}

inline std::string require_string(const Json& j, const std::string& path) {
    if (!j.is_string()) throw ParseError(path + ": expected string");
    return j.get<std::string>();
}

inline Goal parse_goal_object(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ParseError(path + ": expected object of slot -> value");
    Goal out;
    for (auto it = j.begin(); it != j.end(); ++it)
        out[it.key()] = require_string(it.value(), path + "/" + it.key());
    return out;
}

}  // namespace detail

// Build a corpus from already-parsed canonical JSON, validating structure
// (errors name the JSON path) and the goal fold (mismatches are flagged,
// not fatal).
inline DialogueCorpus corpus_from_json(const Json& root, const std::string& source) {
    DialogueCorpus corpus;
    const Json& onto = detail::require_key(root, "ontology", source);
    if (!onto.is_object()) throw ParseError(source + "/ontology: expected object");
    for (auto it = onto.begin(); it != onto.end(); ++it) {
        if (!it.value().is_array())
            throw ParseError(source + "/ontology/" + it.key() + ": expected array of values");
        corpus.ontology.add_slot(it.key());
        for (std::size_t i = 0; i < it.value().size(); ++i) {
            std::string v = detail::require_string(it.value()[i], source + "/ontology/" + it.key() +
                                                                      "/" + std::to_string(i));
            if (!corpus.ontology.add_value(it.key(), v))
                corpus.warnings.push_back("duplicate ontology value '" + v + "' for slot '" +
                                          it.key() + "'");
        }
    }

    const Json& dialogues = detail::require_key(root, "dialogues", source);
    if (!dialogues.is_array()) throw ParseError(source + "/dialogues: expected array");
    for (std::size_t di = 0; di < dialogues.size(); ++di) {
        std::string dpath = source + "/dialogues/" + std::to_string(di);
        const Json& turns = detail::require_key(dialogues[di], "turns", dpath);
        if (!turns.is_array()) throw ParseError(dpath + "/turns: expected array");
        Dialogue dlg;
        Goal folded;
        for (std::size_t ti = 0; ti < turns.size(); ++ti) {
            std::string tpath = dpath + "/turns/" + std::to_string(ti);
            const Json& jt = turns[ti];
            Turn turn;
            if (jt.contains("system_acts")) {
                const Json& acts = jt["system_acts"];
                if (!acts.is_array()) throw ParseError(tpath + "/system_acts: expected array");
                for (std::size_t ai = 0; ai < acts.size(); ++ai) {
                    std::string apath = tpath + "/system_acts/" + std::to_string(ai);
                    SystemAct act;
                    act.act = detail::require_string(detail::require_key(acts[ai], "act", apath),
                                                     apath + "/act");
                    if (acts[ai].contains("slot"))
                        act.slot = detail::require_string(acts[ai]["slot"], apath + "/slot");
                    if (acts[ai].contains("value"))
                        act.value = detail::require_string(acts[ai]["value"], apath + "/value");
                    turn.system_acts.push_back(std::move(act));
                }
            }
            turn.utterance_raw = detail::require_string(
                detail::require_key(jt, "utterance", tpath), tpath + "/utterance");
            turn.utterance = tokenize(turn.utterance_raw);
            Goal raw_label =
                jt.contains("turn_label") ? detail::parse_goal_object(jt["turn_label"], tpath +
                                                                      "/turn_label")
                                          : Goal{};
            for (const auto& [slot, value] : raw_label) {
                if (!corpus.ontology.has_slot(slot)) {
                    ++corpus.skipped_unknown_slot_labels;
                    corpus.warnings.push_back(tpath + ": unknown slot '" + slot +
                                              "', label skipped");
                    continue;
                }
                if (!corpus.ontology.has_value(slot, value)) {
                    ++corpus.out_of_ontology_labels;
                    corpus.warnings.push_back(tpath + ": value '" + value +
                                              "' for slot '" + slot + "' not in ontology");
                }
                turn.turn_label[slot] = value;
            }
            turn.goal = jt.contains("goal")
                            ? detail::parse_goal_object(jt["goal"], tpath + "/goal")
                            : Goal{};
            folded = accumulate_goal(folded, turn.turn_label);
            Goal norm_folded, norm_stored;
            for (const auto& [s, v] : folded) norm_folded[s] = normalize_value(v);
            for (const auto& [s, v] : turn.goal) norm_stored[s] = normalize_value(v);
            if (norm_folded != norm_stored) {
                turn.goal_mismatch = true;
                ++corpus.goal_mismatches;
            }
            dlg.turns.push_back(std::move(turn));
        }
        corpus.dialogues.push_back(std::move(dlg));
    }
    return corpus;
}

inline DialogueCorpus load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    Json root;
    try {
        root = Json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": parse error at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
    return corpus_from_json(root, path);
}

inline Json corpus_to_json(const DialogueCorpus& corpus) {
    Json root;
    root["ontology"] = corpus.ontology.to_json();
    Json dialogues = Json::array();
    for (const auto& d : corpus.dialogues) {
        Json turns = Json::array();
        for (const auto& t : d.turns) {
            Json jt;
            Json acts = Json::array();
            for (const auto& a : t.system_acts) {
                Json ja;
                ja["act"] = a.act;
                if (!a.slot.empty()) ja["slot"] = a.slot;
                if (!a.value.empty()) ja["value"] = a.value;
                acts.push_back(ja);
            }
            jt["system_acts"] = acts;
            jt["utterance"] = t.utterance_raw;
            jt["turn_label"] = Json(t.turn_label);
            jt["goal"] = Json(t.goal);
            turns.push_back(jt);
        }
        Json jd;
        jd["turns"] = turns;
        dialogues.push_back(jd);
    }
    root["dialogues"] = dialogues;
    return root;
}

inline void save_corpus(const DialogueCorpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write corpus file: " + path);
    out << corpus_to_json(corpus).dump(2) << "\n";
}

// ---- unseen-value split -----------------------------------------------------

struct UnseenSplit {
    DialogueCorpus train;
    std::vector<std::string> heldout_values;  // in ontology order
    std::size_t discarded_dialogues = 0;
};

// Hold out round(fraction * |V_slot|) values of one slot and drop every
// training dialogue that has any of them as a truth value for that slot.
// Held-out values stay in the ontology: they must remain predictable.
inline UnseenSplit make_unseen_split(const DialogueCorpus& corpus, const Ontology& ontology,
                                     const std::string& slot, double fraction,
                                     std::uint64_t seed) {
    if (!ontology.has_slot(slot))
        throw ContractError("make_unseen_split: unknown slot '" + slot + "'");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ContractError("make_unseen_split: fraction must be in (0,1)");
    const auto& values = ontology.values(slot);
    std::size_t total = values.size();
    std::size_t k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(total) +
                                                        0.5));
    if (k == 0 || k >= total)
        throw ContractError("make_unseen_split: fraction " + std::to_string(fraction) + " of " +
                            std::to_string(total) + " values holds out " + std::to_string(k));

    Rng rng(seed);
    auto picked = rng.sample_without_replacement(total, k);
    std::set<std::size_t> picked_set(picked.begin(), picked.end());

    UnseenSplit out;
    std::unordered_set<std::string> heldout_norm;
    for (std::size_t i = 0; i < total; ++i)
        if (picked_set.count(i)) {
            out.heldout_values.push_back(values[i]);
            heldout_norm.insert(normalize_value(values[i]));
        }

    out.train.ontology = corpus.ontology;
    for (const auto& d : corpus.dialogues) {
        bool discard = false;
        for (const auto& t : d.turns) {
            auto check = [&](const Goal& g) {
                auto it = g.find(slot);
                return it != g.end() && heldout_norm.count(normalize_value(it->second)) > 0;
            };
            if (check(t.turn_label) || check(t.goal)) {
                discard = true;
                break;
            }
        }
        if (discard)
            ++out.discarded_dialogues;
        else
            out.train.dialogues.push_back(d);
    }
    return out;
}

// ---- seen/unseen statistics ---------------------------------------------------

struct SplitReportRow {
    std::string slot;
    std::size_t total = 0;   // distinct truth values in the test corpus
    std::size_t seen = 0;    // of those, how many occur as truth values in training
    std::size_t unseen = 0;
};

struct SplitReport {
    std::vector<SplitReportRow> rows;

    Json to_json() const {
        Json j = Json::array();
        for (const auto& r : rows)
            j.push_back({{"slot", r.slot},
                         {"total", r.total},
                         {"seen", r.seen},
                         {"unseen", r.unseen}});
        return j;
    }
};

inline std::set<std::string> truth_values(const DialogueCorpus& corpus, const std::string& slot) {
    std::set<std::string> out;
    for (const auto& d : corpus.dialogues)
        for (const auto& t : d.turns) {
            auto it = t.turn_label.find(slot);
            if (it != t.turn_label.end()) out.insert(normalize_value(it->second));
        }
    return out;
}

// A value counts as "seen" iff it occurs as a truth value in training.
inline SplitReport split_report(const DialogueCorpus& train, const DialogueCorpus& test,
                                const Ontology& ontology) {
    SplitReport report;
    for (const auto& slot : ontology.slots()) {
        auto train_set = truth_values(train, slot);
        auto test_set = truth_values(test, slot);
        SplitReportRow row;
        row.slot = slot;
        row.total = test_set.size();
        for (const auto& v : test_set)
            if (train_set.count(v)) ++row.seen;
        row.unseen = row.total - row.seen;
        report.rows.push_back(row);
    }
    return report;
}

// ---- synthetic corpus generation ----------------------------------------------

struct SlotGrammar {
    std::string slot;
    std::vector<std::string> values;
    std::vector<std::string> templates;  // each contains the placeholder VALUE
    double weight = 1.0;                 // relative chance of being the mentioned slot
};

struct GrammarConfig {
    std::vector<SlotGrammar> slots;
    std::vector<std::string> chitchat;  // label-free utterances
    std::vector<std::string> affirmations = {"yes", "yes that's right", "yeah correct"};
    double mention_prob = 0.75;        // chance a non-opening turn expresses a constraint
    double second_slot_prob = 0.2;     // chance of constraining a second slot in the same turn
    double change_prob = 0.15;         // re-mention an already-set slot with a new value
    std::size_t min_turns = 2;
    std::size_t max_turns = 6;

    static GrammarConfig defaults();
    static GrammarConfig from_json(const Json& j);
    Json to_json() const;
};

inline GrammarConfig GrammarConfig::defaults() {
    GrammarConfig g;
    SlotGrammar food;
    food.slot = "food";
    food.weight = 0.7;
    food.values = {
        "italian",   "thai",      "chinese",   "indian",        "mexican",
        "french",    "japanese",  "korean",    "vietnamese",    "spanish",
        "greek",     "turkish",   "lebanese",  "moroccan",      "ethiopian",
        "persian",   "russian",   "polish",    "german",        "austrian",
        "swiss",     "british",   "irish",     "portuguese",    "brazilian",
        "peruvian",  "cuban",     "jamaican",  "cajun",         "hawaiian",
        "filipino",  "indonesian","malaysian", "singaporean",   "burmese",
        "nepalese",  "north american", "modern european", "eastern european",
        "middle eastern"};
    food.templates = {"i want VALUE food",
                      "i would like VALUE food",
                      "im looking for a VALUE restaurant",
                      "how about VALUE food",
                      "do you have anything VALUE",
                      "VALUE food please",
                      "can i get VALUE cuisine",
                      "serve me VALUE food"};
    g.slots.push_back(std::move(food));

    SlotGrammar area;
    area.slot = "area";
    area.weight = 0.3;
    area.values = {"north", "south", "east", "west", "centre"};
    area.templates = {"somewhere in the VALUE",
                      "in the VALUE please",
                      "VALUE part of town",
                      "i want the VALUE of town"};
    g.slots.push_back(std::move(area));

    g.chitchat = {"hello",
                  "thank you good bye",
                  "what is the address",
                  "can i have the phone number",
                  "is it expensive",
                  "that sounds good"};
    return g;
}

inline GrammarConfig GrammarConfig::from_json(const Json& j) {
    GrammarConfig g;
    const Json& slots = detail::require_key(j, "slots", "grammar");
    if (!slots.is_array()) throw ParseError("grammar/slots: expected array");
    for (std::size_t i = 0; i < slots.size(); ++i) {
        std::string path = "grammar/slots/" + std::to_string(i);
        SlotGrammar s;
        s.slot = detail::require_string(detail::require_key(slots[i], "slot", path), path + "/slot");
        for (const auto& v : detail::require_key(slots[i], "values", path))
            s.values.push_back(v.get<std::string>());
        for (const auto& t : detail::require_key(slots[i], "templates", path))
            s.templates.push_back(t.get<std::string>());
        if (slots[i].contains("weight")) s.weight = slots[i]["weight"].get<double>();
        g.slots.push_back(std::move(s));
    }
    if (j.contains("chitchat"))
        for (const auto& c : j["chitchat"]) g.chitchat.push_back(c.get<std::string>());
    if (j.contains("mention_prob")) g.mention_prob = j["mention_prob"].get<double>();
    if (j.contains("second_slot_prob")) g.second_slot_prob = j["second_slot_prob"].get<double>();
    if (j.contains("change_prob")) g.change_prob = j["change_prob"].get<double>();
    if (j.contains("min_turns")) g.min_turns = j["min_turns"].get<std::size_t>();
    if (j.contains("max_turns")) g.max_turns = j["max_turns"].get<std::size_t>();
    return g;
}

inline Json GrammarConfig::to_json() const {
    Json j;
    Json slots_j = Json::array();
    for (const auto& s : slots)
        slots_j.push_back({{"slot", s.slot},
                           {"values", s.values},
                           {"templates", s.templates},
                           {"weight", s.weight}});
    j["slots"] = slots_j;
    j["chitchat"] = chitchat;
    j["mention_prob"] = mention_prob;
    j["second_slot_prob"] = second_slot_prob;
    j["change_prob"] = change_prob;
    j["min_turns"] = min_turns;
    j["max_turns"] = max_turns;
    return j;
}

namespace detail {

inline std::string fill_template(const std::string& tmpl, const std::string& value) {
    std::string out = tmpl;
    auto pos = out.find("VALUE");
    if (pos == std::string::npos)
        throw ContractError("synthetic template missing VALUE placeholder: '" + tmpl + "'");
    out.replace(pos, 5, value);
    return out;
}

}  // namespace detail

// Template-driven dialogue sampler. Every gold value is realized verbatim in
// the utterance it is labeled on, so copy supervision always exists.
inline std::pair<DialogueCorpus, Ontology> generate_synthetic(const GrammarConfig& config,
                                                              std::size_t n_dialogues,
                                                              std::uint64_t seed) {
    if (config.slots.empty()) throw ContractError("generate_synthetic: no slots configured");
    for (const auto& s : config.slots) {
        if (s.values.empty())
            throw ContractError("generate_synthetic: slot '" + s.slot +
                                "' has an empty value inventory");
        if (s.templates.empty())
            throw ContractError("generate_synthetic: slot '" + s.slot + "' has no templates");
    }

    Ontology ontology;
    for (const auto& s : config.slots)
        for (const auto& v : s.values) ontology.add_value(s.slot, v);

    double weight_total = 0.0;
    for (const auto& s : config.slots) weight_total += s.weight;

    Rng rng(seed);
    auto pick_slot = [&]() -> const SlotGrammar& {
        double r = rng.uniform() * weight_total;
        double acc = 0.0;
        for (const auto& s : config.slots) {
            acc += s.weight;
            if (r < acc) return s;
        }
        return config.slots.back();
    };

    DialogueCorpus corpus;
    corpus.ontology = ontology;
    for (std::size_t di = 0; di < n_dialogues; ++di) {
        Dialogue dlg;
        Goal goal;
        std::size_t n_turns =
            config.min_turns + static_cast<std::size_t>(rng.below(config.max_turns -
                                                                  config.min_turns + 1));
        bool last_was_confirm = false;
        for (std::size_t ti = 0; ti < n_turns; ++ti) {
            Turn turn;
            // previous system action
            if (ti > 0) {
                double r = rng.uniform();
                if (r < 0.35 && !goal.empty()) {
                    // confirm an already-expressed constraint
                    std::vector<std::string> set_slots;
                    for (const auto& [s, v] : goal) set_slots.push_back(s);
                    const std::string& s = set_slots[rng.below(set_slots.size())];
                    turn.system_acts.push_back({"confirm", s, goal[s]});
                    last_was_confirm = true;
                } else if (r < 0.7) {
                    std::vector<std::string> unfilled;
                    for (const auto& s : config.slots)
                        if (!goal.count(s.slot)) unfilled.push_back(s.slot);
                    if (!unfilled.empty()) {
                        turn.system_acts.push_back(
                            {"request", unfilled[rng.below(unfilled.size())], ""});
                    } else {
                        turn.system_acts.push_back({"offer", "", ""});
                    }
                    last_was_confirm = false;
                } else {
                    last_was_confirm = false;
                }
            }

            // user utterance
            bool mention = (ti == 0) || rng.uniform() < config.mention_prob;
            if (mention) {
                std::vector<std::string> pieces;
                std::unordered_set<std::string> used;
                std::size_t mentions = rng.uniform() < config.second_slot_prob ? 2 : 1;
                for (std::size_t m = 0; m < mentions; ++m) {
                    const SlotGrammar& sg = pick_slot();
                    if (used.count(sg.slot)) continue;
                    used.insert(sg.slot);
                    bool already = goal.count(sg.slot) > 0;
                    if (already && rng.uniform() >= config.change_prob && m == 0 && ti > 0) {
                        // keep the existing constraint this turn
                        continue;
                    }
                    const std::string& value = sg.values[rng.below(sg.values.size())];
                    pieces.push_back(detail::fill_template(
                        sg.templates[rng.below(sg.templates.size())], value));
                    turn.turn_label[sg.slot] = value;
                }
                if (pieces.empty()) {
                    turn.utterance_raw = config.chitchat[rng.below(config.chitchat.size())];
                } else {
                    std::string joined = pieces[0];
                    for (std::size_t p = 1; p < pieces.size(); ++p) joined += " and " + pieces[p];
                    turn.utterance_raw = joined;
                }
            } else if (last_was_confirm && !config.affirmations.empty()) {
                turn.utterance_raw = config.affirmations[rng.below(config.affirmations.size())];
            } else {
                turn.utterance_raw = config.chitchat[rng.below(config.chitchat.size())];
            }
            turn.utterance = tokenize(turn.utterance_raw);
            goal = accumulate_goal(goal, turn.turn_label);
            turn.goal = goal;
            dlg.turns.push_back(std::move(turn));
        }
        corpus.dialogues.push_back(std::move(dlg));
    }
    return {corpus, ontology};
}

}  // namespace copydst
