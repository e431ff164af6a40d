#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "copydst/checkpoint.hpp"
#include "copydst/config.hpp"
#include "copydst/data.hpp"
#include "copydst/errors.hpp"
#include "copydst/metrics.hpp"
#include "copydst/model.hpp"
#include "copydst/training.hpp"

namespace copydst {

inline constexpr const char* kModelDirEnv = "COPYDST_MODEL_DIR";

// ---- small shared helpers ------------------------------------------------------

inline std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << "0x" << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

// Atomic write: the file appears complete or not at all.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write " + tmp);
        out << content;
        if (!out) throw IoError("short write on " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline void write_manifest(const std::string& out_dir, const Json& manifest) {
    write_file_atomic(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

// A model argument names a file directly, or a file under $COPYDST_MODEL_DIR.
inline std::string resolve_model_path(const std::string& arg) {
    if (std::filesystem::exists(arg)) return arg;
    if (const char* dir = std::getenv(kModelDirEnv)) {
        std::filesystem::path candidate = std::filesystem::path(dir) / arg;
        if (std::filesystem::exists(candidate)) return candidate.string();
    }
    throw IoError("model not found: " + arg);
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": parse error at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
}

// Held-out value file as written by the split command: {"slot": s, "values": [...]}.
inline std::map<std::string, std::set<std::string>> load_unseen_values(const std::string& path) {
    Json j = read_json_file(path);
    std::map<std::string, std::set<std::string>> out;
    auto add = [&](const std::string& slot, const Json& values) {
        for (const auto& v : values) out[slot].insert(normalize_value(v.get<std::string>()));
    };
    if (j.contains("slot") && j.contains("values")) {
        add(j["slot"].get<std::string>(), j["values"]);
    } else {
        for (auto it = j.begin(); it != j.end(); ++it) add(it.key(), it.value());
    }
    return out;
}

// ---- train ---------------------------------------------------------------------

struct TrainArgs {
    std::string corpus;      // canonical corpus JSON (mutually exclusive with synthetic)
    std::string ontology;    // optional ontology override JSON {slot: [values]}
    std::string synthetic;   // "default" or a grammar-config JSON path
    std::size_t dialogues = 500;
    std::uint64_t gen_seed = 7;
    std::string out;
    std::size_t seeds = 1;
    TrainConfig config;
    bool json = false;
};

inline int cmd_train(const TrainArgs& args) {
    auto started = std::chrono::steady_clock::now();
    if (args.out.empty()) throw ContractError("train: --out is required");
    if (args.corpus.empty() == args.synthetic.empty())
        throw ContractError("train: exactly one of --corpus or --synthetic is required");
    if (args.seeds == 0) throw ContractError("train: --seeds must be positive");
    args.config.validate();
    std::filesystem::create_directories(args.out);

    DialogueCorpus corpus;
    Ontology ontology;
    Json inputs;
    if (!args.synthetic.empty()) {
        GrammarConfig grammar = args.synthetic == "default"
                                    ? GrammarConfig::defaults()
                                    : GrammarConfig::from_json(read_json_file(args.synthetic));
        auto generated = generate_synthetic(grammar, args.dialogues, args.gen_seed);
        corpus = std::move(generated.first);
        ontology = std::move(generated.second);
        save_corpus(corpus, args.out + "/corpus.json");
        inputs["synthetic"] = args.synthetic;
        inputs["dialogues"] = args.dialogues;
        inputs["gen_seed"] = args.gen_seed;
    } else {
        corpus = load_corpus(args.corpus);
        ontology = corpus.ontology;
        inputs["corpus"] = args.corpus;
        if (!args.ontology.empty()) {
            Json j = read_json_file(args.ontology);
            Ontology replacement;
            for (auto it = j.begin(); it != j.end(); ++it)
                for (const auto& v : it.value())
                    replacement.add_value(it.key(), v.get<std::string>());
            ontology = std::move(replacement);
            inputs["ontology"] = args.ontology;
        }
        for (const auto& w : corpus.warnings) std::cerr << "warning: " << w << "\n";
    }

    std::vector<std::string> checkpoint_paths;
    Json per_seed = Json::array();
    Json hashes = Json::object();
    double joint_sum = 0.0;
    std::size_t joint_count = 0;
    for (std::size_t i = 0; i < args.seeds; ++i) {
        TrainConfig cfg = args.config;
        cfg.seed = args.config.seed + i;
        TrainResult result = train(corpus, ontology, cfg);
        std::string path = args.seeds == 1
                               ? args.out + "/model.ckpt"
                               : args.out + "/model.seed" + std::to_string(cfg.seed) + ".ckpt";
        result.checkpoint.save(path);
        checkpoint_paths.push_back(path);
        hashes[path] = hash_hex(result.checkpoint.payload_hash());

        Json js;
        js["seed"] = cfg.seed;
        js["checkpoint"] = path;
        js["epochs_run"] = result.history.size();
        js["best_epoch"] = result.best_epoch;
        if (!std::isnan(result.best_dev_joint)) {
            js["dev_joint"] = result.best_dev_joint;
            joint_sum += result.best_dev_joint;
            ++joint_count;
        }
        js["final_mean_loss"] = result.history.empty() ? 0.0 : result.history.back().mean_loss;
        js["skipped_gold_labels"] = result.skipped_gold_labels;
        per_seed.push_back(js);
        if (!args.json)
            std::cout << "seed " << cfg.seed << ": " << result.history.size()
                      << " epochs, best epoch " << result.best_epoch << ", dev joint "
                      << (std::isnan(result.best_dev_joint)
                              ? std::string("n/a")
                              : std::to_string(result.best_dev_joint))
                      << " -> " << path << "\n";
    }

    Json summary;
    summary["seeds"] = per_seed;
    if (joint_count > 0) summary["mean_dev_joint"] = joint_sum / static_cast<double>(joint_count);
    write_file_atomic(args.out + "/summary.json", summary.dump(2) + "\n");
    if (args.json)
        std::cout << summary.dump(2) << "\n";
    else if (joint_count > 1)
        std::cout << "mean dev joint over " << joint_count << " seeds: "
                  << joint_sum / static_cast<double>(joint_count) << "\n";

    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    Json manifest;
    manifest["command"] = "train";
    manifest["config"] = args.config.to_json();
    Json seed_list = Json::array();
    for (std::size_t i = 0; i < args.seeds; ++i) seed_list.push_back(args.config.seed + i);
    manifest["seeds"] = seed_list;
    manifest["inputs"] = inputs;
    manifest["outputs"] = checkpoint_paths;
    manifest["checkpoint_hashes"] = hashes;
    manifest["timing_seconds"] = seconds;
    write_manifest(args.out, manifest);
    return 0;
}

// ---- eval ----------------------------------------------------------------------

struct EvalArgs {
    std::string model;
    std::string corpus;
    std::string unseen_values;  // optional held-out value file
    std::string out;            // optional output directory
    bool json = false;
};

inline int cmd_eval(const EvalArgs& args) {
    auto started = std::chrono::steady_clock::now();
    if (args.model.empty() || args.corpus.empty())
        throw ContractError("eval: --model and --corpus are required");
    Checkpoint ckpt = Checkpoint::load(resolve_model_path(args.model));
    DialogueCorpus corpus = load_corpus(args.corpus);
    for (const auto& w : corpus.warnings) std::cerr << "warning: " << w << "\n";

    std::map<std::string, std::set<std::string>> unseen;
    const std::map<std::string, std::set<std::string>>* unseen_ptr = nullptr;
    if (!args.unseen_values.empty()) {
        unseen = load_unseen_values(args.unseen_values);
        unseen_ptr = &unseen;
    }
    EvalReport report = evaluate(ckpt, corpus, unseen_ptr);
    if (args.json)
        std::cout << report.to_json().dump(2) << "\n";
    else
        std::cout << report.to_table();

    if (!args.out.empty()) {
        std::filesystem::create_directories(args.out);
        write_file_atomic(args.out + "/report.json", report.to_json().dump(2) + "\n");
        write_file_atomic(args.out + "/report.txt", report.to_table());
        double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        Json manifest;
        manifest["command"] = "eval";
        manifest["inputs"] = {{"model", args.model},
                              {"corpus", args.corpus},
                              {"unseen_values", args.unseen_values}};
        manifest["outputs"] = {args.out + "/report.json", args.out + "/report.txt"};
        manifest["checkpoint_hashes"] = {{args.model, hash_hex(ckpt.payload_hash())}};
        manifest["timing_seconds"] = seconds;
        write_manifest(args.out, manifest);
    }
    return 0;
}

// ---- track ---------------------------------------------------------------------

struct TrackArgs {
    std::string model;
    double threshold = -1.0;  // <0: use the checkpoint's threshold
    std::size_t top_k = 3;
    bool json = false;
};

// Parse one action line: empty-marker ("-" / "none"), or semicolon-separated
// segments of the form act, act(), act(slot) or act(slot=value). A malformed
// segment yields a warning and is dropped.
inline std::vector<SystemAct> parse_action_line(const std::string& line, std::ostream& warn) {
    std::vector<SystemAct> acts;
    std::string trimmed = line;
    auto strip = [](std::string s) {
        std::size_t b = s.find_first_not_of(" \t\r");
        std::size_t e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    trimmed = strip(trimmed);
    if (trimmed.empty() || trimmed == "-" || trimmed == "none") return acts;
    std::stringstream ss(trimmed);
    std::string segment;
    while (std::getline(ss, segment, ';')) {
        segment = strip(segment);
        if (segment.empty()) continue;
        SystemAct act;
        std::size_t open = segment.find('(');
        if (open == std::string::npos) {
            act.act = segment;
            acts.push_back(act);
            continue;
        }
        std::size_t close = segment.rfind(')');
        if (close == std::string::npos || close < open || close + 1 != segment.size()) {
            warn << "warning: malformed action segment '" << segment << "', ignored\n";
            continue;
        }
        act.act = strip(segment.substr(0, open));
        std::string args = segment.substr(open + 1, close - open - 1);
        if (act.act.empty()) {
            warn << "warning: malformed action segment '" << segment << "', ignored\n";
            continue;
        }
        if (!args.empty()) {
            std::size_t eq = args.find('=');
            if (eq == std::string::npos) {
                act.slot = strip(args);
            } else {
                act.slot = strip(args.substr(0, eq));
                act.value = strip(args.substr(eq + 1));
            }
        }
        acts.push_back(act);
    }
    return acts;
}

// Interactive/piped tracking: alternating action and utterance lines; a blank
// line resets the accumulated goal. After each turn the per-slot top
// candidates and the goal so far are printed.
inline int cmd_track(const TrackArgs& args, std::istream& in, std::ostream& out,
                     std::ostream& err) {
    if (args.model.empty()) throw ContractError("track: --model is required");
    Checkpoint ckpt = Checkpoint::load(resolve_model_path(args.model));
    TrackerModel model = ckpt.restore();
    double threshold = args.threshold > 0.0 ? args.threshold : ckpt.config.threshold;

    ad::NoGradGuard guard;
    Goal goal;
    std::size_t turn_index = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            goal.clear();
            turn_index = 0;
            if (args.json)
                out << Json{{"reset", true}}.dump() << "\n";
            else
                out << "-- state reset --\n";
            continue;
        }
        std::vector<SystemAct> acts = parse_action_line(line, err);
        std::string utterance;
        if (!std::getline(in, utterance)) {
            err << "warning: action line without a following utterance line\n";
            break;
        }

        EncodedTurn encoded = model.encode_turn(acts, tokenize(utterance));
        auto scored = model.score_turn(encoded);
        goal = accumulate_goal(goal, predict_turn(scored, threshold));
        ++turn_index;

        if (args.json) {
            Json jt;
            jt["turn"] = turn_index;
            Json slots = Json::object();
            for (const auto& [decoder, scores] : scored) {
                const auto& probs = scores.probabilities.values();
                std::vector<std::size_t> idx(probs.size());
                std::iota(idx.begin(), idx.end(), std::size_t{0});
                std::stable_sort(idx.begin(), idx.end(),
                                 [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
                Json top = Json::array();
                for (std::size_t r = 0; r < std::min(args.top_k, idx.size()); ++r)
                    top.push_back({{"value", decoder->candidates()[idx[r]].value},
                                   {"p", probs[idx[r]]}});
                slots[decoder->slot] = top;
            }
            jt["slots"] = slots;
            jt["goal"] = Json(goal);
            out << jt.dump() << "\n";
        } else {
            out << "turn " << turn_index << "\n";
            for (const auto& [decoder, scores] : scored) {
                const auto& probs = scores.probabilities.values();
                std::vector<std::size_t> idx(probs.size());
                std::iota(idx.begin(), idx.end(), std::size_t{0});
                std::stable_sort(idx.begin(), idx.end(),
                                 [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
                out << "  " << decoder->slot << ":";
                for (std::size_t r = 0; r < std::min(args.top_k, idx.size()); ++r) {
                    out << (r == 0 ? " " : " | ") << decoder->candidates()[idx[r]].value << " "
                        << std::fixed << std::setprecision(3) << probs[idx[r]];
                }
                out << "\n";
            }
            out << "  goal:";
            if (goal.empty()) out << " (all None)";
            for (const auto& [slot, value] : goal) out << " " << slot << "=" << value;
            out << "\n";
        }
    }
    return 0;
}

// ---- extend --------------------------------------------------------------------

struct ExtendArgs {
    std::string model;
    std::string slot;
    std::string value;
    std::string out;  // optional: defaults to updating the model file in place
    bool json = false;
};

inline int cmd_extend(const ExtendArgs& args) {
    if (args.model.empty() || args.slot.empty() || args.value.empty())
        throw ContractError("extend: --model, --slot and --value are required");
    std::string model_path = resolve_model_path(args.model);
    Checkpoint ckpt = Checkpoint::load(model_path);
    std::uint64_t hash_before = ckpt.payload_hash();
    TrackerModel model = ckpt.restore();
    SlotDecoder* decoder = model.find_decoder(args.slot);
    if (!decoder) throw ContractError("extend: model has no slot '" + args.slot + "'");
    std::size_t before = decoder->candidates().size();
    decoder->extend(args.value, model.embeddings);  // duplicate -> ContractError
    std::size_t after = decoder->candidates().size();

    Checkpoint updated = Checkpoint::snapshot(model, ckpt.config);
    std::uint64_t hash_after = updated.payload_hash();
    if (hash_after != hash_before)
        throw ContractError("extend: parameter payload changed unexpectedly");
    std::string out_path = args.out.empty() ? model_path : args.out;
    updated.save(out_path);

    if (args.json) {
        Json j;
        j["slot"] = args.slot;
        j["value"] = args.value;
        j["candidates_before"] = before;
        j["candidates_after"] = after;
        j["payload_hash"] = hash_hex(hash_after);
        j["output"] = out_path;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "slot " << args.slot << ": candidates " << before << " -> " << after
                  << ", parameter payload unchanged (" << hash_hex(hash_after) << ")\n"
                  << "wrote " << out_path << "\n";
    }
    return 0;
}

// ---- split ---------------------------------------------------------------------

struct SplitArgs {
    std::string corpus;
    std::string slot;
    double fraction = 0.35;
    std::uint64_t seed = 1;
    std::string out;
    bool json = false;
};

inline int cmd_split(const SplitArgs& args) {
    auto started = std::chrono::steady_clock::now();
    if (args.corpus.empty() || args.slot.empty() || args.out.empty())
        throw ContractError("split: --corpus, --slot and --out are required");
    DialogueCorpus corpus = load_corpus(args.corpus);
    UnseenSplit split = make_unseen_split(corpus, corpus.ontology, args.slot, args.fraction,
                                          args.seed);
    std::filesystem::create_directories(args.out);
    save_corpus(split.train, args.out + "/train.json");
    Json heldout;
    heldout["slot"] = args.slot;
    heldout["fraction"] = args.fraction;
    heldout["seed"] = args.seed;
    heldout["values"] = split.heldout_values;
    write_file_atomic(args.out + "/heldout.json", heldout.dump(2) + "\n");
    SplitReport report = split_report(split.train, corpus, corpus.ontology);
    write_file_atomic(args.out + "/report.json", report.to_json().dump(2) + "\n");

    if (args.json) {
        Json j;
        j["heldout"] = heldout;
        j["discarded_dialogues"] = split.discarded_dialogues;
        j["report"] = report.to_json();
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "held out " << split.heldout_values.size() << " values of slot '"
                  << args.slot << "'; discarded " << split.discarded_dialogues << " of "
                  << corpus.dialogues.size() << " dialogues\n";
        for (const auto& r : report.rows)
            std::cout << "  " << r.slot << ": " << r.total << " truth values, " << r.seen
                      << " seen, " << r.unseen << " unseen\n";
    }

    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    Json manifest;
    manifest["command"] = "split";
    manifest["inputs"] = {{"corpus", args.corpus}};
    manifest["config"] = {{"slot", args.slot}, {"fraction", args.fraction}, {"seed", args.seed}};
    manifest["seeds"] = {args.seed};
    manifest["outputs"] = {args.out + "/train.json", args.out + "/heldout.json",
                           args.out + "/report.json"};
    manifest["timing_seconds"] = seconds;
    write_manifest(args.out, manifest);
    return 0;
}

// ---- argument parsing ------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"copy-mechanism dialogue state tracker"};
    app.require_subcommand(1);

    TrainArgs train_args;
    std::string config_path;
    auto* train_cmd = app.add_subcommand("train", "train a tracker");
    train_cmd->add_option("--corpus", train_args.corpus, "canonical corpus JSON");
    train_cmd->add_option("--ontology", train_args.ontology, "ontology override JSON");
    train_cmd->add_option("--synthetic", train_args.synthetic,
                          "'default' or grammar-config JSON path");
    train_cmd->add_option("--dialogues", train_args.dialogues, "synthetic dialogue count");
    train_cmd->add_option("--gen-seed", train_args.gen_seed, "synthetic generation seed");
    train_cmd->add_option("--out", train_args.out, "output directory")->required();
    train_cmd->add_option("--seeds", train_args.seeds, "number of seeds (seed, seed+1, ...)");
    train_cmd->add_option("--config", config_path, "TrainConfig JSON file");
    TrainConfig flag_config;
    train_cmd->add_option("--hidden", flag_config.hidden);
    train_cmd->add_option("--word-dim", flag_config.word_dim);
    train_cmd->add_option("--ngram-dim", flag_config.ngram_dim);
    train_cmd->add_option("--dropout", flag_config.dropout);
    train_cmd->add_option("--lr", flag_config.learning_rate);
    train_cmd->add_option("--batch-turns", flag_config.batch_turns);
    train_cmd->add_option("--epochs", flag_config.epochs);
    train_cmd->add_option("--patience", flag_config.patience);
    train_cmd->add_option("--negatives", flag_config.negatives);
    train_cmd->add_option("--dev-fraction", flag_config.dev_fraction);
    train_cmd->add_option("--threshold", flag_config.threshold);
    train_cmd->add_option("--seed", flag_config.seed);
    train_cmd->add_option("--word-vectors", flag_config.word_vectors);
    train_cmd->add_option("--ngram-vectors", flag_config.ngram_vectors);
    train_cmd->add_flag("--json", train_args.json, "machine-readable output");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a corpus");
    eval_cmd->add_option("--model", eval_args.model, "checkpoint path")->required();
    eval_cmd->add_option("--corpus", eval_args.corpus, "canonical corpus JSON")->required();
    eval_cmd->add_option("--unseen-values", eval_args.unseen_values, "held-out value JSON");
    eval_cmd->add_option("--out", eval_args.out, "report output directory");
    eval_cmd->add_flag("--json", eval_args.json, "machine-readable output");

    TrackArgs track_args;
    auto* track_cmd = app.add_subcommand("track", "interactive turn-by-turn tracking");
    track_cmd->add_option("--model", track_args.model, "checkpoint path")->required();
    track_cmd->add_option("--threshold", track_args.threshold, "decision threshold override");
    track_cmd->add_option("--top-k", track_args.top_k, "candidates displayed per slot");
    track_cmd->add_flag("--json", track_args.json, "one JSON object per turn");

    ExtendArgs extend_args;
    auto* extend_cmd = app.add_subcommand("extend", "add a candidate value to a slot");
    extend_cmd->add_option("--model", extend_args.model, "checkpoint path")->required();
    extend_cmd->add_option("--slot", extend_args.slot, "slot to extend")->required();
    extend_cmd->add_option("--value", extend_args.value, "new candidate value")->required();
    extend_cmd->add_option("--out", extend_args.out, "output checkpoint (default: in place)");
    extend_cmd->add_flag("--json", extend_args.json, "machine-readable output");

    SplitArgs split_args;
    auto* split_cmd = app.add_subcommand("split", "hold out slot values for unseen-value runs");
    split_cmd->add_option("--corpus", split_args.corpus, "canonical corpus JSON")->required();
    split_cmd->add_option("--slot", split_args.slot, "slot to hold values out of")->required();
    split_cmd->add_option("--fraction", split_args.fraction, "fraction of values to hold out")
        ->check(CLI::Validator(
            [](std::string& s) {
                try {
                    double v = std::stod(s);
                    if (v > 0.0 && v < 1.0) return std::string();
                } catch (const std::exception&) {
                }
                return std::string("must be a fraction strictly between 0 and 1");
            },
            "FRACTION"));
    split_cmd->add_option("--seed", split_args.seed, "selection seed");
    split_cmd->add_option("--out", split_args.out, "output directory")->required();
    split_cmd->add_flag("--json", split_args.json, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (train_cmd->parsed()) {
            // precedence: flags > config file > defaults
            TrainConfig cfg;
            if (!config_path.empty()) cfg = TrainConfig::from_json(read_json_file(config_path));
            auto overlay = [&](const char* flag, auto member) {
                if (train_cmd->count(flag)) cfg.*member = flag_config.*member;
            };
            overlay("--hidden", &TrainConfig::hidden);
            overlay("--word-dim", &TrainConfig::word_dim);
            overlay("--ngram-dim", &TrainConfig::ngram_dim);
            overlay("--dropout", &TrainConfig::dropout);
            overlay("--lr", &TrainConfig::learning_rate);
            overlay("--batch-turns", &TrainConfig::batch_turns);
            overlay("--epochs", &TrainConfig::epochs);
            overlay("--patience", &TrainConfig::patience);
            overlay("--negatives", &TrainConfig::negatives);
            overlay("--dev-fraction", &TrainConfig::dev_fraction);
            overlay("--threshold", &TrainConfig::threshold);
            overlay("--seed", &TrainConfig::seed);
            overlay("--word-vectors", &TrainConfig::word_vectors);
            overlay("--ngram-vectors", &TrainConfig::ngram_vectors);
            train_args.config = cfg;
            return cmd_train(train_args);
        }
        if (eval_cmd->parsed()) return cmd_eval(eval_args);
        if (track_cmd->parsed()) return cmd_track(track_args, std::cin, std::cout, std::cerr);
        if (extend_cmd->parsed()) return cmd_extend(extend_args);
        if (split_cmd->parsed()) return cmd_split(split_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace copydst
