#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "copydst/config.hpp"
#include "copydst/data.hpp"
#include "copydst/errors.hpp"
#include "copydst/model.hpp"
#include "copydst/random.hpp"

namespace copydst {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian; big-endian hosts need byte swaps");

struct TensorEntry {
    std::string name;
    ad::Shape shape;
    std::vector<double> values;
};

// Serializable model state. The payload holds the frozen embedding rows and
// every trainable parameter; candidate embeddings are NOT stored — they are
// rebuilt from the ontology snapshot at restore, which is what keeps the
// payload byte-identical across candidate-set extensions.
struct Checkpoint {
    static constexpr int kVersion = 1;

    int version = kVersion;
    TrainConfig config;
    std::vector<std::string> vocab_tokens;
    Json ontology_json;  // slot -> ordered value list
    std::vector<TensorEntry> tensors;

    static Checkpoint snapshot(const TrackerModel& model, const TrainConfig& config) {
        Checkpoint ckpt;
        ckpt.config = config;
        ckpt.vocab_tokens = model.embeddings.vocab().tokens();
        ckpt.ontology_json = Json::object();
        for (const auto& d : model.decoders) {
            Json values = Json::array();
            for (const auto& c : d.candidates()) values.push_back(c.value);
            ckpt.ontology_json[d.slot] = values;
        }
        std::size_t n_vocab = model.embeddings.vocab().size();
        ckpt.tensors.push_back({"embeddings.word",
                                {n_vocab, model.embeddings.word_dim()},
                                model.embeddings.word_rows()});
        ckpt.tensors.push_back({"embeddings.ngram",
                                {n_vocab, model.embeddings.ngram_dim()},
                                model.embeddings.ngram_rows()});
        for (const auto& [name, tensor] : model.named_parameters())
            ckpt.tensors.push_back({name, tensor.shape(), tensor.values()});
        return ckpt;
    }

    Ontology ontology() const {
        Ontology out;
        for (auto it = ontology_json.begin(); it != ontology_json.end(); ++it) {
            out.add_slot(it.key());
            for (const auto& v : it.value()) out.add_value(it.key(), v.get<std::string>());
        }
        return out;
    }

    const TensorEntry& tensor(const std::string& name) const {
        for (const auto& t : tensors)
            if (t.name == name) return t;
        throw ContractError("checkpoint: missing tensor '" + name + "'");
    }

    TrackerModel restore() const {
        if (version != kVersion)
            throw ParseError("checkpoint: unsupported format version " + std::to_string(version));
        if (vocab_tokens.empty() || vocab_tokens[0] != kPadToken)
            throw ParseError("checkpoint: vocabulary must start with the padding token");
        Vocabulary vocab;
        for (const auto& tok : vocab_tokens) vocab.add(tok);
        EmbeddingConfig emb_config;
        emb_config.word_dim = config.word_dim;
        emb_config.ngram_dim = config.ngram_dim;
        EmbeddingTable embeddings =
            EmbeddingTable::from_rows(std::move(vocab), emb_config, tensor("embeddings.word").values,
                                      tensor("embeddings.ngram").values);
        Rng scratch(0);  // initializer draws are overwritten below
        TrackerModel model = TrackerModel::init(ontology(), std::move(embeddings), config.hidden,
                                                scratch);
        for (auto& [name, param] : model.named_parameters()) {
            const TensorEntry& stored = tensor(name);
            if (stored.shape != param.shape())
                throw ParseError("checkpoint: tensor '" + name + "' has shape " +
                                 ad::shape_str(stored.shape) + ", model expects " +
                                 ad::shape_str(param.shape()));
            param.values_mut() = stored.values;
        }
        return model;
    }

    std::string payload_bytes() const {
        std::string payload;
        for (const auto& t : tensors) {
            std::size_t bytes = t.values.size() * sizeof(double);
            std::size_t at = payload.size();
            payload.resize(at + bytes);
            std::memcpy(payload.data() + at, t.values.data(), bytes);
        }
        return payload;
    }

    std::uint64_t payload_hash() const { return fnv1a64(payload_bytes()); }

    void save(const std::string& path) const {
        Json header;
        header["version"] = version;
        header["config"] = config.to_json();
        header["vocab"] = vocab_tokens;
        header["ontology"] = ontology_json;
        Json manifest = Json::array();
        std::size_t offset = 0;
        for (const auto& t : tensors) {
            manifest.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
            offset += t.values.size() * sizeof(double);
        }
        header["tensors"] = manifest;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write checkpoint: " + path);
        out << header.dump() << "\n" << payload_bytes();
        if (!out) throw IoError("short write on checkpoint: " + path);
    }

    static Checkpoint load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open checkpoint: " + path);
        std::string header_line;
        if (!std::getline(in, header_line))
            throw ParseError(path + ": missing checkpoint header line");
        Json header;
        try {
            header = Json::parse(header_line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path + ": bad checkpoint header: " + e.what());
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string payload = buf.str();

        Checkpoint ckpt;
        ckpt.version = header.at("version").get<int>();
        ckpt.config = TrainConfig::from_json(header.at("config"));
        ckpt.vocab_tokens = header.at("vocab").get<std::vector<std::string>>();
        ckpt.ontology_json = header.at("ontology");
        for (const auto& entry : header.at("tensors")) {
            TensorEntry t;
            t.name = entry.at("name").get<std::string>();
            t.shape = entry.at("shape").get<ad::Shape>();
            std::size_t offset = entry.at("offset").get<std::size_t>();
            std::size_t count = ad::shape_size(t.shape);
            if (offset + count * sizeof(double) > payload.size())
                throw ParseError(path + ": payload truncated at tensor '" + t.name + "'");
            t.values.resize(count);
            std::memcpy(t.values.data(), payload.data() + offset, count * sizeof(double));
            ckpt.tensors.push_back(std::move(t));
        }
        return ckpt;
    }
};

}  // namespace copydst
