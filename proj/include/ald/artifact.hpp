#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ald/error.hpp"
#include "ald/hash.hpp"
#include "ald/params.hpp"

namespace ald {

constexpr int kArtifactVersion = 1;

// Trained-model container: a human-readable header (format version, system
// kind, full run configuration, preprocessing fingerprints) followed by the
// named parameter tensors as little-endian IEEE-754 float64, in header
// order, with an FNV-1a checksum over the payload bytes.
struct ModelArtifact {
    int version = kArtifactVersion;
    std::string kind;
    std::string schema;
    int n_classes = 0;
    std::uint64_t alphabet_hash = 0;
    std::uint64_t vocab_hash = 0;
    std::uint64_t unigram_hash = 0;
    std::map<std::string, std::string> config;
    std::map<std::string, Tensor> tensors;
};

namespace detail {

inline void append_f64_le(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t swapped = 0;
        for (int i = 0; i < 8; ++i) swapped |= ((bits >> (8 * i)) & 0xffULL) << (8 * (7 - i));
        bits = swapped;
    }
    char b[8];
    std::memcpy(b, &bits, 8);
    out.append(b, 8);
}

inline double read_f64_le(const char* p) {
    std::uint64_t bits;
    std::memcpy(&bits, p, 8);
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t swapped = 0;
        for (int i = 0; i < 8; ++i) swapped |= ((bits >> (8 * i)) & 0xffULL) << (8 * (7 - i));
        bits = swapped;
    }
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace detail

inline void save_artifact(const std::string& path, const ModelArtifact& artifact) {
    std::string payload;
    std::ostringstream head;
    head << "ALD_MODEL " << artifact.version << "\n";
    head << "kind " << artifact.kind << "\n";
    head << "schema " << artifact.schema << "\n";
    head << "n_classes " << artifact.n_classes << "\n";
    head << "alphabet_hash " << hex64(artifact.alphabet_hash) << "\n";
    head << "vocab_hash " << hex64(artifact.vocab_hash) << "\n";
    head << "unigram_hash " << hex64(artifact.unigram_hash) << "\n";
    head << "creator ald/1\n";
    for (const auto& [key, value] : artifact.config) head << "config " << key << " " << value << "\n";
    for (const auto& [name, tensor] : artifact.tensors) {
        head << "tensor " << name << " " << tensor.shape.size();
        for (int e : tensor.shape) head << " " << e;
        head << "\n";
        for (double v : tensor.data) detail::append_f64_le(payload, v);
    }
    Fnv64 checksum;
    checksum.update(payload.data(), payload.size());
    head << "payload_fnv64 " << hex64(checksum.digest()) << "\n";
    head << "DATA\n";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path);
    const std::string header = head.str();
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw DataError("failed while writing model file: " + path);
}

inline ModelArtifact load_artifact(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    ModelArtifact artifact;
    std::string line;
    std::vector<std::pair<std::string, std::vector<int>>> tensor_order;
    std::uint64_t expected_checksum = 0;
    bool have_checksum = false;
    if (!std::getline(in, line)) throw DataError(path + ": empty model file");
    {
        std::istringstream ls(line);
        std::string magic;
        int version = -1;
        ls >> magic >> version;
        if (magic != "ALD_MODEL") throw DataError(path + ": not a model file");
        if (version != kArtifactVersion)
            throw DataError(path + ": model format version " + std::to_string(version) + " but this build reads " +
                            std::to_string(kArtifactVersion));
        artifact.version = version;
    }
    while (std::getline(in, line)) {
        if (line == "DATA") break;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "kind") {
            ls >> artifact.kind;
        } else if (tag == "schema") {
            ls >> artifact.schema;
        } else if (tag == "n_classes") {
            ls >> artifact.n_classes;
        } else if (tag == "alphabet_hash" || tag == "vocab_hash" || tag == "unigram_hash") {
            std::string hex;
            ls >> hex;
            const std::uint64_t v = std::stoull(hex, nullptr, 16);
            if (tag == "alphabet_hash") artifact.alphabet_hash = v;
            if (tag == "vocab_hash") artifact.vocab_hash = v;
            if (tag == "unigram_hash") artifact.unigram_hash = v;
        } else if (tag == "config") {
            std::string key;
            ls >> key;
            std::string value;
            std::getline(ls, value);
            if (!value.empty() && value.front() == ' ') value.erase(value.begin());
            artifact.config[key] = value;
        } else if (tag == "tensor") {
            std::string name;
            std::size_t ndim = 0;
            ls >> name >> ndim;
            std::vector<int> shape(ndim);
            for (auto& e : shape)
                if (!(ls >> e)) throw DataError(path + ": truncated tensor declaration for " + name);
            tensor_order.emplace_back(name, std::move(shape));
        } else if (tag == "payload_fnv64") {
            std::string hex;
            ls >> hex;
            expected_checksum = std::stoull(hex, nullptr, 16);
            have_checksum = true;
        } else if (tag == "creator" || tag.empty()) {
            // informational
        } else {
            throw DataError(path + ": unknown header entry '" + tag + "'");
        }
    }
    if (!have_checksum) throw DataError(path + ": missing payload checksum");
    std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Fnv64 checksum;
    checksum.update(payload.data(), payload.size());
    if (checksum.digest() != expected_checksum)
        throw DataError(path + ": payload checksum mismatch; the model file is corrupt");
    std::size_t offset = 0;
    for (auto& [name, shape] : tensor_order) {
        Tensor t(shape);
        const std::size_t bytes = t.data.size() * 8;
        if (offset + bytes > payload.size()) throw DataError(path + ": payload shorter than declared tensors");
        for (std::size_t i = 0; i < t.data.size(); ++i)
            t.data[i] = detail::read_f64_le(payload.data() + offset + i * 8);
        offset += bytes;
        artifact.tensors.emplace(name, std::move(t));
    }
    if (offset != payload.size()) throw DataError(path + ": payload longer than declared tensors");
    return artifact;
}

// Install loaded tensors into a freshly built system's parameter store.
inline void assign_tensors(ParamStore& store, const std::map<std::string, Tensor>& tensors) {
    for (const auto& [name, tensor] : tensors) {
        ParamEntry& e = store.entry(name);
        if (!e.value.same_shape(tensor))
            throw DataError("model tensor '" + name + "' has a different shape than the configured system");
        e.value = tensor;
    }
    for (const auto& [name, e] : store.entries())
        if (!tensors.count(name)) throw DataError("model file is missing tensor '" + name + "'");
}

}  // namespace ald
