#pragma once

#include <map>
#include <string>
#include <vector>

#include "distaudit/embedding.hpp"

namespace distaudit {

// Keyed float32 vector store for externally computed features. Keys are
// "<image_id>" for clean images and "<image_id>|<spec token>" for distorted
// ones. Read-only after load; lookups are thread-safe.
//
// Binary layout (file extension free-form, conventionally .emb):
//   magic "EMB1" | u32 LE dim | u32 LE count |
//   per record: u16 LE key length | key bytes | dim x float32 LE
// CSV alternative accepted on read: header "key,v0,...,v{dim-1}".
class EmbeddingStore {
public:
    EmbeddingStore() = default;
    explicit EmbeddingStore(int dim) : dim_(dim) {}

    int dim() const { return dim_; }
    std::size_t size() const { return records_.size(); }

    // Rejects duplicate keys and vectors of the wrong dimension.
    void insert(const std::string& key, Embedding vec);

    bool contains(const std::string& key) const { return records_.count(key) != 0; }
    const Embedding& get(const std::string& key) const;  // throws on miss
    const Embedding* find(const std::string& key) const;

    const std::map<std::string, Embedding>& records() const { return records_; }

    bool operator==(const EmbeddingStore&) const = default;

private:
    int dim_ = 0;
    std::map<std::string, Embedding> records_;
};

void store_write(const EmbeddingStore& store, const std::string& path);

// Sniffs binary vs CSV from the leading bytes.
EmbeddingStore store_read(const std::string& path);

}  // namespace distaudit
