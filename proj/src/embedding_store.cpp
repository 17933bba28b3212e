#include "distaudit/embedding_store.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "distaudit/csv.hpp"

namespace distaudit {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                 static_cast<char>(v >> 24)};
    os.write(b, 4);
}

void put_u16(std::ostream& os, std::uint16_t v) {
    char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
    os.write(b, 2);
}

std::uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("truncated embedding store: " + path);
    return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
           (std::uint32_t{b[3]} << 24);
}

std::uint16_t get_u16(std::istream& is, const std::string& path) {
    unsigned char b[2];
    if (!is.read(reinterpret_cast<char*>(b), 2))
        throw std::runtime_error("truncated embedding store: " + path);
    return static_cast<std::uint16_t>(std::uint16_t{b[0]} | (std::uint16_t{b[1]} << 8));
}

EmbeddingStore read_binary(std::ifstream& in, const std::string& path) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("bad magic in embedding store: " + path);
    const std::uint32_t dim = get_u32(in, path);
    const std::uint32_t count = get_u32(in, path);
    if (dim == 0) throw std::runtime_error("embedding store has dim 0: " + path);

    EmbeddingStore store(static_cast<int>(dim));
    std::string key;
    std::vector<float> vec(dim);
    for (std::uint32_t r = 0; r < count; ++r) {
        const std::uint16_t klen = get_u16(in, path);
        key.resize(klen);
        if (!in.read(key.data(), klen))
            throw std::runtime_error("truncated embedding store: " + path);
        if (!in.read(reinterpret_cast<char*>(vec.data()),
                     static_cast<std::streamsize>(sizeof(float) * dim)))
            throw std::runtime_error("truncated embedding store: " + path);
        store.insert(key, Embedding(vec.begin(), vec.end()));
    }
    return store;
}

EmbeddingStore read_csv(const std::string& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty()) throw std::runtime_error("empty embedding CSV: " + path);
    const auto& header = rows[0];
    if (header.size() < 2 || header[0] != "key")
        throw std::runtime_error("embedding CSV must start with header key,v0,...: " + path);
    const int dim = static_cast<int>(header.size()) - 1;

    EmbeddingStore store(dim);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (static_cast<int>(row.size()) != dim + 1)
            throw std::runtime_error("embedding CSV row " + std::to_string(r + 1) +
                                     " has wrong field count: " + path);
        Embedding vec(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            const std::string& field = row[static_cast<std::size_t>(i + 1)];
            char* end = nullptr;
            vec[static_cast<std::size_t>(i)] = std::strtof(field.c_str(), &end);
            if (end == field.c_str() || *end != '\0')
                throw std::runtime_error("bad float '" + field + "' in embedding CSV: " + path);
        }
        store.insert(row[0], std::move(vec));
    }
    return store;
}

}  // namespace

void EmbeddingStore::insert(const std::string& key, Embedding vec) {
    if (dim_ == 0) dim_ = static_cast<int>(vec.size());
    if (static_cast<int>(vec.size()) != dim_ || vec.empty())
        throw std::invalid_argument("embedding '" + key + "' has dim " +
                                    std::to_string(vec.size()) + ", store dim is " +
                                    std::to_string(dim_));
    if (!records_.emplace(key, std::move(vec)).second)
        throw std::invalid_argument("duplicate embedding key: " + key);
}

const Embedding& EmbeddingStore::get(const std::string& key) const {
    const auto it = records_.find(key);
    if (it == records_.end()) throw std::runtime_error("embedding key not found: " + key);
    return it->second;
}

const Embedding* EmbeddingStore::find(const std::string& key) const {
    const auto it = records_.find(key);
    return it == records_.end() ? nullptr : &it->second;
}

void store_write(const EmbeddingStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open embedding store for writing: " + path);
    out.write(kMagic, 4);
    put_u32(out, static_cast<std::uint32_t>(store.dim()));
    put_u32(out, static_cast<std::uint32_t>(store.size()));
    for (const auto& [key, vec] : store.records()) {
        if (key.size() > 0xffff)
            throw std::runtime_error("embedding key exceeds 65535 bytes: " + key);
        put_u16(out, static_cast<std::uint16_t>(key.size()));
        out.write(key.data(), static_cast<std::streamsize>(key.size()));
        out.write(reinterpret_cast<const char*>(vec.data()),
                  static_cast<std::streamsize>(sizeof(float) * vec.size()));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

EmbeddingStore store_read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open embedding store: " + path);
    char head[4] = {};
    in.read(head, 4);
    in.seekg(0);
    if (in.gcount() == 4 && std::memcmp(head, kMagic, 4) == 0) return read_binary(in, path);
    in.close();
    return read_csv(path);
}

}  // namespace distaudit
