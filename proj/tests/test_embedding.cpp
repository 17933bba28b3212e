#include <doctest.h>

#include <cmath>

#include "distaudit/embedding.hpp"
#include "distaudit/embedding_store.hpp"
#include "test_util.hpp"

using namespace distaudit;

namespace {

double norm_of(const Embedding& v) {
    double s = 0.0;
    for (float x : v) s += static_cast<double>(x) * x;
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("toy_embed determinism and unit norm") {
    const Image img = testutil::random_image(40, 30, 3, 61);
    const Embedding a = toy_embed(img);
    const Embedding b = toy_embed(img);
    CHECK(a == b);  // bitwise
    CHECK(static_cast<int>(a.size()) == kToyEmbedDim);
    CHECK(norm_of(a) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("constant image embeds as the normalized block part") {
    const Image c = make_image(50, 50, 1, 90);
    const Embedding raw = toy_raw_features(c);
    for (int i = 144; i < kToyEmbedDim; ++i) CHECK(raw[static_cast<std::size_t>(i)] == 0.0f);
    for (int i = 0; i < 144; ++i) CHECK(raw[static_cast<std::size_t>(i)] == doctest::Approx(90.0));

    // with a zero histogram the final vector is the block part normalized:
    // 144 equal entries of 1/12
    const Embedding v = toy_embed(c);
    for (int i = 0; i < 144; ++i)
        CHECK(v[static_cast<std::size_t>(i)] == doctest::Approx(1.0 / 12.0).epsilon(1e-6));
    for (int i = 144; i < kToyEmbedDim; ++i) CHECK(v[static_cast<std::size_t>(i)] == 0.0f);
}

TEST_CASE("all-black image falls back to the first basis vector") {
    const Image black = make_image(20, 20, 1, 0);
    bool zero_norm = false;
    const Embedding v = toy_embed(black, &zero_norm);
    CHECK(zero_norm);
    CHECK(v[0] == 1.0f);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] == 0.0f);
}

TEST_CASE("histogram features ignore a constant brightness offset") {
    Image img = testutil::random_image(32, 32, 1, 62);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(p % 200);  // headroom, no clipping
    Image brighter = img;
    for (auto& p : brighter.pixels) p = static_cast<std::uint8_t>(p + 10);

    const Embedding a = toy_raw_features(img);
    const Embedding b = toy_raw_features(brighter);
    for (int i = 144; i < kToyEmbedDim; ++i)
        CHECK(a[static_cast<std::size_t>(i)] == b[static_cast<std::size_t>(i)]);
    // while the block means shift by exactly the offset
    for (int i = 0; i < 144; ++i)
        CHECK(b[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)] ==
              doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("ToyProvider satisfies the provider contract") {
    const ToyProvider provider;
    const EmbeddingProvider& iface = provider;
    CHECK(iface.dim() == kToyEmbedDim);
    const Image a = testutil::random_image(24, 24, 1, 68);
    const Image b = testutil::random_image(24, 24, 3, 69);
    CHECK(iface.embed(a) == toy_embed(a));
    CHECK(static_cast<int>(iface.embed(b).size()) == iface.dim());
    CHECK(iface.embed(a) == iface.embed(a));  // deterministic
}

TEST_CASE("cosine similarity basics") {
    CHECK(cosine_similarity({1, 0}, {1, 0}) == doctest::Approx(1.0));
    const Embedding v = toy_embed(testutil::random_image(16, 16, 1, 63));
    CHECK(cosine_similarity(v, v) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(cosine_similarity({1, 0}, {0, 1}) == doctest::Approx(0.0));
    CHECK(cosine_similarity({1, 0}, {1, 1}) == doctest::Approx(0.70710678).epsilon(1e-6));
    CHECK_THROWS(cosine_similarity({1, 0}, {1, 0, 0}));
    CHECK_THROWS(cosine_similarity({0, 0}, {1, 0}));
}

TEST_CASE("cosine similarity is symmetric and scale invariant") {
    SeqRng rng(991);
    for (int trial = 0; trial < 25; ++trial) {
        Embedding a(12), b(12);
        for (int i = 0; i < 12; ++i) {
            a[static_cast<std::size_t>(i)] = static_cast<float>(rng.unit() * 2.0 - 1.0);
            b[static_cast<std::size_t>(i)] = static_cast<float>(rng.unit() * 2.0 - 1.0);
        }
        const double c = static_cast<double>(1e-3 + 10.0 * rng.unit());
        Embedding ca = a;
        for (auto& x : ca) x = static_cast<float>(x * c);
        CHECK(cosine_similarity(a, b) == doctest::Approx(cosine_similarity(b, a)).epsilon(1e-6));
        CHECK(cosine_similarity(ca, b) == doctest::Approx(cosine_similarity(a, b)).epsilon(1e-6));
    }
}

TEST_CASE("embedding store binary round-trip") {
    EmbeddingStore store(4);
    SeqRng rng(992);
    for (int r = 0; r < 10; ++r) {
        Embedding v(4);
        for (auto& x : v) x = static_cast<float>(rng.unit() * 7.0 - 3.0);
        store.insert("key_" + std::to_string(r), v);
    }
    store.insert("with|pipe and, comma", Embedding{1.f, 2.f, 3.f, 4.f});
    const auto path = (testutil::scratch_dir() / "store.emb").string();
    store_write(store, path);
    const EmbeddingStore back = store_read(path);
    CHECK(back == store);
    CHECK(back.dim() == 4);
    CHECK(back.get("key_3") == store.get("key_3"));
}

TEST_CASE("embedding store rejects bad inserts") {
    EmbeddingStore store(3);
    store.insert("a", Embedding{1.f, 2.f, 3.f});
    CHECK_THROWS_WITH_AS(store.insert("a", Embedding{1.f, 2.f, 3.f}),
                         doctest::Contains("duplicate"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(store.insert("b", Embedding{1.f, 2.f}), doctest::Contains("dim"),
                         std::invalid_argument);
    CHECK_THROWS(store.get("missing"));
    CHECK(store.find("missing") == nullptr);
}

TEST_CASE("embedding store file error cases") {
    const auto bad_magic = (testutil::scratch_dir() / "bad.emb").string();
    testutil::write_file(bad_magic, std::string("XXXX") + std::string(64, '\0'));
    CHECK_THROWS_WITH_AS(store_read(bad_magic), doctest::Contains("header"), std::runtime_error);

    EmbeddingStore store(2);
    store.insert("k", Embedding{1.f, 2.f});
    const auto path = (testutil::scratch_dir() / "trunc.emb").string();
    store_write(store, path);
    auto bytes = testutil::read_file(path);
    bytes.resize(bytes.size() - 3);
    testutil::write_file(path, bytes);
    CHECK_THROWS_WITH_AS(store_read(path), doctest::Contains("truncated"), std::runtime_error);
}

TEST_CASE("embedding store CSV form loads to the same records") {
    const auto path = (testutil::scratch_dir() / "store.csv").string();
    testutil::write_file(path,
                         "key,v0,v1,v2\n"
                         "alpha,1.5,-2,0.25\n"
                         "beta,0,1,2\n");
    const EmbeddingStore store = store_read(path);
    CHECK(store.dim() == 3);
    CHECK(store.size() == 2);
    CHECK(store.get("alpha") == Embedding{1.5f, -2.f, 0.25f});

    const auto dup = (testutil::scratch_dir() / "dup.csv").string();
    testutil::write_file(dup, "key,v0\nx,1\nx,2\n");
    CHECK_THROWS_WITH_AS(store_read(dup), doctest::Contains("duplicate"), std::invalid_argument);

    const auto bad = (testutil::scratch_dir() / "badfloat.csv").string();
    testutil::write_file(bad, "key,v0\nx,notanumber\n");
    CHECK_THROWS(store_read(bad));
}
