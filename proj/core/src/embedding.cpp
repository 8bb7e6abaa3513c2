#include "tdost/embedding.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "tdost/error.hpp"

namespace tdost {

namespace {

constexpr std::array<char, 4> kMagic{'T', 'D', 'E', 'M'};

std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

template <typename T>
void put_le(std::ostream& out, T v) {
    std::array<char, sizeof(T)> b{};
    for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b.data(), b.size());
}

template <typename T>
T get_le(std::istream& in) {
    std::array<unsigned char, sizeof(T)> b{};
    in.read(reinterpret_cast<char*>(b.data()), b.size());
    if (!in) throw EmbeddingError("embedding matrix: truncated header");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b[i]) << (8 * i);
    return v;
}

}  // namespace

void EmbeddingSpec::validate() const {
    if (dimension < 8) throw ConfigError("embedding dimension must be at least 8");
}

std::string_view provider_name(EmbeddingProvider p) { return p == EmbeddingProvider::Hash ? "hash" : "external"; }

EmbeddingProvider parse_provider(std::string_view name) {
    if (name == "hash") return EmbeddingProvider::Hash;
    if (name == "external") return EmbeddingProvider::External;
    throw ConfigError("unknown embedding provider '" + std::string(name) + "' (hash|external)");
}

std::uint64_t hash64(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = 0xCBF29CE484222325ULL ^ mix(seed);
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return mix(h);
}

std::vector<double> embed_hash(std::string_view sentence, std::size_t dimension, std::uint64_t seed) {
    if (dimension < 8) throw std::invalid_argument("embed_hash: dimension must be at least 8");
    std::vector<double> v(dimension, 0.0);
    std::size_t tokens = 0;
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        const auto h = hash64(token, seed);
        v[h % dimension] += (h >> 63) ? -1.0 : 1.0;
        ++tokens;
        token.clear();
    };
    for (char c : sentence) {
        if (std::isspace(static_cast<unsigned char>(c)))
            flush();
        else
            token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    flush();
    if (tokens == 0) throw EmbeddingError("embed_hash: sentence has no tokens");

    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm == 0.0) {
        // Every bucket cancelled out; fall back to a single whole-sentence feature.
        v[hash64(sentence, seed) % dimension] = 1.0;
        return v;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {
    if (dimension < 8) throw std::invalid_argument("HashEmbedder: dimension must be at least 8");
}

void HashEmbedder::embed(std::string_view sentence, std::span<float> out) const {
    const auto v = embed_hash(sentence, dimension_, seed_);
    for (std::size_t i = 0; i < dimension_; ++i) out[i] = static_cast<float>(v[i]);
}

void write_matrix(std::ostream& out, const EmbeddingMatrix& m) {
    if (m.values.size() != m.rows * m.dimension) throw std::invalid_argument("write_matrix: shape mismatch");
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, m.dimension);
    put_le<std::uint64_t>(out, m.rows);
    for (float f : m.values) {
        std::uint32_t bits = 0;
        std::memcpy(&bits, &f, sizeof bits);
        put_le<std::uint32_t>(out, bits);
    }
}

EmbeddingMatrix read_matrix(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw EmbeddingError("embedding matrix: bad magic number");
    EmbeddingMatrix m;
    m.dimension = get_le<std::uint32_t>(in);
    m.rows = get_le<std::uint64_t>(in);
    if (m.dimension == 0) throw EmbeddingError("embedding matrix: zero dimension");
    m.values.resize(m.rows * m.dimension);
    for (auto& f : m.values) {
        std::uint32_t bits = 0;
        try {
            bits = get_le<std::uint32_t>(in);
        } catch (const EmbeddingError&) {
            throw EmbeddingError("embedding matrix: truncated body");
        }
        std::memcpy(&f, &bits, sizeof f);
    }
    return m;
}

std::vector<std::string> unique_sentences(std::span<const TdostWindow> windows) {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& w : windows)
        for (const auto& t : w.triggers)
            for (const auto& s : t.sentences)
                if (seen.insert(s).second) out.push_back(s);
    return out;
}

void write_sentences_jsonl(std::ostream& out, std::span<const std::string> sentences) {
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        nlohmann::ordered_json rec;
        rec["row"] = i;
        rec["text"] = sentences[i];
        out << rec.dump() << '\n';
    }
}

std::vector<std::string> read_sentences_jsonl(std::istream& in) {
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto rec = nlohmann::json::parse(line);
            if (rec.at("row").get<std::size_t>() != out.size())
                throw EmbeddingError("sentences file: rows must be numbered consecutively");
            out.push_back(rec.at("text").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw EmbeddingError(std::string("sentences file: ") + e.what());
        }
    }
    return out;
}

MatrixFileEmbedder::MatrixFileEmbedder(std::vector<std::string> sentences, EmbeddingMatrix matrix)
    : matrix_(std::move(matrix)) {
    if (sentences.size() != matrix_.rows)
        throw EmbeddingError("embedding matrix has " + std::to_string(matrix_.rows) + " rows for " +
                             std::to_string(sentences.size()) + " sentences");
    for (std::size_t i = 0; i < sentences.size(); ++i) row_of_.emplace(std::move(sentences[i]), i);
}

void MatrixFileEmbedder::embed(std::string_view sentence, std::span<float> out) const {
    auto it = row_of_.find(std::string(sentence));
    if (it == row_of_.end()) throw EmbeddingError("no external embedding for sentence '" + std::string(sentence) + "'");
    const auto* row = matrix_.values.data() + it->second * matrix_.dimension;
    std::copy(row, row + matrix_.dimension, out.begin());
}

std::vector<EmbeddedWindow> embed_windows(std::span<const TdostWindow> windows, const SentenceEmbedder& embedder,
                                          const EmbeddingSpec& spec) {
    spec.validate();
    if (embedder.dimension() != spec.dimension)
        throw EmbeddingError("embedding dimension mismatch: provider gives " + std::to_string(embedder.dimension()) +
                             ", spec requires " + std::to_string(spec.dimension));
    std::vector<EmbeddedWindow> out;
    out.reserve(windows.size());
    for (const auto& w : windows) {
        EmbeddedWindow e;
        e.window_id = w.window_id;
        e.label_index = canonical_index(w.label);
        e.rows = w.triggers.size();
        e.cols = spec.dimension;
        e.matrix.resize(e.rows * e.cols);
        for (std::size_t r = 0; r < e.rows; ++r) {
            const auto& t = w.triggers[r];
            if (t.sentences.size() != 1)
                throw EmbeddingError("window " + w.window_id + " has a trigger with " +
                                     std::to_string(t.sentences.size()) + " sentences; triplicate LLM windows first");
            embedder.embed(t.sentences.front(), std::span<float>(e.matrix.data() + r * e.cols, e.cols));
        }
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace tdost
