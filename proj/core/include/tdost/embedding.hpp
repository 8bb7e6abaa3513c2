#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tdost/windowing.hpp"

namespace tdost {

enum class EmbeddingProvider { Hash, External };

struct EmbeddingSpec {
    EmbeddingProvider provider = EmbeddingProvider::Hash;
    std::size_t dimension = 768;
    std::optional<std::string> model_name;  // ignored by the hash provider
    std::uint64_t seed = 0;                 // hash provider only

    /// Throws ConfigError when dimension < 8.
    void validate() const;
};

std::string_view provider_name(EmbeddingProvider p);
EmbeddingProvider parse_provider(std::string_view name);

/// Seeded 64-bit FNV-1a with a splitmix64 finaliser; identical on every platform.
std::uint64_t hash64(std::string_view data, std::uint64_t seed);

/// Signed feature hashing of lower-cased whitespace tokens, L2-normalised. Throws EmbeddingError
/// for a sentence without tokens and std::invalid_argument for dimension < 8.
std::vector<double> embed_hash(std::string_view sentence, std::size_t dimension, std::uint64_t seed = 0);

class SentenceEmbedder {
public:
    virtual ~SentenceEmbedder() = default;
    virtual std::size_t dimension() const = 0;
    /// Writes dimension() values into `out`.
    virtual void embed(std::string_view sentence, std::span<float> out) const = 0;
};

class HashEmbedder final : public SentenceEmbedder {
public:
    HashEmbedder(std::size_t dimension, std::uint64_t seed);
    std::size_t dimension() const override { return dimension_; }
    void embed(std::string_view sentence, std::span<float> out) const override;

private:
    std::size_t dimension_;
    std::uint64_t seed_;
};

/// Row-major float32 matrix in the handshake format: "TDEM", u32 dimension, u64 rows, then
/// rows * dimension little-endian floats.
struct EmbeddingMatrix {
    std::uint32_t dimension = 0;
    std::uint64_t rows = 0;
    std::vector<float> values;
};

void write_matrix(std::ostream& out, const EmbeddingMatrix& m);
/// Throws EmbeddingError on a bad magic number or truncated body.
EmbeddingMatrix read_matrix(std::istream& in);

/// Distinct sentences of the windows in first-appearance order; row i of the external matrix
/// embeds sentence i.
std::vector<std::string> unique_sentences(std::span<const TdostWindow> windows);
/// One {"row": i, "text": s} object per line.
void write_sentences_jsonl(std::ostream& out, std::span<const std::string> sentences);
std::vector<std::string> read_sentences_jsonl(std::istream& in);

/// Lookup table built from an external encoder's matrix file.
class MatrixFileEmbedder final : public SentenceEmbedder {
public:
    /// Throws EmbeddingError when row count and sentence count differ.
    MatrixFileEmbedder(std::vector<std::string> sentences, EmbeddingMatrix matrix);
    std::size_t dimension() const override { return matrix_.dimension; }
    /// Throws EmbeddingError for sentences the encoder never saw.
    void embed(std::string_view sentence, std::span<float> out) const override;

private:
    EmbeddingMatrix matrix_;
    std::unordered_map<std::string, std::size_t> row_of_;
};

struct EmbeddedWindow {
    std::string window_id;
    std::size_t label_index = 0;  // canonical activity index
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> matrix;  // rows * cols, row-major

    std::span<const float> row(std::size_t r) const { return {matrix.data() + r * cols, cols}; }
};

/// Order-preserving; one row per trigger (triggers must hold exactly one sentence). Throws
/// EmbeddingError when the embedder's dimension differs from spec.dimension.
std::vector<EmbeddedWindow> embed_windows(std::span<const TdostWindow> windows, const SentenceEmbedder& embedder,
                                          const EmbeddingSpec& spec);

}  // namespace tdost
