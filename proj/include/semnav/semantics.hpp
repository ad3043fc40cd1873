#pragma once

// Sentence corpus, bag-of-tokens sentence autoencoder and per-frame
// semantic vectors (five confidence-ranked [code | box | confidence] slots).

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "semnav/featurizer.hpp"
#include "semnav/scene.hpp"

namespace semnav {

inline constexpr std::size_t kSemanticSlots = 5;

/// Width of one frame-semantics vector for a sentence code of `code_dim`.
constexpr std::size_t frame_semantics_size(std::size_t code_dim) { return kSemanticSlots * (code_dim + 5); }

using Sentence = std::vector<std::string>;

struct Corpus {
    std::vector<Sentence> sentences;
    /// Sorted, deduplicated.
    std::vector<std::string> vocabulary;
};

/// Order in which annotations fill the semantic slots: confidence
/// descending, then box area descending, then input order.
std::vector<std::size_t> rank_annotations(std::span<const Annotation> annotations);

/// Distinct captions among the top-5 annotations of every pose of every scene.
Corpus build_corpus(std::span<const SceneSpec> scenes, const FeaturizerConfig& view = {});

/// Corpus over explicit sentences (vocabulary derived from them).
Corpus make_corpus(std::vector<Sentence> sentences);

struct AutoencoderOptions {
    int code_dim = 64;
    int hidden = 128;
    int epochs = 200;
    double lr = 0.05;
    std::uint64_t seed = 1;
};

class SentenceEncoder {
public:
    SentenceEncoder(std::vector<std::string> vocabulary, int hidden, int code_dim, std::uint64_t seed);

    int code_dim() const { return static_cast<int>(enc2_w_.rows()); }
    int hidden() const { return static_cast<int>(enc1_w_.rows()); }
    const std::vector<std::string>& vocabulary() const { return vocabulary_; }

    /// Vocabulary count vector; out-of-vocabulary tokens are dropped.
    Eigen::VectorXd bag(std::span<const std::string> tokens) const;
    Eigen::VectorXd encode(std::span<const std::string> tokens) const;

    /// Mean reconstruction cross-entropy over the corpus.
    double loss(const Corpus& corpus) const;

    /// Loss after each epoch; entry 0 is the loss before training.
    const std::vector<double>& loss_history() const { return loss_history_; }

    void save(const std::filesystem::path& checkpoint) const;
    static SentenceEncoder load(const std::filesystem::path& checkpoint, const std::filesystem::path& vocabulary);

    friend SentenceEncoder train_autoencoder(const Corpus& corpus, const AutoencoderOptions& options);
    friend bool operator==(const SentenceEncoder&, const SentenceEncoder&);

private:
    struct Grads;
    double loss_and_grads(const Eigen::MatrixXd& counts, Grads* grads) const;
    Eigen::MatrixXd bag_matrix(const Corpus& corpus) const;

    std::vector<std::string> vocabulary_;
    std::unordered_map<std::string, Eigen::Index> index_;
    Eigen::MatrixXd enc1_w_;  // hidden x V
    Eigen::VectorXd enc1_b_;
    Eigen::MatrixXd enc2_w_;  // code x hidden
    Eigen::VectorXd enc2_b_;
    Eigen::MatrixXd dec1_w_;  // hidden x code
    Eigen::VectorXd dec1_b_;
    Eigen::MatrixXd dec2_w_;  // V x hidden
    Eigen::VectorXd dec2_b_;
    std::vector<double> loss_history_;
};

/// Full-batch gradient descent on reconstruction cross-entropy. A step that
/// would increase the loss is rejected and the learning rate halved, so the
/// recorded loss never increases. Throws NumericError when the loss becomes
/// non-finite.
SentenceEncoder train_autoencoder(const Corpus& corpus, const AutoencoderOptions& options = {});

Eigen::VectorXd encode_sentence(const SentenceEncoder& encoder, std::span<const std::string> tokens);

/// Semantic vector of one frame, length frame_semantics_size(code_dim).
Eigen::VectorXd frame_semantics(std::span<const Annotation> annotations, const SentenceEncoder& encoder);

void write_vocabulary(const std::vector<std::string>& vocabulary, const std::filesystem::path& path);
std::vector<std::string> read_vocabulary(const std::filesystem::path& path);

}  // namespace semnav
