#include "semnav/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "semnav/binary_io.hpp"
#include "semnav/error.hpp"

namespace semnav {

namespace {

constexpr char kMagic[8] = {'S', 'E', 'M', 'N', 'A', 'V', '0', '1'};

void glorot(Eigen::MatrixXd& m, std::mt19937_64& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    std::uniform_real_distribution<double> dist(-a, a);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
    }
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0); }

Eigen::MatrixXd relu_mask(const Eigen::MatrixXd& m) { return (m.array() > 0.0).cast<double>().matrix(); }

}  // namespace

std::vector<std::size_t> rank_annotations(std::span<const Annotation> annotations) {
    std::vector<std::size_t> order(annotations.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Annotation& x = annotations[a];
        const Annotation& y = annotations[b];
        if (x.confidence != y.confidence) return x.confidence > y.confidence;
        return box_area(x.box) > box_area(y.box);
    });
    return order;
}

Corpus make_corpus(std::vector<Sentence> sentences) {
    Corpus corpus;
    std::set<std::string> vocab;
    for (const Sentence& s : sentences) vocab.insert(s.begin(), s.end());
    corpus.sentences = std::move(sentences);
    corpus.vocabulary.assign(vocab.begin(), vocab.end());
    return corpus;
}

Corpus build_corpus(std::span<const SceneSpec> scenes, const FeaturizerConfig& view) {
    if (scenes.empty()) throw ContractError("build_corpus: no scenes");
    std::set<Sentence> unique;
    for (const SceneSpec& scene : scenes) {
        for (const Pose& pose : scene.valid_poses()) {
            const auto annotations = annotate(scene, pose, view);
            const auto order = rank_annotations(annotations);
            for (std::size_t i = 0; i < std::min(kSemanticSlots, order.size()); ++i) {
                unique.insert(annotations[order[i]].tokens);
            }
        }
    }
    if (unique.empty()) throw ContractError("build_corpus: no annotations in any scene");
    return make_corpus({unique.begin(), unique.end()});
}

struct SentenceEncoder::Grads {
    Eigen::MatrixXd enc1_w, enc2_w, dec1_w, dec2_w;
    Eigen::VectorXd enc1_b, enc2_b, dec1_b, dec2_b;
};

SentenceEncoder::SentenceEncoder(std::vector<std::string> vocabulary, int hidden, int code_dim, std::uint64_t seed)
    : vocabulary_(std::move(vocabulary)) {
    if (code_dim < 2) throw ContractError("sentence code dimension must be >= 2");
    if (hidden < 1) throw ContractError("autoencoder hidden size must be positive");
    if (!std::is_sorted(vocabulary_.begin(), vocabulary_.end()) ||
        std::adjacent_find(vocabulary_.begin(), vocabulary_.end()) != vocabulary_.end()) {
        throw ContractError("vocabulary must be sorted and deduplicated");
    }
    for (std::size_t i = 0; i < vocabulary_.size(); ++i) index_[vocabulary_[i]] = static_cast<Eigen::Index>(i);
    const auto v = static_cast<Eigen::Index>(vocabulary_.size());
    std::mt19937_64 rng(seed);
    enc1_w_.resize(hidden, v);
    enc2_w_.resize(code_dim, hidden);
    dec1_w_.resize(hidden, code_dim);
    dec2_w_.resize(v, hidden);
    glorot(enc1_w_, rng);
    glorot(enc2_w_, rng);
    glorot(dec1_w_, rng);
    glorot(dec2_w_, rng);
    enc1_b_ = Eigen::VectorXd::Zero(hidden);
    enc2_b_ = Eigen::VectorXd::Zero(code_dim);
    dec1_b_ = Eigen::VectorXd::Zero(hidden);
    dec2_b_ = Eigen::VectorXd::Zero(v);
}

Eigen::VectorXd SentenceEncoder::bag(std::span<const std::string> tokens) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocabulary_.size()));
    for (const std::string& t : tokens) {
        if (auto it = index_.find(t); it != index_.end()) x(it->second) += 1.0;
    }
    return x;
}

Eigen::VectorXd SentenceEncoder::encode(std::span<const std::string> tokens) const {
    const Eigen::VectorXd h = (enc1_w_ * bag(tokens) + enc1_b_).cwiseMax(0.0);
    return (enc2_w_ * h + enc2_b_).array().tanh().matrix();
}

Eigen::MatrixXd SentenceEncoder::bag_matrix(const Corpus& corpus) const {
    Eigen::MatrixXd counts(static_cast<Eigen::Index>(vocabulary_.size()),
                           static_cast<Eigen::Index>(corpus.sentences.size()));
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
        counts.col(static_cast<Eigen::Index>(i)) = bag(corpus.sentences[i]);
    }
    return counts;
}

double SentenceEncoder::loss_and_grads(const Eigen::MatrixXd& counts, Grads* grads) const {
    const auto n = counts.cols();
    if (n == 0) return 0.0;
    // Reconstruction target: the normalized token distribution of each sentence.
    Eigen::RowVectorXd totals = counts.colwise().sum().cwiseMax(1.0);
    const Eigen::MatrixXd target = counts.array().rowwise() / totals.array();

    const Eigen::MatrixXd pre1 = (enc1_w_ * counts).colwise() + enc1_b_;
    const Eigen::MatrixXd h1 = relu(pre1);
    const Eigen::MatrixXd code = ((enc2_w_ * h1).colwise() + enc2_b_).array().tanh().matrix();
    const Eigen::MatrixXd pre2 = (dec1_w_ * code).colwise() + dec1_b_;
    const Eigen::MatrixXd h2 = relu(pre2);
    Eigen::MatrixXd logits = (dec2_w_ * h2).colwise() + dec2_b_;

    const Eigen::RowVectorXd max = logits.colwise().maxCoeff();
    logits.rowwise() -= max;
    const Eigen::RowVectorXd log_z = logits.array().exp().colwise().sum().log().matrix();
    const Eigen::MatrixXd log_p = logits.rowwise() - log_z;
    const double loss = -(target.array() * log_p.array()).sum() / static_cast<double>(n);
    if (grads == nullptr) return loss;

    const Eigen::MatrixXd d_logits = (log_p.array().exp() - target.array()).matrix() / static_cast<double>(n);
    grads->dec2_w = d_logits * h2.transpose();
    grads->dec2_b = d_logits.rowwise().sum();
    const Eigen::MatrixXd d_pre2 = (dec2_w_.transpose() * d_logits).cwiseProduct(relu_mask(pre2));
    grads->dec1_w = d_pre2 * code.transpose();
    grads->dec1_b = d_pre2.rowwise().sum();
    const Eigen::MatrixXd d_code_pre =
        (dec1_w_.transpose() * d_pre2).array() * (1.0 - code.array().square());
    grads->enc2_w = d_code_pre * h1.transpose();
    grads->enc2_b = d_code_pre.rowwise().sum();
    const Eigen::MatrixXd d_pre1 = (enc2_w_.transpose() * d_code_pre).cwiseProduct(relu_mask(pre1));
    grads->enc1_w = d_pre1 * counts.transpose();
    grads->enc1_b = d_pre1.rowwise().sum();
    return loss;
}

double SentenceEncoder::loss(const Corpus& corpus) const { return loss_and_grads(bag_matrix(corpus), nullptr); }

SentenceEncoder train_autoencoder(const Corpus& corpus, const AutoencoderOptions& options) {
    if (corpus.sentences.empty() || corpus.vocabulary.empty()) throw ContractError("train_autoencoder: empty corpus");
    if (options.code_dim < 2) throw ContractError("train_autoencoder: code_dim must be >= 2");
    SentenceEncoder enc(corpus.vocabulary, options.hidden, options.code_dim, options.seed);
    const Eigen::MatrixXd counts = enc.bag_matrix(corpus);
    SentenceEncoder::Grads g;
    double lr = options.lr;
    double current = enc.loss_and_grads(counts, &g);
    if (!std::isfinite(current)) throw NumericError("autoencoder loss is not finite at lr=" + std::to_string(lr));
    enc.loss_history_.push_back(current);

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        SentenceEncoder trial = enc;
        for (int halvings = 0; halvings < 40; ++halvings) {
            trial.enc1_w_ = enc.enc1_w_ - lr * g.enc1_w;
            trial.enc1_b_ = enc.enc1_b_ - lr * g.enc1_b;
            trial.enc2_w_ = enc.enc2_w_ - lr * g.enc2_w;
            trial.enc2_b_ = enc.enc2_b_ - lr * g.enc2_b;
            trial.dec1_w_ = enc.dec1_w_ - lr * g.dec1_w;
            trial.dec1_b_ = enc.dec1_b_ - lr * g.dec1_b;
            trial.dec2_w_ = enc.dec2_w_ - lr * g.dec2_w;
            trial.dec2_b_ = enc.dec2_b_ - lr * g.dec2_b;
            const double next = trial.loss_and_grads(counts, nullptr);
            if (!std::isfinite(next)) {
                throw NumericError("autoencoder diverged (non-finite loss) at lr=" + std::to_string(lr));
            }
            if (next <= current) {
                trial.loss_history_ = std::move(enc.loss_history_);
                enc = std::move(trial);
                current = enc.loss_and_grads(counts, &g);
                break;
            }
            lr *= 0.5;
        }
        enc.loss_history_.push_back(current);
    }
    return enc;
}

Eigen::VectorXd encode_sentence(const SentenceEncoder& encoder, std::span<const std::string> tokens) {
    return encoder.encode(tokens);
}

Eigen::VectorXd frame_semantics(std::span<const Annotation> annotations, const SentenceEncoder& encoder) {
    const auto code = static_cast<Eigen::Index>(encoder.code_dim());
    const Eigen::Index slot = code + 5;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kSemanticSlots) * slot);
    const auto order = rank_annotations(annotations);
    for (std::size_t i = 0; i < std::min(kSemanticSlots, order.size()); ++i) {
        const Annotation& a = annotations[order[i]];
        auto block = out.segment(static_cast<Eigen::Index>(i) * slot, slot);
        block.head(code) = encoder.encode(a.tokens);
        for (Eigen::Index b = 0; b < 4; ++b) block(code + b) = std::clamp(a.box[static_cast<std::size_t>(b)], 0.0, 1.0);
        block(code + 4) = std::clamp(a.confidence, 0.0, 1.0);
    }
    return out;
}

void SentenceEncoder::save(const std::filesystem::path& checkpoint) const {
    std::ofstream out(checkpoint, std::ios::binary);
    if (!out) throw IoError("cannot write " + checkpoint.string());
    out.write(kMagic, sizeof(kMagic));
    binio::write_u32(out, static_cast<std::uint32_t>(vocabulary_.size()));
    binio::write_u32(out, static_cast<std::uint32_t>(hidden()));
    binio::write_u32(out, static_cast<std::uint32_t>(code_dim()));
    binio::write_matrix(out, enc1_w_);
    binio::write_matrix(out, enc1_b_);
    binio::write_matrix(out, enc2_w_);
    binio::write_matrix(out, enc2_b_);
    binio::write_matrix(out, dec1_w_);
    binio::write_matrix(out, dec1_b_);
    binio::write_matrix(out, dec2_w_);
    binio::write_matrix(out, dec2_b_);
    if (!out) throw IoError("write failed: " + checkpoint.string());
}

SentenceEncoder SentenceEncoder::load(const std::filesystem::path& checkpoint,
                                      const std::filesystem::path& vocabulary) {
    std::ifstream in(checkpoint, std::ios::binary);
    if (!in) throw IoError("cannot read " + checkpoint.string());
    const std::string what = "encoder checkpoint " + checkpoint.string();
    char magic[8];
    binio::read_exact(in, magic, sizeof(magic), what);
    if (!std::equal(magic, magic + 8, kMagic)) throw IoError(what + ": bad magic");
    const auto v = binio::read_u32(in, what);
    const auto hidden = binio::read_u32(in, what);
    const auto code = binio::read_u32(in, what);
    auto vocab = read_vocabulary(vocabulary);
    if (vocab.size() != v) {
        throw IoError(what + ": vocabulary has " + std::to_string(vocab.size()) + " tokens, checkpoint expects " +
                      std::to_string(v));
    }
    SentenceEncoder enc(std::move(vocab), static_cast<int>(hidden), static_cast<int>(code), 0);
    binio::read_matrix(in, enc.enc1_w_, what);
    binio::read_matrix(in, enc.enc1_b_, what);
    binio::read_matrix(in, enc.enc2_w_, what);
    binio::read_matrix(in, enc.enc2_b_, what);
    binio::read_matrix(in, enc.dec1_w_, what);
    binio::read_matrix(in, enc.dec1_b_, what);
    binio::read_matrix(in, enc.dec2_w_, what);
    binio::read_matrix(in, enc.dec2_b_, what);
    return enc;
}

bool operator==(const SentenceEncoder& a, const SentenceEncoder& b) {
    return a.vocabulary_ == b.vocabulary_ && a.enc1_w_ == b.enc1_w_ && a.enc1_b_ == b.enc1_b_ &&
           a.enc2_w_ == b.enc2_w_ && a.enc2_b_ == b.enc2_b_ && a.dec1_w_ == b.dec1_w_ && a.dec1_b_ == b.dec1_b_ &&
           a.dec2_w_ == b.dec2_w_ && a.dec2_b_ == b.dec2_b_;
}

void write_vocabulary(const std::vector<std::string>& vocabulary, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& t : vocabulary) out << t << "\n";
}

std::vector<std::string> read_vocabulary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

}  // namespace semnav
