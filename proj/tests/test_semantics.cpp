#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "semnav/error.hpp"
#include "semnav/semantics.hpp"

using namespace semnav;
namespace fs = std::filesystem;

namespace {

Corpus small_corpus() {
    return make_corpus({{"a", "red", "sink"},
                        {"the", "blue", "bed", "near", "lamp"},
                        {"a", "white", "stove"},
                        {"the", "red", "lamp"},
                        {"a", "blue", "sink", "beside", "stove"}});
}

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("semnav_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Annotation ann(double conf, Box box, std::vector<std::string> tokens) { return {box, conf, std::move(tokens)}; }

}  // namespace

TEST(Corpus, VocabularyIsSortedAndUnique) {
    const Corpus c = small_corpus();
    EXPECT_TRUE(std::is_sorted(c.vocabulary.begin(), c.vocabulary.end()));
    EXPECT_EQ(std::adjacent_find(c.vocabulary.begin(), c.vocabulary.end()), c.vocabulary.end());
    EXPECT_EQ(c.vocabulary.size(), 11U);
}

TEST(Corpus, BuiltFromScenesIsNonEmpty) {
    std::vector<SceneSpec> scenes = {generate_scene(1, SceneType::Bathroom, 8, 8),
                                     generate_scene(2, SceneType::Kitchen, 8, 8)};
    const Corpus c = build_corpus(scenes);
    EXPECT_FALSE(c.sentences.empty());
    EXPECT_FALSE(c.vocabulary.empty());
    EXPECT_THROW(train_autoencoder(make_corpus({})), ContractError);
}

TEST(Autoencoder, LossNeverIncreasesAndDrops) {
    AutoencoderOptions opt;
    opt.code_dim = 8;
    opt.hidden = 16;
    opt.epochs = 60;
    opt.lr = 0.5;
    const Corpus c = small_corpus();
    const SentenceEncoder enc = train_autoencoder(c, opt);
    const auto& h = enc.loss_history();
    ASSERT_EQ(h.size(), 61U);
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1]);
    EXPECT_LT(h.back(), h.front());
    EXPECT_NEAR(enc.loss(c), h.back(), 1e-9);
}

TEST(Autoencoder, DeterministicAndBoundedCodes) {
    AutoencoderOptions opt;
    opt.code_dim = 8;
    opt.hidden = 16;
    opt.epochs = 10;
    const Corpus c = small_corpus();
    const SentenceEncoder a = train_autoencoder(c, opt);
    const SentenceEncoder b = train_autoencoder(c, opt);
    EXPECT_TRUE(a == b);
    for (const auto& s : c.sentences) {
        const Eigen::VectorXd code = a.encode(s);
        ASSERT_EQ(code.size(), 8);
        EXPECT_LE(code.cwiseAbs().maxCoeff(), 1.0);
        EXPECT_EQ(code, encode_sentence(b, s));
    }
}

TEST(Autoencoder, NonFiniteLossNamesLearningRate) {
    AutoencoderOptions opt;
    opt.code_dim = 4;
    opt.hidden = 8;
    opt.epochs = 3;
    opt.lr = std::numeric_limits<double>::infinity();
    try {
        train_autoencoder(small_corpus(), opt);
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("lr"), std::string::npos);
    }
}

TEST(Autoencoder, OutOfVocabularyTokensAreDropped) {
    AutoencoderOptions opt;
    opt.code_dim = 4;
    opt.hidden = 8;
    opt.epochs = 1;
    const SentenceEncoder enc = train_autoencoder(small_corpus(), opt);
    const std::vector<std::string> with_oov = {"a", "red", "sink", "zebra"};
    const std::vector<std::string> without = {"a", "red", "sink"};
    EXPECT_EQ(enc.bag(with_oov), enc.bag(without));
    EXPECT_EQ(enc.bag(without).sum(), 3.0);
}

TEST(Autoencoder, CheckpointRoundTrip) {
    AutoencoderOptions opt;
    opt.code_dim = 6;
    opt.hidden = 10;
    opt.epochs = 5;
    const SentenceEncoder enc = train_autoencoder(small_corpus(), opt);
    const fs::path dir = temp_dir("encoder");
    enc.save(dir / "enc.bin");
    write_vocabulary(enc.vocabulary(), dir / "vocab.txt");
    const SentenceEncoder back = SentenceEncoder::load(dir / "enc.bin", dir / "vocab.txt");
    EXPECT_EQ(back.code_dim(), 6);
    EXPECT_EQ(back.encode(small_corpus().sentences[1]), enc.encode(small_corpus().sentences[1]));

    // Truncation is an IO failure.
    const auto size = fs::file_size(dir / "enc.bin");
    fs::resize_file(dir / "enc.bin", size / 2);
    EXPECT_THROW(SentenceEncoder::load(dir / "enc.bin", dir / "vocab.txt"), IoError);
    EXPECT_THROW(SentenceEncoder::load(dir / "missing.bin", dir / "vocab.txt"), IoError);
}

TEST(Ranking, ConfidenceThenAreaThenInputOrder) {
    const std::vector<Annotation> list = {
        ann(0.5, {0, 0, 0.1, 0.1}, {"a"}),
        ann(0.9, {0, 0, 0.2, 0.2}, {"b"}),
        ann(0.5, {0, 0, 0.5, 0.5}, {"c"}),
        ann(0.5, {0, 0, 0.1, 0.1}, {"d"}),
    };
    EXPECT_EQ(rank_annotations(list), (std::vector<std::size_t>{1, 2, 0, 3}));
}

TEST(FrameSemantics, LayoutAndZeroPadding) {
    AutoencoderOptions opt;
    opt.code_dim = 4;
    opt.hidden = 8;
    opt.epochs = 2;
    const SentenceEncoder enc = train_autoencoder(small_corpus(), opt);
    const std::vector<Annotation> list = {ann(0.3, {0.1, 0.2, 0.3, 0.4}, {"a", "red", "sink"}),
                                          ann(0.8, {0.5, 0.5, 0.9, 0.9}, {"the", "red", "lamp"})};
    const Eigen::VectorXd v = frame_semantics(list, enc);
    ASSERT_EQ(static_cast<std::size_t>(v.size()), frame_semantics_size(4));
    const int slot = 9;
    // Slot 0 holds the higher-confidence annotation.
    EXPECT_EQ(v.segment(0, 4), enc.encode(list[1].tokens));
    EXPECT_DOUBLE_EQ(v(4), 0.5);
    EXPECT_DOUBLE_EQ(v(7), 0.9);
    EXPECT_DOUBLE_EQ(v(8), 0.8);
    EXPECT_EQ(v.segment(slot, 4), enc.encode(list[0].tokens));
    EXPECT_DOUBLE_EQ(v(slot + 8), 0.3);
    EXPECT_TRUE(v.segment(2 * slot, 3 * slot).isZero());
    EXPECT_TRUE(frame_semantics(std::vector<Annotation>{}, enc).isZero());
}

TEST(FrameSemantics, DefaultWidthIs345) {
    EXPECT_EQ(frame_semantics_size(64), 345U);
}

TEST(Vocabulary, FileRoundTrip) {
    const fs::path dir = temp_dir("vocab");
    const std::vector<std::string> words = {"a", "bed", "red"};
    write_vocabulary(words, dir / "v.txt");
    EXPECT_EQ(read_vocabulary(dir / "v.txt"), words);
}
