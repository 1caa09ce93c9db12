#include "parley/human/stores.hpp"
#include "parley/human/worlds.hpp"
#include "parley/tasks/parsers.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

namespace parley::human {
namespace {

using Replies = std::vector<std::string>;

std::size_t count_lines(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) n += !line.empty();
    return n;
}

TEST(QACollector, StoresOnePair)
{
    testing::TempDir dir;
    QAStore store(dir.path());
    auto human = std::make_shared<ScriptedAgent>("human-1", Replies{"Q?", "A"});
    QACollectorWorld world(human, {"Sam went to the kitchen."}, store);
    world.parley();
    EXPECT_FALSE(world.episode_done());
    world.parley();
    EXPECT_TRUE(world.episode_done());
    EXPECT_TRUE(world.epoch_done());
    ASSERT_EQ(store.size(), 1u);
    const auto rec = store.records().front();
    EXPECT_EQ(rec.question, "Q?");
    EXPECT_EQ(rec.answer, "A");
    EXPECT_EQ(rec.context, "Sam went to the kitchen.");
    EXPECT_EQ(rec.collector_session, "human-1");
    EXPECT_FALSE(rec.timestamp.empty());

    ASSERT_GE(human->observed().size(), 3u);
    EXPECT_NE(human->observed()[0].text->find("Sam went to the kitchen."), std::string::npos);
    EXPECT_NE(human->observed()[1].text->find("Q?"), std::string::npos);
    EXPECT_TRUE(human->observed()[2].episode_done);
}

TEST(QACollector, EmptyAnswerRepromptsWithoutRecord)
{
    testing::TempDir dir;
    QAStore store(dir.path());
    auto human = std::make_shared<ScriptedAgent>("h", Replies{"Q?", "   ", "A"});
    QACollectorWorld world(human, {"ctx"}, store);
    world.parley();
    world.parley();
    EXPECT_EQ(store.size(), 0u);
    EXPECT_FALSE(world.episode_done());
    world.parley();
    EXPECT_NE(world.display().find("empty"), std::string::npos);
    EXPECT_EQ(store.size(), 1u);
    EXPECT_EQ(store.records().front().answer, "A");
}

TEST(QACollector, NEpisodesGiveNRecordsAndReingest)
{
    testing::TempDir dir;
    QAStore store(dir.path());
    Replies replies;
    for (int i = 0; i < 3; ++i) {
        replies.push_back("question " + std::to_string(i) + "?");
        replies.push_back("answer\t" + std::to_string(i));
    }
    auto human = std::make_shared<ScriptedAgent>("h", replies);
    QACollectorWorld world(human, {"first paragraph\nwith two lines", "second paragraph"}, store, 3);
    while (!world.epoch_done()) world.parley();
    EXPECT_EQ(store.size(), 3u);
    EXPECT_EQ(count_lines(store.jsonl_path()), 3u);
    EXPECT_EQ(store.records()[1].context, "second paragraph");

    std::ifstream in(store.fbdialog_path());
    const auto eps = tasks::parse_fbdialog(in, "collected");
    ASSERT_EQ(eps.size(), 3u);
    for (std::size_t i = 0; i < eps.size(); ++i) {
        ASSERT_EQ(eps[i].turns.size(), 1u);
        const auto rec = store.records()[i];
        EXPECT_EQ(eps[i].turns[0].text, rec.context + "\n" + rec.question);
        EXPECT_EQ(eps[i].turns[0].labels, std::vector<std::string>{rec.answer});
    }
}

TEST(QAStore, RejectsBlankFields)
{
    testing::TempDir dir;
    QAStore store(dir.path());
    EXPECT_THROW(store.append({"c", "", "a", "s", "t"}), std::invalid_argument);
    EXPECT_THROW(store.append({"c", "q", " ", "s", "t"}), std::invalid_argument);
    EXPECT_EQ(store.size(), 0u);
}

std::shared_ptr<Teacher> fbdialog_valid() { return testing::fixture_teacher("fbdialog_fixture", "valid"); }

TEST(ModelEvaluator, FourFives)
{
    testing::TempDir dir;
    RatingStore store(dir.path());
    auto rater = std::make_shared<ScriptedAgent>("rater", Replies(4, "5"));
    auto teacher = testing::fixture_teacher("babi", "train", 3);
    ModelEvaluatorWorld world(std::shared_ptr<Teacher>(std::move(teacher)), std::make_shared<RepeatLabelAgent>(),
                              rater, store, "babi", 4);
    while (!world.epoch_done()) world.parley();
    EXPECT_EQ(store.size(), 4u);
    EXPECT_DOUBLE_EQ(store.mean(), 5.0);
    EXPECT_DOUBLE_EQ(store.stddev(), 0.0);
    EXPECT_EQ(count_lines(store.jsonl_path()), 4u);
}

TEST(ModelEvaluator, OutOfRangeRatingReprompts)
{
    testing::TempDir dir;
    RatingStore store(dir.path());
    auto rater = std::make_shared<ScriptedAgent>("rater", Replies{"7", "great", "4.5", "3"});
    ModelEvaluatorWorld world(fbdialog_valid(), std::make_shared<RepeatLabelAgent>(), rater, store,
                              "fbdialog_fixture", 1);
    int reprompts = 0;
    while (!world.epoch_done()) {
        world.parley();
        if (world.display().find("whole number") != std::string::npos) ++reprompts;
    }
    EXPECT_EQ(reprompts, 3);
    EXPECT_EQ(store.ratings(), std::vector<int>{3});
}

TEST(ModelEvaluator, TranscriptIsWhatRaterSaw)
{
    testing::TempDir dir;
    RatingStore store(dir.path());
    auto rater = std::make_shared<ScriptedAgent>("rater", Replies{"4"});
    ModelEvaluatorWorld world(fbdialog_valid(), std::make_shared<RepeatLabelAgent>(), rater, store,
                              "fbdialog_fixture", 1);
    std::vector<std::string> displays;
    while (!world.epoch_done()) {
        world.parley();
        displays.push_back(world.display());
    }
    const auto& transcript = world.transcript();
    ASSERT_FALSE(transcript.empty());
    std::vector<Message> seen;
    for (const auto& m : rater->observed()) {
        if (m.id != std::string(kEvaluatorId)) seen.push_back(m);
    }
    EXPECT_EQ(seen, transcript);
    // display of each dialog step renders exactly those messages
    EXPECT_EQ(displays.front(), render_messages({transcript[0], transcript[1]}, transcript[0].episode_done));

    std::ifstream in(store.jsonl_path());
    std::string line;
    std::getline(in, line);
    const auto rec = nlohmann::json::parse(line);
    EXPECT_EQ(rec["rating"], 4);
    EXPECT_EQ(rec["task"], "fbdialog_fixture");
    EXPECT_EQ(rec["transcript"].size(), transcript.size());
}

TEST(ModelEvaluator, StopsWhenOrderedDataRunsOut)
{
    testing::TempDir dir;
    RatingStore store(dir.path());
    auto rater = std::make_shared<ScriptedAgent>("rater", Replies(10, "2"));
    ModelEvaluatorWorld world(fbdialog_valid(), std::make_shared<RepeatLabelAgent>(), rater, store,
                              "fbdialog_fixture", 10);
    int steps = 0;
    while (!world.epoch_done() && steps < 100) {
        world.parley();
        ++steps;
    }
    EXPECT_TRUE(world.epoch_done());
    EXPECT_EQ(store.size(), 2u);
}

TEST(RatingStore, Statistics)
{
    testing::TempDir dir;
    RatingStore store(dir.path());
    Message m;
    m.text = "x";
    for (int r : {1, 2, 3, 4, 5}) store.append({"t", {m}, r, "s"});
    EXPECT_DOUBLE_EQ(store.mean(), 3.0);
    EXPECT_NEAR(store.stddev(), std::sqrt(2.0), 1e-12);
    EXPECT_THROW(store.append({"t", {m}, 0, "s"}), std::invalid_argument);
    EXPECT_THROW(store.append({"t", {m}, 6, "s"}), std::invalid_argument);
    EXPECT_THROW(store.append({"t", {}, 3, "s"}), std::invalid_argument);
    EXPECT_EQ(store.size(), 5u);
}

TEST(ParseRating, Forms)
{
    EXPECT_EQ(parse_rating(" 3 "), 3);
    EXPECT_EQ(parse_rating("5"), 5);
    EXPECT_FALSE(parse_rating("0"));
    EXPECT_FALSE(parse_rating("7"));
    EXPECT_FALSE(parse_rating("3.0"));
    EXPECT_FALSE(parse_rating("three"));
    EXPECT_FALSE(parse_rating(""));
}

}  // namespace
}  // namespace parley::human
