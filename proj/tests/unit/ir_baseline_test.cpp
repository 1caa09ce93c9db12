#include "parley/ir_baseline.hpp"
#include "parley/world.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace parley {
namespace {

using Labels = std::vector<std::string>;

TEST(TermStats, IngestCountsDistinctTokens)
{
    TermStats s;
    s.ingest("x y y");
    s.ingest("x y y the");
    EXPECT_EQ(s.doc_count(), 2u);
    EXPECT_EQ(s.doc_freq("x"), 2u);
    EXPECT_EQ(s.doc_freq("y"), 2u);
    EXPECT_EQ(s.doc_freq("the"), 0u);
    s.ingest("");
    EXPECT_EQ(s.doc_count(), 3u);
    EXPECT_EQ(s.doc_freqs().size(), 2u);
}

TEST(TermStats, MatchesBruteForceOnFixtureDocs)
{
    auto teacher = testing::fixture_teacher("fbdialog_fixture", "train:ordered");
    std::vector<std::string> docs;
    TermStats s;
    for (int i = 0; i < 3; ++i) {
        docs.push_back(*teacher->act().text);
        s.ingest(docs.back());
    }
    std::map<std::string, std::uint64_t> brute;
    for (const auto& d : docs) {
        std::set<std::string> seen;
        std::istringstream words(normalize_answer(d));
        for (std::string w; words >> w;) seen.insert(w);
        for (const auto& w : seen) ++brute[w];
    }
    EXPECT_EQ(s.doc_count(), 3u);
    EXPECT_EQ(s.doc_freqs(), brute);
}

TEST(TermStats, SaveLoadRoundTripAndFormat)
{
    TermStats s;
    s.ingest("the milk is in the kitchen");
    s.ingest("kitchen");
    std::ostringstream out;
    s.save(out);
    EXPECT_EQ(out.str(), "doc_count\t2\nin\t1\nis\t1\nkitchen\t2\nmilk\t1\n");
    std::istringstream in(out.str());
    EXPECT_EQ(TermStats::load(in), s);
}

TEST(Score, FormulaByHand)
{
    TermStats s;
    s.ingest("x");
    EXPECT_NEAR(score("x", "x", s), std::pow(std::log(1.5), 2), 1e-12);
    EXPECT_NEAR(score("x", "x", s), 0.16440, 1e-4);
    EXPECT_DOUBLE_EQ(score("x", "y", s), 0.0);
}

TEST(Score, RareTokenBeatsCommonToken)
{
    TermStats s;
    for (int i = 0; i < 100; ++i) s.ingest(i == 0 ? "rare common" : i < 90 ? "common" : "filler");
    ASSERT_EQ(s.doc_freq("rare"), 1u);
    ASSERT_EQ(s.doc_freq("common"), 90u);
    const double rare = std::pow(std::log(1.0 + 100.0 / 2.0), 2);
    const double common = std::pow(std::log(1.0 + 100.0 / 91.0), 2);
    EXPECT_NEAR(score("rare common", "rare", s), rare, 1e-12);
    EXPECT_NEAR(score("rare common", "common", s), common, 1e-12);
    EXPECT_GT(rare, common);
}

TEST(Score, AddingSharedTokenNeverDecreases)
{
    TermStats s;
    s.ingest("a b c");
    s.ingest("a d");
    const double base = score("a b c d", "a", s);
    EXPECT_GE(score("a b c d", "a b", s), base);
    EXPECT_GE(score("a b c d", "a b d", s), score("a b c d", "a b", s));
}

TEST(Rank, TieBreakAndDuplicates)
{
    TermStats s;
    s.ingest("nothing shared");
    EXPECT_EQ(rank_candidates("query", {"zeta", "alpha", "mid", "alpha"}, s), (Labels{"alpha", "mid", "zeta"}));
}

TEST(IrAgent, PicksKitchenForMilkStory)
{
    auto teacher = testing::fixture_teacher("fbdialog_fixture", "train:ordered");
    const Message first = teacher->act();
    ASSERT_NE(first.text->find("milk"), std::string::npos);
    ASSERT_NE(first.text->find("kitchen"), std::string::npos);
    IrBaselineAgent agent(true);
    agent.observe(first);
    teacher->observe(agent.act());
    agent.observe(teacher->act());
    agent.act();

    IrBaselineAgent eval(false, agent.stats());
    eval.observe(first);
    const Message reply = eval.act();
    EXPECT_EQ(reply.text, "kitchen");
    ASSERT_TRUE(reply.text_candidates.has_value());
    EXPECT_EQ(reply.text_candidates->front(), "kitchen");
    EXPECT_EQ(reply.text_candidates->size(), 3u);

    // Independent check with the formula: only "kitchen" shares a token.
    const TermStats st = agent.stats();
    auto idf = [&](const std::string& w) {
        return std::log(1.0 + double(st.doc_count()) / (1.0 + double(st.doc_freq(w))));
    };
    EXPECT_NEAR(score(*first.text, "kitchen", st), std::pow(idf("kitchen"), 2), 1e-12);
    EXPECT_DOUBLE_EQ(score(*first.text, "bathroom", st), 0.0);
}

TEST(IrAgent, AllZeroScoresReturnSmallest)
{
    IrBaselineAgent agent(false);
    Message m;
    m.text = "completely unrelated words";
    m.label_candidates = Labels{"pear", "banana", "cherry"};
    agent.observe(m);
    EXPECT_EQ(agent.act().text, "banana");
}

TEST(IrAgent, SingleCandidateAndFallback)
{
    IrBaselineAgent agent(false);
    Message m;
    m.text = "anything";
    m.label_candidates = Labels{"only"};
    agent.observe(m);
    EXPECT_EQ(agent.act().text, "only");
    Message bare;
    bare.text = "no candidates";
    agent.observe(bare);
    EXPECT_EQ(agent.act().text, std::string(kFallbackReply));
}

TEST(IrAgent, TrainingIngestsObservedText)
{
    IrBaselineAgent agent(true);
    Message m;
    m.text = "Sam went home";
    agent.observe(m);
    agent.act();
    EXPECT_EQ(agent.stats().doc_count(), 1u);
    agent.set_training(false);
    agent.observe(m);
    agent.act();
    EXPECT_EQ(agent.stats().doc_count(), 1u);
}

TEST(IrAgent, LabelOnlyOverlapGivesPerfectAccuracy)
{
    auto eps = std::make_shared<std::vector<Episode>>();
    const std::vector<std::pair<std::string, std::string>> qa = {
        {"the apple is red", "apple"}, {"a pear fell down", "pear"}, {"grapes grow on vines", "grapes"}};
    for (const auto& [text, label] : qa) {
        eps->push_back(Episode{{Turn{text, {label}, Labels{"apple", "pear", "grapes"}, std::nullopt}}, "t"});
    }
    std::shared_ptr<Teacher> teacher = std::make_shared<DialogTeacher>("t", eps, DataMode::parse("valid"));
    TermStats s;
    for (const auto& [text, label] : qa) s.ingest(text);
    DialogPartnerWorld world(teacher, std::make_shared<IrBaselineAgent>(false, s));
    while (!world.epoch_done()) world.parley();
    EXPECT_DOUBLE_EQ(teacher->report().accuracy(), 1.0);
    EXPECT_EQ(teacher->report().examples(), 3);
}

TEST(IrAgent, BatchMatchesSingle)
{
    TermStats s;
    s.ingest("milk kitchen");
    s.ingest("hallway");
    IrBaselineAgent agent(false, s);
    std::vector<Message> obs(3);
    obs[0].text = "where is the milk in the kitchen";
    obs[0].label_candidates = Labels{"hallway", "kitchen"};
    obs[1].text = "hallway";
    obs[1].label_candidates = Labels{"hallway", "kitchen"};
    obs[2].text = "none";
    const auto batch = agent.batch_act(obs);
    ASSERT_EQ(batch.size(), 3u);
    for (std::size_t i = 0; i < obs.size(); ++i) EXPECT_EQ(batch[i], agent.respond(obs[i]));
}

}  // namespace
}  // namespace parley
