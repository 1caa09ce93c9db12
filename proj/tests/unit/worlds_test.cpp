#include "parley/errors.hpp"
#include "parley/ir_baseline.hpp"
#include "parley/world.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <atomic>

namespace parley {
namespace {

struct Counters {
    std::atomic<int> acts{0};
    std::atomic<int> observes{0};
};

class CountingAgent : public Agent {
public:
    CountingAgent(std::string id, Counters& c) : id_(std::move(id)), c_(c) {}
    const std::string& id() const override { return id_; }
    void observe(const Message&) override { ++c_.observes; }
    Message act() override
    {
        ++c_.acts;
        Message m;
        m.id = id_;
        m.text = "hello from " + id_;
        return m;
    }

private:
    std::string id_;
    Counters& c_;
};

class ThrowingAgent : public Agent {
public:
    const std::string& id() const override { return id_; }
    void observe(const Message&) override {}
    Message act() override
    {
        if (armed) throw std::runtime_error("boom");
        Message m;
        m.id = id_;
        m.text = "ok";
        return m;
    }
    bool armed = false;

private:
    std::string id_ = "thrower";
};

/// Batch learner that records calls and can misreport its batch size.
class RecordingBatchAgent : public RepeatLabelAgent {
public:
    std::vector<Message> batch_act(std::span<const Message> observations) override
    {
        ++batch_calls;
        auto out = RepeatLabelAgent::batch_act(observations);
        if (drop_one && !out.empty()) out.pop_back();
        return out;
    }
    int batch_calls = 0;
    bool drop_one = false;
};

/// Learner without the batch extension.
class PlainAgent : public Agent {
public:
    const std::string& id() const override { return id_; }
    void observe(const Message& m) override { last_ = m; }
    Message act() override
    {
        ++acts;
        return inner_.respond(last_);
    }
    int acts = 0;

private:
    std::string id_ = "plain";
    Message last_;
    RepeatLabelAgent inner_;
};

MetricsReport sequential_report(const Teacher& prototype, const std::shared_ptr<Agent>& learner)
{
    auto teacher = prototype.clone();
    std::shared_ptr<Teacher> shared(std::move(teacher));
    DialogPartnerWorld world(shared, learner);
    while (!world.epoch_done()) world.parley();
    return shared->report();
}

TEST(DialogWorld, DisplaysTeacherThenLearner)
{
    std::shared_ptr<Teacher> teacher = testing::fixture_teacher("babi:Task1k:4", "train:ordered");
    DialogPartnerWorld world(teacher, std::make_shared<RepeatLabelAgent>());
    world.parley();
    EXPECT_EQ(world.display(),
              "[babi:Task1k:4]: The office is north of the kitchen.\n"
              "The bathroom is north of the office.\n"
              "What is north of the kitchen?\n"
              "[cands: office|garden|hallway|bedroom|kitchen|bathroom]\n"
              "   [RepeatLabelAgent]: office\n"
              "- - - - - - - - - - - - - - - - - - - - -");
    EXPECT_EQ(world.teacher(), teacher.get());
}

TEST(DialogWorld, ParleyAccounting)
{
    Counters c;
    MultiAgentDialogWorld world({std::make_shared<CountingAgent>("a", c), std::make_shared<CountingAgent>("b", c),
                                 std::make_shared<CountingAgent>("c", c)});
    world.parley();
    EXPECT_EQ(c.acts, 3);
    EXPECT_EQ(c.observes, 6);
    for (int k = 0; k < 4; ++k) world.parley();
    EXPECT_EQ(c.acts, 5 * 3);
    EXPECT_EQ(c.observes, 5 * 3 * 2);
    EXPECT_EQ(world.steps(), 5u);
}

TEST(DialogWorld, EpisodeDoneAfterSecondTurn)
{
    std::shared_ptr<Teacher> teacher = testing::fixture_teacher("babi:Task1k:2", "valid");
    DialogPartnerWorld world(teacher, std::make_shared<RepeatLabelAgent>());
    world.parley();
    EXPECT_FALSE(world.episode_done());
    world.parley();
    EXPECT_TRUE(world.episode_done());
}

TEST(DialogWorld, FailingAgentAbortsStep)
{
    Counters c;
    auto thrower = std::make_shared<ThrowingAgent>();
    MultiAgentDialogWorld world({std::make_shared<CountingAgent>("a", c), thrower});
    world.parley();
    const auto before = world.last_step();
    const auto display = world.display();
    thrower->armed = true;
    EXPECT_THROW(world.parley(), std::runtime_error);
    EXPECT_EQ(world.last_step(), before);
    EXPECT_EQ(world.display(), display);
    EXPECT_EQ(world.steps(), 1u);
}

TEST(DialogWorld, NeedsTwoAgents)
{
    Counters c;
    EXPECT_THROW(MultiAgentDialogWorld({std::make_shared<CountingAgent>("a", c)}), std::invalid_argument);
}

TEST(BatchWorld, SizeOneMatchesPlainTrace)
{
    auto prototype = testing::fixture_teacher("babi", "valid");
    std::shared_ptr<Teacher> teacher(prototype->clone());
    DialogPartnerWorld plain(teacher, std::make_shared<RepeatLabelAgent>());
    BatchWorld batch(*prototype, std::make_shared<RepeatLabelAgent>(), 1);
    while (!plain.epoch_done()) {
        ASSERT_FALSE(batch.epoch_done());
        plain.parley();
        batch.parley();
        EXPECT_EQ(batch.display(), plain.display());
    }
    EXPECT_TRUE(batch.epoch_done());
    EXPECT_EQ(batch.report(), teacher->report());
}

TEST(BatchWorld, FourReplicasMatchSequential)
{
    auto prototype = testing::fixture_teacher("babi:Task1k:4", "train:ordered");
    ASSERT_EQ(prototype->num_episodes(), 4u);
    auto learner = std::make_shared<RecordingBatchAgent>();
    BatchWorld batch(*prototype, learner, 4);
    while (!batch.epoch_done()) batch.parley();
    EXPECT_EQ(batch.report(), sequential_report(*prototype, std::make_shared<RepeatLabelAgent>()));
    EXPECT_EQ(learner->batch_calls, 1);
    EXPECT_EQ(batch.learner_batch_calls(), 1u);
}

TEST(BatchWorld, PlainLearnerGetsOneActPerReplica)
{
    auto prototype = testing::fixture_teacher("babi", "train", 3);
    auto learner = std::make_shared<PlainAgent>();
    BatchWorld batch(*prototype, learner, 8);
    batch.parley();
    EXPECT_EQ(learner->acts, 8);
    EXPECT_EQ(batch.learner_act_calls(), 8u);
    EXPECT_EQ(batch.last_active(), 8u);
}

TEST(BatchWorld, WrongReplyCountIsContractViolation)
{
    auto prototype = testing::fixture_teacher("babi", "train", 3);
    auto learner = std::make_shared<RecordingBatchAgent>();
    learner->drop_one = true;
    BatchWorld batch(*prototype, learner, 4);
    EXPECT_THROW(batch.parley(), ContractViolation);
}

TEST(Hogwild, SingleWorkerMatchesSequential)
{
    auto prototype = testing::fixture_teacher("babi,fbdialog_fixture", "valid");
    HogwildWorld world(*prototype, std::make_shared<RepeatLabelAgent>(), {1, prototype->num_examples()});
    const auto result = world.run();
    EXPECT_EQ(result.processed, prototype->num_examples());
    EXPECT_EQ(result.report, sequential_report(*prototype, std::make_shared<RepeatLabelAgent>()));
}

TEST(Hogwild, RepeatLabelBudgetExact)
{
    auto prototype = testing::fixture_teacher("babi", "train", 1);
    HogwildWorld world(*prototype, std::make_shared<RepeatLabelAgent>(), {4, 1000});
    const auto result = world.run();
    EXPECT_EQ(result.processed, 1000u);
    EXPECT_EQ(result.report.examples(), 1000);
    EXPECT_DOUBLE_EQ(result.report.accuracy(), 1.0);
}

TEST(Hogwild, ReadOnlyIrMatchesSequential)
{
    auto train = testing::fixture_teacher("fbdialog_fixture,babi", "train:ordered");
    auto trainer = std::make_shared<IrBaselineAgent>(true);
    sequential_report(*train, trainer);
    auto ir = std::make_shared<IrBaselineAgent>(false, trainer->stats());

    auto valid = testing::fixture_teacher("fbdialog_fixture,babi", "valid");
    const auto oracle = sequential_report(*valid, ir);
    for (std::size_t workers : {2u, 8u}) {
        HogwildWorld world(*valid, ir, {workers, valid->num_examples()});
        const auto result = world.run();
        EXPECT_EQ(result.report, oracle) << workers;
    }
}

TEST(Hogwild, WorkerFailureSurfaces)
{
    class Failing : public ConcurrentAgent {
    public:
        Message respond(const Message&) override { throw std::runtime_error("worker failed"); }
    };
    auto prototype = testing::fixture_teacher("babi", "train", 1);
    HogwildWorld world(*prototype, std::make_shared<Failing>(), {4, 100});
    EXPECT_THROW(world.run(), std::runtime_error);
}

}  // namespace
}  // namespace parley
