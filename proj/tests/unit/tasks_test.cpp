#include "parley/errors.hpp"
#include "parley/tasks/build.hpp"
#include "parley/tasks/loader.hpp"
#include "parley/tasks/parsers.hpp"
#include "parley/tasks/registry.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <thread>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace parley::tasks {
namespace {

namespace fs = std::filesystem;
using Labels = std::vector<std::string>;

std::vector<TaskEntry> entries(std::string_view text, const TaskRegistry& r)
{
    return parse_task_spec(text, r).entries;
}

TEST(TaskSpec, CommaList)
{
    const auto r = default_registry();
    EXPECT_EQ(entries("babi,squad", r), (std::vector<TaskEntry>{{"babi", {}}, {"squad", {}}}));
    EXPECT_EQ(entries("babi:Task1k:4", r), (std::vector<TaskEntry>{{"babi", {"Task1k", "4"}}}));
    EXPECT_EQ(parse_task_spec("babi:Task1k:4", r).raw, "babi:Task1k:4");
}

TEST(TaskSpec, CategoryExpansion)
{
    TaskRegistry r;
    r.add({"babi", {Category::qa}, {}, "babi", {}});
    r.add({"squad", {Category::qa}, {}, "squad", {}});
    r.add({"opensubtitles", {Category::chitchat}, {}, "fbdialog", {}});
    EXPECT_EQ(entries("#qa", r), (std::vector<TaskEntry>{{"babi", {}}, {"squad", {}}}));
    EXPECT_EQ(entries("#QA", r), entries("#qa", r));
    EXPECT_EQ(entries("squad,#qa", r), (std::vector<TaskEntry>{{"squad", {}}, {"babi", {}}}));
}

TEST(TaskSpec, AllIsConcatenationOfCategories)
{
    const auto r = default_registry();
    std::vector<TaskEntry> expected;
    for (Category c : kAllCategories) {
        for (const auto& name : r.with_category(c)) {
            TaskEntry e{name, {}};
            if (std::find(expected.begin(), expected.end(), e) == expected.end()) expected.push_back(e);
        }
    }
    EXPECT_EQ(entries("#all", r), expected);
    EXPECT_FALSE(expected.empty());
}

TEST(TaskSpec, Errors)
{
    const auto r = default_registry();
    EXPECT_THROW(parse_task_spec("nosuchtask", r), TaskError);
    EXPECT_THROW(parse_task_spec("#nosuchcategory", r), TaskError);
    EXPECT_THROW(parse_task_spec("#visual", r), TaskError);
    EXPECT_THROW(parse_task_spec("", r), TaskError);
    try {
        parse_task_spec("babi,bogus", r);
        FAIL();
    } catch (const TaskError& e) {
        EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
    }
}

TEST(Registry, RejectsBadDescriptors)
{
    TaskRegistry r;
    EXPECT_THROW(r.add({"x", {}, {}, "babi", {}}), TaskError);
    EXPECT_THROW(r.add({"y", {Category::qa}, {{"http://h/f", "", "f", false}}, "babi", {}}), TaskError);
    r.add({"z", {Category::qa}, {}, "babi", {}});
    EXPECT_THROW(r.add({"z", {Category::qa}, {}, "babi", {}}), TaskError);
}

TEST(Registry, ShippedSourcesAreUnpinned)
{
    auto r = default_registry();
    EXPECT_THROW(r.load_sources(fs::path(PARLEY_TEST_FIXTURE_DIR).parent_path() / "remote_sources.json"),
                 TaskError);
}

TEST(Registry, LoadsPinnedSources)
{
    testing::TempDir dir;
    std::ofstream(dir.path() / "sources.json")
        << R"({"babi": [{"url": "file:///x.tar.gz", "sha256": "ab", "filename": "x.tar.gz", "unpack": true}]})";
    auto r = default_registry();
    r.load_sources(dir.path() / "sources.json");
    ASSERT_EQ(r.at("babi").sources.size(), 1u);
    EXPECT_TRUE(r.at("babi").sources[0].unpack);
}

TEST(BabiParser, FirstStoryMatchesDisplay)
{
    std::istringstream in(
        "1 The office is north of the kitchen.\n"
        "2 The bathroom is north of the office.\n"
        "3 What is north of the kitchen?\toffice\t1\n");
    const auto eps = parse_babi(in, "qa4");
    ASSERT_EQ(eps.size(), 1u);
    ASSERT_EQ(eps[0].turns.size(), 1u);
    EXPECT_EQ(eps[0].turns[0].text, "The office is north of the kitchen.\nThe bathroom is north of the office.\n"
                                    "What is north of the kitchen?");
    EXPECT_EQ(eps[0].turns[0].labels, Labels{"office"});
}

TEST(BabiParser, MultiAnswerAndStoryReset)
{
    std::istringstream in(
        "1 Mary has a cat.\n"
        "2 What does Mary have?\tcat|feline\t1\n"
        "3 John went home.\n"
        "4 Where is John?\thome\t3\n"
        "1 Sam left.\n"
        "2 Who left?\tSam\t1\n");
    const auto eps = parse_babi(in, "t");
    ASSERT_EQ(eps.size(), 2u);
    EXPECT_EQ(eps[0].turns[0].labels, (Labels{"cat", "feline"}));
    EXPECT_EQ(eps[0].turns[1].text, "Mary has a cat.\nJohn went home.\nWhere is John?");
    EXPECT_EQ(eps[1].turns[0].text, "Sam left.\nWho left?");
}

TEST(BabiParser, Errors)
{
    std::istringstream backwards("1 a.\n3 b.\n2 c?\tx\n");
    EXPECT_THROW(parse_babi(backwards, "t"), TaskError);
    std::istringstream no_answer("1 a.\n2 b?\t\n");
    EXPECT_THROW(parse_babi(no_answer, "t"), TaskError);
}

TEST(FbdialogParser, Fields)
{
    std::istringstream in(
        "1 Where is Sam?\tkitchen\t\thallway|kitchen\n"
        "2 just chatting\n"
        "3 good job\tyes\t1\n"
        "1 new episode\\nsecond line\tx|y\n");
    const auto eps = parse_fbdialog(in, "t");
    ASSERT_EQ(eps.size(), 2u);
    const Turn& t0 = eps[0].turns[0];
    EXPECT_EQ(t0.text, "Where is Sam?");
    EXPECT_EQ(t0.labels, Labels{"kitchen"});
    EXPECT_EQ(t0.label_candidates, (Labels{"hallway", "kitchen"}));
    EXPECT_FALSE(t0.reward.has_value());
    EXPECT_TRUE(eps[0].turns[1].labels.empty());
    EXPECT_FALSE(eps[0].turns[1].label_candidates.has_value());
    EXPECT_EQ(eps[0].turns[2].reward, 1.0);
    EXPECT_EQ(eps[1].turns[0].text, "new episode\nsecond line");
    EXPECT_EQ(eps[1].turns[0].labels, (Labels{"x", "y"}));
}

TEST(FbdialogParser, Errors)
{
    std::istringstream too_many("1 a\tb\t1\tc\td\n");
    EXPECT_THROW(parse_fbdialog(too_many, "t"), TaskError);
    std::istringstream bad_reward("1 a\tb\tlots\n");
    EXPECT_THROW(parse_fbdialog(bad_reward, "t"), TaskError);
}

TEST(FbdialogParser, EscapeRoundTrip)
{
    for (std::string s : {"plain", "two\nlines", "tab\there", "back\\slash\\n", ""}) {
        std::istringstream in("1 " + escape_fbdialog(s) + "\tlabel\n");
        EXPECT_EQ(parse_fbdialog(in, "t").at(0).turns.at(0).text, s);
    }
}

TEST(SquadParser, OffsetsDropped)
{
    const std::string doc = R"({"version":"1.1","data":[{"title":"T","paragraphs":[
        {"context":"Sam is in the kitchen now.","qas":[
          {"id":"q1","question":"Where is Sam?","answers":[{"text":"kitchen","answer_start":14}]}]}]}]})";
    const auto eps = parse_squad(doc, "squad");
    ASSERT_EQ(eps.size(), 1u);
    EXPECT_EQ(eps[0].turns[0].text, "Sam is in the kitchen now.\nWhere is Sam?");
    EXPECT_EQ(eps[0].turns[0].labels, Labels{"kitchen"});
    EXPECT_FALSE(eps[0].turns[0].label_candidates.has_value());
}

TEST(SquadParser, DuplicatesAndCounts)
{
    const std::string doc = R"({"data":[{"paragraphs":[
        {"context":"c1","qas":[{"question":"q1","answers":[{"text":"a","answer_start":0},{"text":"a","answer_start":0},{"text":"a","answer_start":0}]},
                               {"question":"q2","answers":[{"text":"b","answer_start":0}]}]},
        {"context":"c2","qas":[{"question":"q3","answers":[{"text":"c","answer_start":0}]},
                               {"question":"q4","answers":[{"text":"d","answer_start":0},{"text":"e","answer_start":0}]}]}]}]})";
    const auto eps = parse_squad(doc, "squad");
    ASSERT_EQ(eps.size(), 4u);
    EXPECT_EQ(eps[0].turns[0].labels, Labels{"a"});
    EXPECT_EQ(eps[3].turns[0].labels, (Labels{"d", "e"}));
}

TEST(SquadParser, Errors)
{
    EXPECT_THROW(parse_squad("{", "s"), TaskError);
    EXPECT_THROW(parse_squad(R"({"data":[{"paragraphs":[{"qas":[]}]}]})", "s"), TaskError);
}

TEST(Fixtures, ManifestCountsHold)
{
    const fs::path root = testing::fixture_root();
    const auto manifest = nlohmann::json::parse(testing::read_file(root / "manifest.json"));
    ASSERT_FALSE(manifest["fixtures"].empty());
    for (const auto& [rel, expected] : manifest["fixtures"].items()) {
        const fs::path file = root / rel;
        std::vector<Episode> eps;
        if (file.extension() == ".json") {
            eps = parse_squad(testing::read_file(file), "squad");
        } else if (rel.rfind("babi/", 0) == 0) {
            std::ifstream in(file);
            eps = parse_babi(in, rel);
        } else {
            std::ifstream in(file);
            eps = parse_fbdialog(in, rel);
        }
        EXPECT_EQ(eps.size(), expected["episodes"].get<std::size_t>()) << rel;
        EXPECT_EQ(count_turns(eps), expected["turns"].get<std::size_t>()) << rel;
    }
}

TEST(Loader, BabiSelectsSubtasks)
{
    const auto r = default_registry();
    const auto ctx = testing::fixture_context();
    const auto all = load_entry({"babi", {}}, r, ctx);
    ASSERT_EQ(all.size(), 3u);
    EXPECT_EQ(all[0].id, "babi:Task1k:1");
    EXPECT_EQ(all[2].id, "babi:Task1k:4");
    const auto one = load_entry({"babi", {"Task1k", "2"}}, r, ctx);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].data.train.size(), 2u);
    EXPECT_THROW(load_entry({"babi", {"Task1k", "19"}}, r, ctx), TaskError);
}

TEST(Loader, BuiltDataRootWins)
{
    testing::TempDir root;
    fs::create_directories(root.path() / "fbdialog");
    std::ofstream(root.path() / "fbdialog" / "train.txt") << "1 from data root\thi\n";
    std::ofstream(root.path() / "fbdialog" / "valid.txt") << "1 v\thi\n";
    std::ofstream(root.path() / "fbdialog" / "test.txt") << "1 t\thi\n";
    auto ctx = testing::fixture_context();
    ctx.data_root = root.path();
    EXPECT_EQ(resolve_task_dir(ctx, "fbdialog"), ctx.fixture_root / "fbdialog");
    std::ofstream(root.path() / "fbdialog" / kBuiltMarker) << "version=1\n";
    EXPECT_EQ(resolve_task_dir(ctx, "fbdialog"), root.path() / "fbdialog");
    const auto r = default_registry();
    const auto loaded = load_entry({"fbdialog", {}}, r, ctx);
    EXPECT_EQ(loaded.at(0).data.train.at(0).turns.at(0).text, "from data root");
}

TEST(SpanErasure, SquadMessagesCarryNoOffsets)
{
    for (const char* dt : {"train:ordered", "valid"}) {
        auto teacher = testing::fixture_teacher("squad", dt);
        std::size_t seen = 0;
        while (!teacher->epoch_done()) {
            const auto j = to_json_value(teacher->act());
            for (const auto& [key, value] : j.items()) {
                EXPECT_FALSE(is_span_key(key)) << key;
                EXPECT_FALSE(value.is_number_integer() || value.is_number_unsigned()) << key;
            }
            ++seen;
        }
        EXPECT_GT(seen, 0u);
    }
}

// --- build_task -------------------------------------------------------------

constexpr const char* kAbcSha256 = "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad";

class CountingFetcher : public Fetcher {
public:
    void fetch(const std::string& url, const fs::path& destination) override
    {
        ++calls;
        inner.fetch(url, destination);
    }
    CurlFetcher inner{30};
    int calls = 0;
};

TaskDescriptor local_task(const fs::path& source, const std::string& sha)
{
    return {"local", {Category::qa}, {{"file://" + source.string(), sha, "train.txt", false}}, "fbdialog", {}};
}

TEST(Build, Sha256OfKnownInput)
{
    testing::TempDir dir;
    std::ofstream(dir.path() / "abc", std::ios::binary) << "abc";
    EXPECT_EQ(sha256_file(dir.path() / "abc"), kAbcSha256);
}

TEST(Build, FreshThenIdempotent)
{
    testing::TempDir src;
    testing::TempDir root;
    std::ofstream(src.path() / "abc", std::ios::binary) << "abc";
    const auto task = local_task(src.path() / "abc", kAbcSha256);
    CountingFetcher fetcher;
    EXPECT_FALSE(is_built(task, root.path()));
    EXPECT_EQ(build_task(task, root.path(), fetcher), BuildOutcome::built);
    EXPECT_TRUE(is_built(task, root.path()));
    EXPECT_EQ(testing::read_file(root.path() / "local" / "train.txt"), "abc");
    EXPECT_EQ(fetcher.calls, 1);
    EXPECT_EQ(build_task(task, root.path(), fetcher), BuildOutcome::already_built);
    EXPECT_EQ(fetcher.calls, 1);
}

TEST(Build, TamperedSourceFailsWithoutMarker)
{
    testing::TempDir src;
    testing::TempDir root;
    std::ofstream(src.path() / "abc", std::ios::binary) << "abc";
    const auto task = local_task(src.path() / "abc", kAbcSha256);
    CountingFetcher fetcher;
    build_task(task, root.path(), fetcher);
    std::ofstream(src.path() / "abc", std::ios::binary) << "abd";
    EXPECT_THROW(build_task(task, root.path(), fetcher, true), ChecksumError);
    EXPECT_FALSE(is_built(task, root.path()));
    for (const auto& entry : fs::directory_iterator(root.path())) {
        EXPECT_EQ(entry.path().filename().string().rfind(".staging", 0), std::string::npos);
    }
}

TEST(Build, FetchFailureLeavesNothing)
{
    testing::TempDir root;
    const auto task = local_task("/nonexistent/parley/file", kAbcSha256);
    CountingFetcher fetcher;
    EXPECT_THROW(build_task(task, root.path(), fetcher), TaskError);
    EXPECT_FALSE(is_built(task, root.path()));
    EXPECT_TRUE(fs::is_empty(root.path()));
}

TEST(Build, UnpacksArchive)
{
    testing::TempDir src;
    testing::TempDir root;
    fs::create_directories(src.path() / "payload");
    std::ofstream(src.path() / "payload" / "train.txt") << "1 hi\tthere\n";
    const std::string cmd = "tar -czf " + (src.path() / "a.tar.gz").string() + " -C " + src.path().string() +
                            " payload";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    const auto sha = sha256_file(src.path() / "a.tar.gz");
    TaskDescriptor task{"arch", {Category::qa}, {{"file://" + (src.path() / "a.tar.gz").string(), sha, "a.tar.gz", true}},
                        "fbdialog", {}};
    CountingFetcher fetcher;
    build_task(task, root.path(), fetcher);
    EXPECT_TRUE(fs::exists(root.path() / "arch" / "payload" / "train.txt"));
}

TEST(Build, ConcurrentBuildsAgree)
{
    testing::TempDir src;
    testing::TempDir root;
    std::ofstream(src.path() / "abc", std::ios::binary) << "abc";
    const auto task = local_task(src.path() / "abc", kAbcSha256);
    std::vector<std::thread> threads;
    std::atomic<int> failures{0};
    for (int i = 0; i < 4; ++i) {
        threads.emplace_back([&] {
            try {
                CountingFetcher f;
                build_task(task, root.path(), f);
            } catch (...) {
                ++failures;
            }
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(failures, 0);
    EXPECT_TRUE(is_built(task, root.path()));
    EXPECT_EQ(testing::read_file(root.path() / "local" / "train.txt"), "abc");
}

}  // namespace
}  // namespace parley::tasks
