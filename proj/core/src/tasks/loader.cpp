#include "parley/tasks/loader.hpp"

#include "parley/errors.hpp"
#include "parley/tasks/build.hpp"
#include "parley/tasks/parsers.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

namespace parley::tasks {

namespace fs = std::filesystem;

namespace {

constexpr Split kSplits[] = {Split::train, Split::valid, Split::test};

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw TaskError("cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<Episode> parse_file(const fs::path& p, const std::string& parser, const std::string& id)
{
    if (parser == "squad") return parse_squad(read_file(p), id);
    std::ifstream in(p);
    if (!in) throw TaskError("cannot open " + p.string());
    if (parser == "babi") return parse_babi(in, id);
    if (parser == "fbdialog") return parse_fbdialog(in, id);
    throw TaskError("unknown parser '" + parser + "'");
}

/// Distinct answers of a bAbI subtask in first-appearance order over
/// train, valid, test; used as every turn's label candidates.
void attach_answer_candidates(RawEpisodeSet& data)
{
    std::vector<std::string> cands;
    for (auto s : kSplits) {
        for (const auto& e : data.split(s)) {
            for (const auto& t : e.turns) {
                for (const auto& l : t.labels) {
                    if (std::find(cands.begin(), cands.end(), l) == cands.end()) cands.push_back(l);
                }
            }
        }
    }
    for (auto s : kSplits) {
        for (auto& e : data.split(s)) {
            for (auto& t : e.turns) t.label_candidates = cands;
        }
    }
}

std::vector<LoadedTask> load_babi(const TaskEntry& entry, const TaskContext& ctx)
{
    const auto& path = entry.path;
    std::string size = "Task1k";
    std::optional<int> only;
    if (!path.empty()) size = path[0];
    if (size != "Task1k" && size != "Task10k") {
        throw TaskError("unknown babi subtask '" + entry.str() + "' (expected Task1k or Task10k)");
    }
    if (path.size() > 2) throw TaskError("babi subtask path too long: '" + entry.str() + "'");
    if (path.size() == 2) {
        try {
            std::size_t used = 0;
            only = std::stoi(path[1], &used);
            if (used != path[1].size() || *only < 1) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw TaskError("babi task number must be a positive integer in '" + entry.str() + "'");
        }
    }

    const fs::path dir = resolve_task_dir(ctx, "babi") / "tasks_1-20_v1-2" /
                         (size == "Task1k" ? "en-valid" : "en-valid-10k");
    std::vector<int> numbers;
    if (only) {
        numbers.push_back(*only);
    } else if (fs::is_directory(dir)) {
        static const std::regex kTrainFile(R"(qa(\d+)_train\.txt)");
        for (const auto& f : fs::directory_iterator(dir)) {
            std::smatch m;
            const auto name = f.path().filename().string();
            if (std::regex_match(name, m, kTrainFile)) numbers.push_back(std::stoi(m[1]));
        }
        std::sort(numbers.begin(), numbers.end());
    }
    if (numbers.empty()) throw TaskError("no babi data for '" + entry.str() + "' under " + dir.string());

    std::vector<LoadedTask> out;
    for (int n : numbers) {
        LoadedTask task;
        task.id = "babi:" + size + ":" + std::to_string(n);
        for (auto s : kSplits) {
            const auto file = dir / ("qa" + std::to_string(n) + "_" + std::string(to_string(s)) + ".txt");
            if (!fs::exists(file)) throw TaskError("missing babi file " + file.string());
            task.data.split(s) = parse_file(file, "babi", task.id);
        }
        attach_answer_candidates(task.data);
        out.push_back(std::move(task));
    }
    return out;
}

LoadedTask load_split_files(const std::string& id, const TaskDescriptor& d, const fs::path& dir)
{
    LoadedTask task;
    task.id = id;
    for (auto s : d.splits) {
        fs::path file;
        if (d.parser == "squad") {
            file = dir / (s == Split::train ? "train-v1.1.json" : "dev-v1.1.json");
        } else {
            file = dir / (std::string(to_string(s)) + ".txt");
        }
        if (fs::exists(file)) task.data.split(s) = parse_file(file, d.parser, id);
    }
    return task;
}

}  // namespace

fs::path resolve_task_dir(const TaskContext& ctx, std::string_view task)
{
    const auto built = ctx.data_root / task;
    if (!ctx.data_root.empty() && fs::exists(built / kBuiltMarker)) return built;
    return ctx.fixture_root / task;
}

std::vector<LoadedTask> load_entry(const TaskEntry& entry, const TaskRegistry& registry,
                                   const TaskContext& ctx)
{
    const auto& d = registry.at(entry.task);
    if (d.parser == "babi") return load_babi(entry, ctx);

    if (d.parser == "fbdialog" && !entry.path.empty()) {
        // fbdialog:<file> serves one file for every split
        std::string file = entry.path[0];
        for (std::size_t i = 1; i < entry.path.size(); ++i) file += ":" + entry.path[i];
        LoadedTask task;
        task.id = entry.str();
        auto episodes = parse_file(file, "fbdialog", task.id);
        for (auto s : d.splits) task.data.split(s) = episodes;
        return {std::move(task)};
    }
    if (!entry.path.empty()) throw TaskError("task '" + entry.task + "' takes no subtask path");

    const auto dir = resolve_task_dir(ctx, entry.task);
    if (!fs::is_directory(dir)) throw TaskError("no data for task '" + entry.task + "' in " + dir.string());
    return {load_split_files(entry.task, d, dir)};
}

std::unique_ptr<Teacher> make_teacher(const TaskSpec& spec, const TaskRegistry& registry, DataMode mode,
                                      const TaskContext& ctx)
{
    if (spec.entries.empty()) throw TaskError("empty task expression");

    std::uint64_t stream = 0;
    auto teacher_for = [&](const TaskEntry& entry) -> std::unique_ptr<Teacher> {
        const auto& d = registry.at(entry.task);
        if (std::find(d.splits.begin(), d.splits.end(), mode.split) == d.splits.end()) {
            throw TaskError("task '" + entry.task + "' has no " + std::string(to_string(mode.split)) +
                            " split");
        }
        auto loaded = load_entry(entry, registry, ctx);
        std::vector<std::unique_ptr<Teacher>> subs;
        for (auto& task : loaded) {
            auto episodes =
                std::make_shared<const std::vector<Episode>>(std::move(task.data.split(mode.split)));
            subs.push_back(std::make_unique<DialogTeacher>(task.id, std::move(episodes), mode,
                                                           mix_seed(ctx.seed, stream++)));
        }
        if (subs.size() == 1) return std::move(subs.front());
        return std::make_unique<MultiTaskTeacher>(entry.str(), std::move(subs), mode,
                                                  mix_seed(ctx.seed, stream++), ctx.mix);
    };

    if (spec.entries.size() == 1) return teacher_for(spec.entries.front());

    std::vector<std::unique_ptr<Teacher>> subs;
    for (const auto& entry : spec.entries) subs.push_back(teacher_for(entry));
    return std::make_unique<MultiTaskTeacher>(spec.raw, std::move(subs), mode, ctx.seed, ctx.mix);
}

}  // namespace parley::tasks
