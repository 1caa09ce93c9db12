#pragma once

#include "parley/episode.hpp"
#include "parley/tasks/registry.hpp"
#include "parley/teacher.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>

namespace parley::tasks {

/// Where task data lives. A task is read from `data_root/<task>` when that
/// directory carries a completion marker, otherwise from the bundled
/// fixtures under `fixture_root/<task>`.
struct TaskContext {
    std::filesystem::path data_root;
    std::filesystem::path fixture_root;
    std::uint64_t seed = 0;
    MixPolicy mix = MixPolicy::uniform;
};

/// Directory a task's files are read from (see TaskContext).
std::filesystem::path resolve_task_dir(const TaskContext& ctx, std::string_view task);

/// A single named subtask's parsed data.
struct LoadedTask {
    std::string id;
    RawEpisodeSet data;
};

/// Parses every subtask an entry selects. `babi` without a path selects
/// every Task1k subtask present; `babi:Task10k` every 10k subtask.
std::vector<LoadedTask> load_entry(const TaskEntry& entry, const TaskRegistry& registry,
                                   const TaskContext& ctx);

/// Builds the teacher for a whole task expression: a DialogTeacher per
/// subtask, wrapped in a MultiTaskTeacher when more than one is selected.
std::unique_ptr<Teacher> make_teacher(const TaskSpec& spec, const TaskRegistry& registry,
                                      DataMode mode, const TaskContext& ctx);

}  // namespace parley::tasks
