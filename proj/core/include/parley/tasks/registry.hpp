#pragma once

#include "parley/episode.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace parley::tasks {

enum class Category { qa, cloze, goal, chitchat, visual };

inline constexpr Category kAllCategories[] = {Category::qa, Category::cloze, Category::goal,
                                              Category::chitchat, Category::visual};

std::string_view to_string(Category c);
/// Case-insensitive: "qa", "cloze", "goal", "chitchat", "visual".
std::optional<Category> parse_category(std::string_view name);

struct RemoteSource {
    std::string url;
    std::string sha256;
    /// Name the download is stored under inside the task directory.
    std::string filename;
    /// Extract the file as a .tar.gz archive after verification.
    bool unpack = false;
};

struct TaskDescriptor {
    std::string name;
    std::set<Category> categories;
    std::vector<RemoteSource> sources;
    /// One of "babi", "squad", "fbdialog".
    std::string parser;
    std::vector<Split> splits;
};

/// Ordered collection of task descriptors.
class TaskRegistry {
public:
    /// Throws TaskError if the descriptor has no category, a remote source
    /// without a checksum, or a duplicate name.
    void add(TaskDescriptor descriptor);

    const TaskDescriptor* find(std::string_view name) const;
    const TaskDescriptor& at(std::string_view name) const;
    const std::vector<TaskDescriptor>& descriptors() const { return descriptors_; }
    std::vector<std::string> with_category(Category c) const;

    /// Attaches remote sources from a JSON file of the form
    /// {"<task>": [{"url": ..., "sha256": ..., "filename": ..., "unpack": bool}]}.
    /// Unpinned entries (missing or empty sha256) are rejected.
    void load_sources(const std::filesystem::path& file);

private:
    std::vector<TaskDescriptor> descriptors_;
};

/// babi and squad (QA), fbdialog_fixture (Goal) and the generic fbdialog
/// loader (ChitChat). No remote sources attached.
TaskRegistry default_registry();

struct TaskEntry {
    std::string task;
    std::vector<std::string> path;

    /// "task:sub:path" form.
    std::string str() const;
    friend bool operator==(const TaskEntry&, const TaskEntry&) = default;
};

struct TaskSpec {
    std::vector<TaskEntry> entries;
    std::string raw;
};

/// Parses a comma separated task expression. Each item is a task name with
/// an optional colon separated subtask path, or `#Category` / `#all`.
/// Categories expand in registry order; duplicates keep their first
/// position. Throws TaskError naming the offending token.
TaskSpec parse_task_spec(std::string_view text, const TaskRegistry& registry);

}  // namespace parley::tasks
