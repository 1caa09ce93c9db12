#include "parley/tasks/registry.hpp"

#include "parley/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>

namespace parley::tasks {

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view to_string(Category c)
{
    switch (c) {
        case Category::qa: return "QA";
        case Category::cloze: return "Cloze";
        case Category::goal: return "Goal";
        case Category::chitchat: return "ChitChat";
        case Category::visual: return "Visual";
    }
    return "QA";
}

std::optional<Category> parse_category(std::string_view name)
{
    const auto n = lower(name);
    for (auto c : kAllCategories) {
        if (lower(to_string(c)) == n) return c;
    }
    return std::nullopt;
}

void TaskRegistry::add(TaskDescriptor descriptor)
{
    if (descriptor.name.empty()) throw TaskError("task descriptor without a name");
    if (find(descriptor.name)) throw TaskError("task '" + descriptor.name + "' registered twice");
    if (descriptor.categories.empty()) {
        throw TaskError("task '" + descriptor.name + "' has no category");
    }
    for (const auto& src : descriptor.sources) {
        if (src.sha256.empty()) {
            throw TaskError("task '" + descriptor.name + "': remote source " + src.url +
                            " has no pinned sha256");
        }
    }
    descriptors_.push_back(std::move(descriptor));
}

const TaskDescriptor* TaskRegistry::find(std::string_view name) const
{
    auto it = std::find_if(descriptors_.begin(), descriptors_.end(),
                           [&](const TaskDescriptor& d) { return d.name == name; });
    return it == descriptors_.end() ? nullptr : &*it;
}

const TaskDescriptor& TaskRegistry::at(std::string_view name) const
{
    if (const auto* d = find(name)) return *d;
    throw TaskError("unknown task '" + std::string(name) + "'");
}

std::vector<std::string> TaskRegistry::with_category(Category c) const
{
    std::vector<std::string> out;
    for (const auto& d : descriptors_) {
        if (d.categories.contains(c)) out.push_back(d.name);
    }
    return out;
}

void TaskRegistry::load_sources(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw TaskError("cannot open sources file " + file.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw TaskError("sources file " + file.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw TaskError("sources file must hold a JSON object");

    for (const auto& [name, list] : doc.items()) {
        auto it = std::find_if(descriptors_.begin(), descriptors_.end(),
                               [&](const TaskDescriptor& d) { return d.name == name; });
        if (it == descriptors_.end()) throw TaskError("sources file names unknown task '" + name + "'");
        std::vector<RemoteSource> sources;
        for (const auto& entry : list) {
            RemoteSource src;
            src.url = entry.value("url", "");
            src.sha256 = entry.value("sha256", "");
            src.filename = entry.value("filename", "");
            src.unpack = entry.value("unpack", false);
            if (src.url.empty() || src.filename.empty()) {
                throw TaskError("task '" + name + "': source needs url and filename");
            }
            if (src.sha256.empty()) {
                throw TaskError("task '" + name + "': source " + src.url +
                                " has no pinned sha256; pin it in " + file.string());
            }
            sources.push_back(std::move(src));
        }
        it->sources = std::move(sources);
    }
}

TaskRegistry default_registry()
{
    TaskRegistry r;
    r.add({"babi", {Category::qa}, {}, "babi", {Split::train, Split::valid, Split::test}});
    r.add({"squad", {Category::qa}, {}, "squad", {Split::train, Split::valid}});
    r.add({"fbdialog_fixture", {Category::goal}, {}, "fbdialog",
           {Split::train, Split::valid, Split::test}});
    r.add({"fbdialog", {Category::chitchat}, {}, "fbdialog",
           {Split::train, Split::valid, Split::test}});
    return r;
}

std::string TaskEntry::str() const
{
    std::string out = task;
    for (const auto& p : path) out += ":" + p;
    return out;
}

TaskSpec parse_task_spec(std::string_view text, const TaskRegistry& registry)
{
    if (trim(text).empty()) throw TaskError("empty task expression");

    TaskSpec spec;
    spec.raw = std::string(text);
    auto push = [&](TaskEntry entry) {
        if (std::find(spec.entries.begin(), spec.entries.end(), entry) == spec.entries.end()) {
            spec.entries.push_back(std::move(entry));
        }
    };

    for (auto token : split(text, ',')) {
        token = trim(token);
        if (token.empty()) throw TaskError("empty task name in '" + spec.raw + "'");

        if (token.front() == '#') {
            const auto name = token.substr(1);
            std::vector<Category> cats;
            if (lower(name) == "all") {
                cats.assign(std::begin(kAllCategories), std::end(kAllCategories));
            } else if (auto c = parse_category(name)) {
                cats.push_back(*c);
            } else {
                throw TaskError("unknown task category '" + std::string(token) + "'");
            }
            std::size_t added = 0;
            for (auto c : cats) {
                for (auto& task : registry.with_category(c)) {
                    push({std::move(task), {}});
                    ++added;
                }
            }
            if (added == 0) throw TaskError("task category '" + std::string(token) + "' is empty");
            continue;
        }

        auto parts = split(token, ':');
        TaskEntry entry{std::string(parts.front()), {}};
        if (!registry.find(entry.task)) throw TaskError("unknown task '" + std::string(token) + "'");
        for (std::size_t i = 1; i < parts.size(); ++i) {
            if (parts[i].empty()) throw TaskError("empty subtask in '" + std::string(token) + "'");
            entry.path.emplace_back(parts[i]);
        }
        push(std::move(entry));
    }
    return spec;
}

}  // namespace parley::tasks
