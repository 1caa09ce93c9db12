#pragma once

#include "parley/tasks/loader.hpp"
#include "parley/tasks/registry.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

namespace parley::testing {

inline std::filesystem::path fixture_root() { return PARLEY_TEST_FIXTURE_DIR; }
inline std::filesystem::path test_data() { return PARLEY_TEST_DATA_DIR; }

inline tasks::TaskContext fixture_context(std::uint64_t seed = 0)
{
    tasks::TaskContext ctx;
    ctx.data_root = std::filesystem::temp_directory_path() / "parley-test-no-data";
    ctx.fixture_root = fixture_root();
    ctx.seed = seed;
    return ctx;
}

inline std::unique_ptr<Teacher> fixture_teacher(std::string_view task, std::string_view datatype,
                                                std::uint64_t seed = 0)
{
    const auto registry = tasks::default_registry();
    const auto spec = tasks::parse_task_spec(task, registry);
    return tasks::make_teacher(spec, registry, DataMode::parse(datatype), fixture_context(seed));
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("parley-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace parley::testing
