#pragma once

#include "parley/tasks/registry.hpp"

#include <filesystem>
#include <string>

namespace parley::tasks {

/// Completion marker written into a task directory once its files are
/// downloaded and verified.
inline constexpr std::string_view kBuiltMarker = ".built";
inline constexpr int kBuildVersion = 1;

class Fetcher {
public:
    virtual ~Fetcher() = default;
    /// Stores the resource at `url` in `destination`. Throws TaskError.
    virtual void fetch(const std::string& url, const std::filesystem::path& destination) = 0;
};

/// libcurl backed fetcher; handles http(s):// and file:// URLs.
class CurlFetcher : public Fetcher {
public:
    explicit CurlFetcher(long timeout_seconds = 600);
    void fetch(const std::string& url, const std::filesystem::path& destination) override;

private:
    long timeout_seconds_;
};

/// Lowercase hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& file);

bool is_built(const TaskDescriptor& task, const std::filesystem::path& data_root);

enum class BuildOutcome { already_built, built };

/// Downloads a task into `data_root/<name>` on first use.
///
/// Files land in a private staging directory, are checked against their
/// pinned SHA-256, optionally unpacked, and the marker is written before the
/// staging directory is renamed into place, so readers never see a partial
/// task. With the marker present and `force` unset nothing is fetched.
/// `force` drops the marker first and rebuilds from scratch. Throws
/// ChecksumError on a mismatch and TaskError on fetch or unpack failures;
/// in both cases no marker is left behind.
BuildOutcome build_task(const TaskDescriptor& task, const std::filesystem::path& data_root,
                        Fetcher& fetcher, bool force = false);

}  // namespace parley::tasks
