#include "parley/tasks/build.hpp"

#include "parley/errors.hpp"

#include <curl/curl.h>
#include <openssl/evp.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

extern char** environ;

namespace parley::tasks {

namespace fs = std::filesystem;

namespace {

std::size_t write_to_file(char* data, std::size_t size, std::size_t count, void* user)
{
    auto* out = static_cast<std::ofstream*>(user);
    out->write(data, static_cast<std::streamsize>(size * count));
    return out->good() ? size * count : 0;
}

void curl_global()
{
    static std::once_flag once;
    std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

void unpack_tar_gz(const fs::path& archive, const fs::path& into)
{
    const std::string a = archive.string();
    const std::string d = into.string();
    std::array<char*, 6> argv = {const_cast<char*>("tar"), const_cast<char*>("-xzf"),
                                 const_cast<char*>(a.c_str()), const_cast<char*>("-C"),
                                 const_cast<char*>(d.c_str()), nullptr};
    pid_t pid = 0;
    if (posix_spawnp(&pid, "tar", nullptr, nullptr, argv.data(), environ) != 0) {
        throw TaskError("could not run tar to unpack " + a);
    }
    int status = 0;
    if (waitpid(pid, &status, 0) < 0 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        throw TaskError("tar failed to unpack " + a);
    }
}

fs::path staging_dir(const fs::path& data_root, const std::string& name)
{
    static std::atomic<unsigned> counter{0};
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    return data_root / (".staging-" + name + "-" + std::to_string(::getpid()) + "-" +
                        std::to_string(tid % 100000) + "-" + std::to_string(counter++));
}

}  // namespace

CurlFetcher::CurlFetcher(long timeout_seconds) : timeout_seconds_(timeout_seconds) { curl_global(); }

void CurlFetcher::fetch(const std::string& url, const fs::path& destination)
{
    std::ofstream out(destination, std::ios::binary | std::ios::trunc);
    if (!out) throw TaskError("cannot write " + destination.string());

    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
    if (!curl) throw TaskError("curl initialisation failed");
    curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_FAILONERROR, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT, timeout_seconds_);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &write_to_file);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &out);
    const CURLcode rc = curl_easy_perform(curl.get());
    out.close();
    if (rc != CURLE_OK) {
        throw TaskError("download of " + url + " failed: " + curl_easy_strerror(rc));
    }
}

std::string sha256_file(const fs::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) throw TaskError("cannot read " + file.string());

    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw TaskError("sha256 initialisation failed");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);

    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i) {
        hex.push_back(kHex[digest[i] >> 4]);
        hex.push_back(kHex[digest[i] & 0xF]);
    }
    return hex;
}

bool is_built(const TaskDescriptor& task, const fs::path& data_root)
{
    return fs::exists(data_root / task.name / kBuiltMarker);
}

BuildOutcome build_task(const TaskDescriptor& task, const fs::path& data_root, Fetcher& fetcher,
                        bool force)
{
    const fs::path target = data_root / task.name;
    if (!force && is_built(task, data_root)) return BuildOutcome::already_built;
    if (task.sources.empty()) throw TaskError("task '" + task.name + "' has no remote sources to build from");

    fs::create_directories(data_root);
    if (force) fs::remove(target / kBuiltMarker);

    const fs::path staging = staging_dir(data_root, task.name);
    fs::create_directories(staging);
    try {
        std::string marker = "version=" + std::to_string(kBuildVersion) + "\n";
        for (const auto& src : task.sources) {
            const fs::path file = staging / src.filename;
            fetcher.fetch(src.url, file);
            const auto actual = sha256_file(file);
            if (actual != src.sha256) {
                throw ChecksumError("checksum mismatch for " + src.url + ": expected " + src.sha256 +
                                    ", got " + actual);
            }
            if (src.unpack) unpack_tar_gz(file, staging);
            marker += src.filename + " sha256=" + src.sha256 + "\n";
        }
        std::ofstream(staging / kBuiltMarker) << marker;

        std::error_code ec;
        if (fs::exists(target)) {
            if (!force && is_built(task, data_root)) {
                // another builder finished first
                fs::remove_all(staging);
                return BuildOutcome::already_built;
            }
            fs::remove_all(target, ec);
        }
        fs::rename(staging, target, ec);
        if (ec) {
            fs::remove_all(staging);
            if (is_built(task, data_root)) return BuildOutcome::already_built;
            throw TaskError("could not move " + staging.string() + " into place: " + ec.message());
        }
    } catch (...) {
        std::error_code ignored;
        fs::remove_all(staging, ignored);
        throw;
    }
    return BuildOutcome::built;
}

}  // namespace parley::tasks
