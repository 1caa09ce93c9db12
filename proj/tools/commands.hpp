#pragma once

#include "parley/errors.hpp"
#include "parley/metrics.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace parley::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kTaskFailure = 3, kRemoteFailure = 4 };

/// Bad combination of otherwise well-formed flags.
class UsageError : public Error {
public:
    using Error::Error;
};

struct Io {
    std::istream& in;
    std::ostream& out;
    std::ostream& err;
};

struct RunConfig {
    std::string task;
    std::string model = "repeat_label";
    std::string datatype;
    std::optional<std::size_t> num_examples;
    std::size_t batch_size = 1;
    std::size_t workers = 1;
    std::filesystem::path data_root;
    std::filesystem::path fixture_root;
    std::filesystem::path sources_file;
    std::uint64_t seed = 0;
    std::string mix = "uniform";
    bool download = false;

    std::filesystem::path model_file;
    std::filesystem::path report_json;
    bool render = false;
    std::size_t num_epochs = 1;
    std::size_t validation_every = 0;

    std::string listen_host = "127.0.0.1";
    std::uint16_t port = 0;
    std::uint16_t ws_port = 0;
    bool use_port = false;
    bool use_ws_port = false;
    std::chrono::milliseconds act_timeout{60000};
    std::chrono::milliseconds connect_timeout{60000};
    std::string serve_mode = "chat";
    std::size_t max_sessions = 0;
    std::size_t count = 1;
    std::filesystem::path out_dir = ".";
    std::filesystem::path task_context;
    std::filesystem::path transcript;
    std::filesystem::path static_dir;

    std::string connect;
    std::string role = "agent";
};

int display_data(const RunConfig& cfg, Io io);
int eval_model(const RunConfig& cfg, Io io);
int train_model(const RunConfig& cfg, Io io);
int interactive(const RunConfig& cfg, Io io);
int serve(const RunConfig& cfg, Io io);
int collect(RunConfig cfg, Io io);
int evaluate_human(RunConfig cfg, Io io);
int peer(const RunConfig& cfg, Io io);

/// Asks long-running commands (serve, peer) to wind down.
void request_stop();
bool stop_requested();
void clear_stop();

}  // namespace parley::cli
