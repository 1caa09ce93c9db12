#include "cli.hpp"

#include "commands.hpp"

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <cstdlib>
#include <functional>
#include <iostream>

#ifndef PARLEY_DEFAULT_FIXTURE_DIR
#define PARLEY_DEFAULT_FIXTURE_DIR "data/fixtures"
#endif
#ifndef PARLEY_DEFAULT_SOURCES_FILE
#define PARLEY_DEFAULT_SOURCES_FILE "data/remote_sources.json"
#endif

namespace parley::cli {

namespace {

struct Flags {
    RunConfig cfg;
    std::size_t num_examples = 0;
    std::int64_t act_timeout_ms = 60000;
    std::int64_t connect_timeout_ms = 60000;
    CLI::Option* n_opt = nullptr;
    std::vector<CLI::Option*> port_opts;
    std::vector<CLI::Option*> ws_port_opts;
};

std::string env_or(const char* name, const char* fallback)
{
    const char* v = std::getenv(name);
    return v && *v ? v : fallback;
}

void add_task_options(CLI::App& sub, Flags& f, bool task_required)
{
    auto* t = sub.add_option("-t,--task", f.cfg.task, "Task expression, e.g. babi or babi:Task1k:1,squad or #QA");
    if (task_required) t->required();
    sub.add_option("--datatype", f.cfg.datatype, "train, train:ordered, valid or test (also -dt)");
    sub.add_option("--data-root", f.cfg.data_root, "Where downloaded tasks live")->envname("PARLEY_DATA_ROOT");
    sub.add_option("--fixture-root", f.cfg.fixture_root, "Bundled fixture data")->envname("PARLEY_FIXTURE_ROOT");
    sub.add_option("--sources", f.cfg.sources_file, "Remote source list used by --download");
    sub.add_flag("--download", f.cfg.download, "Download tasks that are not built yet");
    sub.add_option("--seed", f.cfg.seed, "Seed for train sampling and task mixing");
    sub.add_option("--mix", f.cfg.mix, "Multitask mixing: uniform or weighted");
}

void add_model_options(CLI::App& sub, Flags& f)
{
    sub.add_option("-m,--model", f.cfg.model, "repeat_label, ir_baseline or remote:<host>:<port>");
    sub.add_option("--model-file", f.cfg.model_file, "ir_baseline term statistics");
    sub.add_option("--act-timeout", f.act_timeout_ms, "Milliseconds to wait for a remote act");
    sub.add_option("--connect-timeout", f.connect_timeout_ms, "Milliseconds to wait for a remote peer");
}

void add_run_options(CLI::App& sub, Flags& f)
{
    f.n_opt = sub.add_option("-n,--num-examples", f.num_examples, "Number of examples");
    sub.add_option("-b,--batch-size", f.cfg.batch_size, "Batch size for batched worlds");
    sub.add_option("--workers", f.cfg.workers, "Hogwild worker threads");
    sub.add_option("--report-json", f.cfg.report_json, "Write the report as JSON here");
}

void add_serve_options(CLI::App& sub, Flags& f)
{
    f.port_opts.push_back(sub.add_option("--port", f.cfg.port, "TCP bridge port"));
    f.ws_port_opts.push_back(sub.add_option("--ws-port", f.cfg.ws_port, "WebSocket gateway port"));
    sub.add_option("--host", f.cfg.listen_host, "Address to listen on");
    sub.add_option("--max-sessions", f.cfg.max_sessions, "Stop after this many sessions (0 = run until interrupted)");
    sub.add_option("--static-dir", f.cfg.static_dir, "Files served over HTTP by the gateway");
    sub.add_option("--out", f.cfg.out_dir, "Directory for collected data");
}

int guarded(const std::function<int()>& body, std::ostream& err)
{
    try {
        return body();
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const TaskError& e) {
        err << "task error: " << e.what() << '\n';
        return kTaskFailure;
    } catch (const RemoteError& e) {
        err << "remote error: " << e.what() << '\n';
        return kRemoteFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace

std::vector<std::string> normalize_args(std::vector<std::string> args)
{
    for (auto& a : args) {
        if (a == "-dt") {
            a = "--datatype";
        } else if (a.rfind("-dt=", 0) == 0) {
            a = "--datatype=" + a.substr(4);
        }
    }
    return args;
}

int run(const std::vector<std::string>& raw_args, std::istream& in, std::ostream& out, std::ostream& err)
{
    Flags f;
    f.cfg.data_root = env_or("PARLEY_DATA_ROOT", "parley-data");
    f.cfg.fixture_root = env_or("PARLEY_FIXTURE_ROOT", PARLEY_DEFAULT_FIXTURE_DIR);
    f.cfg.sources_file = PARLEY_DEFAULT_SOURCES_FILE;

    CLI::App app{"parley: dialog tasks, agents and worlds"};
    app.name("parley");
    app.require_subcommand(1);

    auto* display = app.add_subcommand("display_data", "Show task data with a label-repeating agent");
    add_task_options(*display, f, true);
    f.n_opt = nullptr;
    auto* display_n = display->add_option("-n,--num-examples", f.num_examples, "Number of parleys (default 10)");

    auto* eval = app.add_subcommand("eval_model", "Evaluate a model with one ordered pass over a split");
    add_task_options(*eval, f, true);
    add_model_options(*eval, f);
    add_run_options(*eval, f);
    auto* eval_n = f.n_opt;
    eval->add_flag("--render", f.cfg.render, "Print every step while evaluating");

    auto* train = app.add_subcommand("train_model", "Train a model on the train split with periodic validation");
    add_task_options(*train, f, true);
    add_model_options(*train, f);
    add_run_options(*train, f);
    auto* train_n = f.n_opt;
    train->add_option("--num-epochs", f.cfg.num_epochs, "Passes over the train split");
    train->add_option("--validation-every-n-examples", f.cfg.validation_every, "Validate this often (0 = only at the end)");

    auto* inter = app.add_subcommand("interactive", "Chat with a model or answer a task from the terminal");
    add_task_options(*inter, f, false);
    add_model_options(*inter, f);
    inter->add_option("--transcript", f.cfg.transcript, "Write the session as JSON lines here on exit");

    auto* srv = app.add_subcommand("serve", "Host worlds for bridge peers and gateway humans");
    add_task_options(*srv, f, false);
    add_model_options(*srv, f);
    add_serve_options(*srv, f);
    auto* serve_n = srv->add_option("-n,--num-examples", f.num_examples, "Examples per chat session");
    srv->add_option("--mode", f.cfg.serve_mode, "chat, qa_collector or model_evaluator");
    srv->add_option("--task-context", f.cfg.task_context, "Paragraphs for qa_collector, blank-line separated");
    srv->add_option("--count", f.cfg.count, "Episodes per human session");

    auto* coll = app.add_subcommand("collect", "Collect question/answer pairs about given paragraphs");
    coll->add_option("--task-context", f.cfg.task_context, "Paragraphs, blank-line separated")->required();
    coll->add_option("--count", f.cfg.count, "Number of pairs to collect");
    add_serve_options(*coll, f);
    coll->add_option("--act-timeout", f.act_timeout_ms, "Milliseconds to wait for the human");

    auto* evalh = app.add_subcommand("evaluate-human", "Have a person rate a model's episodes");
    add_task_options(*evalh, f, true);
    add_model_options(*evalh, f);
    add_serve_options(*evalh, f);
    evalh->add_option("--count", f.cfg.count, "Episodes to rate");

    auto* pr = app.add_subcommand("peer", "Run a native model as a remote agent of another world");
    add_task_options(*pr, f, false);
    add_model_options(*pr, f);
    pr->add_option("--connect", f.cfg.connect, "World address, host:port")->required();
    pr->add_option("--role", f.cfg.role, "agent or observer");

    std::vector<std::string> args = normalize_args(raw_args);
    std::vector<const char*> argv{"parley"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    for (auto* opt : {display_n, eval_n, train_n, serve_n}) {
        if (opt && opt->count() > 0) f.cfg.num_examples = f.num_examples;
    }
    for (auto* opt : f.port_opts) f.cfg.use_port = f.cfg.use_port || opt->count() > 0;
    for (auto* opt : f.ws_port_opts) f.cfg.use_ws_port = f.cfg.use_ws_port || opt->count() > 0;
    f.cfg.act_timeout = std::chrono::milliseconds(f.act_timeout_ms);
    f.cfg.connect_timeout = std::chrono::milliseconds(f.connect_timeout_ms);

    const Io io{in, out, err};
    const RunConfig& cfg = f.cfg;
    return guarded(
        [&]() -> int {
            if (display->parsed()) return display_data(cfg, io);
            if (eval->parsed()) return eval_model(cfg, io);
            if (train->parsed()) return train_model(cfg, io);
            if (inter->parsed()) return interactive(cfg, io);
            if (srv->parsed()) return serve(cfg, io);
            if (coll->parsed()) return collect(cfg, io);
            if (evalh->parsed()) return evaluate_human(cfg, io);
            if (pr->parsed()) return peer(cfg, io);
            throw UsageError("no command given");
        },
        err);
}

}  // namespace parley::cli
