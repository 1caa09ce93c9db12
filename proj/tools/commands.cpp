#include "commands.hpp"

#include "terminal_agent.hpp"

#include "parley/human/worlds.hpp"
#include "parley/ir_baseline.hpp"
#include "parley/net/gateway.hpp"
#include "parley/net/remote_agent.hpp"
#include "parley/tasks/build.hpp"
#include "parley/tasks/loader.hpp"
#include "parley/world.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace parley::cli {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};

tasks::TaskContext task_context(const RunConfig& cfg)
{
    tasks::TaskContext ctx;
    ctx.data_root = cfg.data_root;
    ctx.fixture_root = cfg.fixture_root;
    ctx.seed = cfg.seed;
    if (cfg.mix == "uniform") {
        ctx.mix = MixPolicy::uniform;
    } else if (cfg.mix == "weighted") {
        ctx.mix = MixPolicy::weighted;
    } else {
        throw UsageError("--mix must be uniform or weighted");
    }
    return ctx;
}

DataMode data_mode(const RunConfig& cfg, std::string_view fallback)
{
    const std::string text = cfg.datatype.empty() ? std::string(fallback) : cfg.datatype;
    try {
        return DataMode::parse(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

void download_if_asked(const RunConfig& cfg, const tasks::TaskSpec& spec, tasks::TaskRegistry& registry, Io io)
{
    if (!cfg.download) return;
    registry.load_sources(cfg.sources_file);
    tasks::CurlFetcher fetcher;
    std::set<std::string> seen;
    for (const auto& entry : spec.entries) {
        if (!seen.insert(entry.task).second) continue;
        const auto& d = registry.at(entry.task);
        if (d.sources.empty()) continue;
        io.err << "building " << d.name << " in " << cfg.data_root.string() << '\n';
        const auto outcome = tasks::build_task(d, cfg.data_root, fetcher);
        if (outcome == tasks::BuildOutcome::already_built) io.err << d.name << " already built\n";
    }
}

std::unique_ptr<Teacher> make_teacher(const RunConfig& cfg, DataMode mode, Io io)
{
    if (cfg.task.empty()) throw UsageError("a task is required (-t)");
    auto registry = tasks::default_registry();
    const auto spec = tasks::parse_task_spec(cfg.task, registry);
    download_if_asked(cfg, spec, registry, io);
    return tasks::make_teacher(spec, registry, mode, task_context(cfg));
}

bool is_remote(const std::string& model) { return model.rfind("remote:", 0) == 0; }

TermStats load_stats(const fs::path& file)
{
    std::ifstream in(file);
    if (!in) throw TaskError("cannot open model file " + file.string());
    return TermStats::load(in);
}

/// Term statistics over every turn of the task's train split.
TermStats stats_from_train(const RunConfig& cfg, Io io)
{
    auto teacher = make_teacher(cfg, DataMode{Split::train, true}, io);
    TermStats stats;
    while (!teacher->epoch_done()) {
        const Message m = teacher->act();
        if (m.text) stats.ingest(*m.text);
    }
    return stats;
}

struct Model {
    std::shared_ptr<Agent> agent;
    std::shared_ptr<IrBaselineAgent> ir;
    bool remote = false;
};

Model accept_remote(const RunConfig& cfg, Io io)
{
    std::pair<std::string, std::uint16_t> address;
    try {
        address = net::parse_address(std::string_view(cfg.model).substr(7));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    net::Listener listener(address.first, address.second);
    io.err << "waiting for a remote agent on " << address.first << ':' << listener.port() << '\n';
    auto remote = net::RemoteAgent::accept(listener, cfg.connect_timeout, cfg.act_timeout);
    if (remote->role() != net::Role::agent) throw UsageError("the remote model connected as an observer");
    io.err << "remote agent '" << remote->id() << "' connected\n";
    Model m;
    m.agent = std::shared_ptr<Agent>(std::move(remote));
    m.remote = true;
    return m;
}

/// Builds the agent named by -m. `training` selects an empty, learning
/// ir_baseline; otherwise ir_baseline is frozen on --model-file or on the
/// train split of -t.
Model make_model(const RunConfig& cfg, bool training, Io io)
{
    if (cfg.model == "repeat_label") return {std::make_shared<RepeatLabelAgent>(), nullptr, false};
    if (cfg.model == "ir_baseline") {
        TermStats stats;
        if (!training) {
            if (!cfg.model_file.empty()) {
                stats = load_stats(cfg.model_file);
            } else if (!cfg.task.empty()) {
                stats = stats_from_train(cfg, io);
            }
        }
        auto ir = std::make_shared<IrBaselineAgent>(training, std::move(stats));
        return {ir, ir, false};
    }
    if (is_remote(cfg.model)) return accept_remote(cfg, io);
    throw UsageError("unknown model '" + cfg.model + "' (expected repeat_label, ir_baseline or remote:<host>:<port>)");
}

void write_report_json(const RunConfig& cfg, const MetricsReport& report)
{
    if (cfg.report_json.empty()) return;
    std::ofstream out(cfg.report_json, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + cfg.report_json.string());
    out << report.to_json().dump(2) << '\n';
}

void check_parallel_flags(const RunConfig& cfg, const Model& model)
{
    if (cfg.batch_size == 0 || cfg.workers == 0) throw UsageError("-b and --workers must be at least 1");
    if (cfg.batch_size > 1 && cfg.workers > 1) throw UsageError("choose one of -b and --workers");
    if (model.remote && (cfg.batch_size > 1 || cfg.workers > 1)) {
        throw UsageError("remote models act one example at a time; drop -b/--workers");
    }
}

/// One pass of `teacher` against `agent` in the configured world type.
MetricsReport run_pass(const RunConfig& cfg, std::unique_ptr<Teacher> teacher, const Model& model, Io io)
{
    const std::size_t limit = cfg.num_examples.value_or(SIZE_MAX);

    if (cfg.workers > 1) {
        if (cfg.render) throw UsageError("--render needs a sequential or batched run");
        auto concurrent = std::dynamic_pointer_cast<ConcurrentAgent>(model.agent);
        if (!concurrent) throw UsageError("model '" + cfg.model + "' cannot be shared between workers");
        HogwildWorld world(*teacher, concurrent, {cfg.workers, std::min(limit, teacher->num_examples())});
        return world.run().report;
    }

    if (cfg.batch_size > 1) {
        BatchWorld world(*teacher, model.agent, cfg.batch_size);
        std::size_t seen = 0;
        while (!world.epoch_done() && seen < limit) {
            world.parley();
            seen += world.last_active();
            if (cfg.render) io.out << world.display() << "\n~~\n";
        }
        return world.report();
    }

    std::shared_ptr<Teacher> shared(std::move(teacher));
    DialogPartnerWorld world(shared, model.agent);
    for (std::size_t n = 0; n < limit && !world.epoch_done(); ++n) {
        world.parley();
        if (cfg.render) io.out << world.display() << "\n~~\n";
    }
    return shared->report();
}

std::vector<std::string> read_contexts(const fs::path& file)
{
    std::ifstream in(file);
    if (!in) throw TaskError("cannot open context file " + file.string());
    std::vector<std::string> out;
    std::string line;
    std::string paragraph;
    auto flush = [&] {
        if (!paragraph.empty()) out.push_back(std::move(paragraph));
        paragraph.clear();
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) {
            flush();
            continue;
        }
        if (!paragraph.empty()) paragraph += '\n';
        paragraph += line;
    }
    flush();
    if (out.empty()) throw TaskError("context file " + file.string() + " holds no paragraphs");
    return out;
}

// ---------------------------------------------------------------------------
// Sessions shared by serve, collect and evaluate-human.

struct SessionPlan {
    RunConfig cfg;
    std::unique_ptr<Teacher> teacher;
    std::vector<std::string> contexts;
    std::unique_ptr<human::QAStore> qa_store;
    std::unique_ptr<human::RatingStore> rating_store;
    std::mutex log_mutex;
    std::atomic<std::size_t> finished{0};
};

std::string end_mode(const RunConfig& cfg) { return cfg.serve_mode; }

/// Runs one participant's world to completion; returns a summary line.
std::string run_session(SessionPlan& plan, const std::shared_ptr<Agent>& participant, Io io)
{
    const auto& cfg = plan.cfg;
    std::ostringstream summary;
    summary << "session " << participant->id() << ": ";

    if (cfg.serve_mode == "qa_collector") {
        human::QACollectorWorld world(participant, plan.contexts, *plan.qa_store, cfg.count);
        try {
            while (!world.epoch_done()) world.parley();
        } catch (const SessionClosed&) {
            summary << "disconnected, ";
        }
        summary << world.completed() << " question/answer pairs";
        return summary.str();
    }

    if (cfg.serve_mode == "model_evaluator") {
        std::shared_ptr<Teacher> teacher(plan.teacher->clone());
        Model bot = make_model(cfg, false, io);
        human::ModelEvaluatorWorld world(teacher, bot.agent, participant, *plan.rating_store, cfg.task, cfg.count);
        try {
            while (!world.epoch_done()) world.parley();
        } catch (const SessionClosed&) {
            summary << "disconnected, ";
        }
        summary << world.completed() << " ratings";
        return summary.str();
    }

    if (plan.teacher) {
        std::shared_ptr<Teacher> teacher(plan.teacher->clone());
        DialogPartnerWorld world(teacher, participant);
        const std::size_t limit = cfg.num_examples.value_or(SIZE_MAX);
        try {
            for (std::size_t n = 0; n < limit && !world.epoch_done(); ++n) world.parley();
        } catch (const SessionClosed&) {
            teacher->abandon_episode();
            summary << "disconnected, ";
        }
        summary << '\n' << teacher->report().render();
        return summary.str();
    }

    Model model = make_model(cfg, false, io);
    MultiAgentDialogWorld world({participant, model.agent});
    std::size_t turns = 0;
    try {
        while (!stop_requested()) {
            world.parley();
            ++turns;
        }
    } catch (const SessionClosed&) {
    }
    summary << turns << " exchanges";
    return summary.str();
}

int serve_sessions(SessionPlan& plan, Io io)
{
    const auto& cfg = plan.cfg;
    if (!cfg.use_port && !cfg.use_ws_port) throw UsageError("serve needs --port and/or --ws-port");
    if (is_remote(cfg.model)) throw UsageError("serve hosts its own sessions; use a native model");

    auto handle = [&plan, io](const std::shared_ptr<Agent>& participant) {
        std::string line;
        try {
            line = run_session(plan, participant, io);
        } catch (const std::exception& e) {
            line = "session " + participant->id() + " failed: " + e.what();
        }
        {
            std::lock_guard lock(plan.log_mutex);
            io.out << line << '\n' << std::flush;
        }
        ++plan.finished;
    };

    std::unique_ptr<net::Gateway> gateway;
    if (cfg.use_ws_port) {
        net::GatewayOptions options;
        options.host = cfg.listen_host;
        options.port = cfg.ws_port;
        options.act_timeout = cfg.act_timeout;
        options.static_dir = cfg.static_dir;
        gateway = std::make_unique<net::Gateway>(options, [handle, mode = end_mode(cfg)](
                                                              std::shared_ptr<net::GatewayAgent> agent) {
            handle(agent);
            agent->end(mode);
        });
        std::lock_guard lock(plan.log_mutex);
        io.out << "gateway listening on ws://" << cfg.listen_host << ':' << gateway->port() << "/agent\n"
               << std::flush;
    }

    std::unique_ptr<net::Listener> listener;
    std::mutex remote_mutex;
    std::vector<std::shared_ptr<net::RemoteAgent>> remotes;
    std::vector<std::jthread> tcp_sessions;
    std::jthread acceptor;
    if (cfg.use_port) {
        listener = std::make_unique<net::Listener>(cfg.listen_host, cfg.port);
        {
            std::lock_guard lock(plan.log_mutex);
            io.out << "bridge listening on " << cfg.listen_host << ':' << listener->port() << '\n' << std::flush;
        }
        acceptor = std::jthread([&](std::stop_token st) {
            while (!st.stop_requested()) {
                auto conn = listener->accept(std::chrono::milliseconds(100));
                if (!conn) continue;
                tcp_sessions.emplace_back([&, c = std::move(conn)]() mutable {
                    std::shared_ptr<net::RemoteAgent> agent;
                    try {
                        agent = std::make_shared<net::RemoteAgent>(std::move(c), cfg.act_timeout);
                    } catch (const std::exception& e) {
                        std::lock_guard lock(plan.log_mutex);
                        io.err << "bridge session refused: " << e.what() << '\n';
                        return;
                    }
                    {
                        std::lock_guard lock(remote_mutex);
                        remotes.push_back(agent);
                    }
                    if (agent->role() == net::Role::observer) {
                        std::lock_guard lock(plan.log_mutex);
                        io.err << "observer sessions are not hosted by serve; closing " << agent->id() << '\n';
                        agent->shutdown();
                        return;
                    }
                    handle(agent);
                    agent->shutdown();
                });
            }
        });
    }

    while (!stop_requested() && (cfg.max_sessions == 0 || plan.finished.load() < cfg.max_sessions)) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    if (acceptor.joinable()) {
        acceptor.request_stop();
        acceptor.join();
    }
    {
        std::lock_guard lock(remote_mutex);
        for (auto& r : remotes) r->interrupt();
    }
    tcp_sessions.clear();
    if (gateway) gateway->stop();
    return kOk;
}

}  // namespace

void request_stop() { g_stop = true; }
bool stop_requested() { return g_stop.load(); }
void clear_stop() { g_stop = false; }

// ---------------------------------------------------------------------------

int display_data(const RunConfig& cfg, Io io)
{
    std::shared_ptr<Teacher> teacher = make_teacher(cfg, data_mode(cfg, "train"), io);
    DialogPartnerWorld world(teacher, std::make_shared<RepeatLabelAgent>());
    const std::size_t n = cfg.num_examples.value_or(10);
    for (std::size_t i = 0; i < n && !world.epoch_done(); ++i) {
        world.parley();
        io.out << world.display() << "\n~~\n";
    }
    return kOk;
}

int eval_model(const RunConfig& cfg, Io io)
{
    DataMode mode = data_mode(cfg, "valid");
    mode.ordered = true;
    if (!is_remote(cfg.model)) {
        if (cfg.batch_size == 0 || cfg.workers == 0) throw UsageError("-b and --workers must be at least 1");
        if (cfg.batch_size > 1 && cfg.workers > 1) throw UsageError("choose one of -b and --workers");
    }
    auto teacher = make_teacher(cfg, mode, io);
    Model model = make_model(cfg, false, io);
    check_parallel_flags(cfg, model);

    const MetricsReport report = run_pass(cfg, std::move(teacher), model, io);
    model.agent->shutdown();
    io.out << report.render();
    write_report_json(cfg, report);
    return kOk;
}

int train_model(const RunConfig& cfg, Io io)
{
    if (cfg.model == "repeat_label") throw UsageError("repeat_label has nothing to train");
    if (cfg.num_epochs == 0) throw UsageError("--num-epochs must be at least 1");
    const bool ir = cfg.model == "ir_baseline";
    if (ir && cfg.model_file.empty()) throw UsageError("train_model -m ir_baseline needs --model-file");

    auto train_teacher = make_teacher(cfg, DataMode{Split::train, true}, io);
    Model model = make_model(cfg, true, io);
    check_parallel_flags(cfg, model);
    if (cfg.workers > 1 && cfg.validation_every > 0) {
        throw UsageError("--validation-every-n-examples is not available with --workers");
    }

    RunConfig valid_cfg = cfg;
    valid_cfg.num_examples.reset();
    valid_cfg.batch_size = 1;
    valid_cfg.workers = 1;
    valid_cfg.render = false;
    auto validate = [&]() {
        auto teacher = make_teacher(cfg, DataMode{Split::valid, true}, io);
        Model frozen = model;
        if (ir) {
            auto agent = std::make_shared<IrBaselineAgent>(false, model.ir->stats());
            frozen = {agent, agent, false};
        }
        return run_pass(valid_cfg, std::move(teacher), frozen, io);
    };

    const std::size_t per_epoch = train_teacher->num_examples();
    const std::size_t budget = cfg.num_examples.value_or(per_epoch * cfg.num_epochs);
    std::size_t seen = 0;

    if (cfg.workers > 1) {
        HogwildWorld world(*train_teacher, model.ir, {cfg.workers, budget});
        seen = world.run().processed;
    } else {
        std::size_t next_validation = cfg.validation_every;
        auto maybe_validate = [&] {
            if (cfg.validation_every == 0 || seen < next_validation) return;
            io.out << "validation after " << seen << " examples:\n" << validate().render();
            while (next_validation <= seen) next_validation += cfg.validation_every;
        };
        for (std::size_t epoch = 0; epoch < cfg.num_epochs && seen < budget; ++epoch) {
            if (cfg.batch_size > 1) {
                BatchWorld world(*train_teacher, model.agent, cfg.batch_size);
                while (!world.epoch_done() && seen < budget) {
                    world.parley();
                    seen += world.last_active();
                    maybe_validate();
                }
            } else {
                std::shared_ptr<Teacher> teacher(train_teacher->clone());
                DialogPartnerWorld world(teacher, model.agent);
                while (!world.epoch_done() && seen < budget) {
                    world.parley();
                    ++seen;
                    maybe_validate();
                }
            }
        }
    }

    if (ir) {
        std::ofstream out(cfg.model_file, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + cfg.model_file.string());
        model.ir->stats().save(out);
        io.out << "trained on " << seen << " examples; term stats saved to " << cfg.model_file.string() << '\n';
    } else {
        io.out << "trained on " << seen << " examples\n";
    }

    const MetricsReport final_report = validate();
    io.out << "final validation:\n" << final_report.render();
    write_report_json(cfg, final_report);
    model.agent->shutdown();
    return kOk;
}

int interactive(const RunConfig& cfg, Io io)
{
    auto human = std::make_shared<TerminalAgent>(io.in, io.out);
    std::shared_ptr<Teacher> teacher;
    std::unique_ptr<World> world;
    Model model;
    if (!cfg.task.empty()) {
        teacher = make_teacher(cfg, data_mode(cfg, "valid"), io);
        world = std::make_unique<DialogPartnerWorld>(teacher, human);
    } else {
        model = make_model(cfg, false, io);
        world = std::make_unique<MultiAgentDialogWorld>(std::vector<std::shared_ptr<Agent>>{human, model.agent});
    }

    try {
        while (!world->epoch_done()) world->parley();
    } catch (const SessionEnded&) {
    }
    if (teacher) io.out << teacher->report().render();
    world->shutdown();

    if (!cfg.transcript.empty()) {
        std::ofstream out(cfg.transcript, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + cfg.transcript.string());
        for (const auto& m : human->transcript()) out << to_json_value(m).dump() << '\n';
    }
    io.out << "bye\n" << std::flush;
    return kOk;
}

int serve(const RunConfig& cfg, Io io)
{
    SessionPlan plan;
    plan.cfg = cfg;
    if (cfg.serve_mode == "chat") {
        if (!cfg.task.empty()) plan.teacher = make_teacher(cfg, data_mode(cfg, "valid"), io);
    } else if (cfg.serve_mode == "qa_collector") {
        if (cfg.task_context.empty()) throw UsageError("qa_collector needs --task-context");
        plan.contexts = read_contexts(cfg.task_context);
        plan.qa_store = std::make_unique<human::QAStore>(cfg.out_dir);
    } else if (cfg.serve_mode == "model_evaluator") {
        plan.teacher = make_teacher(cfg, data_mode(cfg, "valid"), io);
        plan.rating_store = std::make_unique<human::RatingStore>(cfg.out_dir);
    } else {
        throw UsageError("--mode must be chat, qa_collector or model_evaluator");
    }
    return serve_sessions(plan, io);
}

int collect(RunConfig cfg, Io io)
{
    if (cfg.task_context.empty()) throw UsageError("collect needs --task-context");
    cfg.serve_mode = "qa_collector";
    const auto contexts = read_contexts(cfg.task_context);

    if (cfg.use_ws_port) {
        SessionPlan plan;
        plan.cfg = cfg;
        if (plan.cfg.max_sessions == 0) plan.cfg.max_sessions = 1;
        plan.contexts = contexts;
        plan.qa_store = std::make_unique<human::QAStore>(cfg.out_dir);
        serve_sessions(plan, io);
        io.out << "collected " << plan.qa_store->size() << " question/answer pairs in "
               << plan.qa_store->jsonl_path().string() << '\n';
        return kOk;
    }

    human::QAStore store(cfg.out_dir);
    auto human = std::make_shared<TerminalAgent>(io.in, io.out);
    human::QACollectorWorld world(human, contexts, store, cfg.count);
    try {
        while (!world.epoch_done()) world.parley();
    } catch (const SessionEnded&) {
    }
    io.out << "collected " << store.size() << " question/answer pairs in " << store.jsonl_path().string() << '\n';
    return kOk;
}

int evaluate_human(RunConfig cfg, Io io)
{
    cfg.serve_mode = "model_evaluator";
    auto print_summary = [&](const human::RatingStore& store) {
        io.out << "ratings: count=" << store.size() << " mean=" << store.mean() << " stddev=" << store.stddev()
               << '\n';
    };

    if (cfg.use_ws_port) {
        SessionPlan plan;
        plan.cfg = cfg;
        if (plan.cfg.max_sessions == 0) plan.cfg.max_sessions = 1;
        plan.teacher = make_teacher(cfg, data_mode(cfg, "valid"), io);
        plan.rating_store = std::make_unique<human::RatingStore>(cfg.out_dir);
        serve_sessions(plan, io);
        print_summary(*plan.rating_store);
        return kOk;
    }

    std::shared_ptr<Teacher> teacher = make_teacher(cfg, data_mode(cfg, "valid"), io);
    Model bot = make_model(cfg, false, io);
    human::RatingStore store(cfg.out_dir);
    auto rater = std::make_shared<TerminalAgent>(io.in, io.out);
    human::ModelEvaluatorWorld world(teacher, bot.agent, rater, store, cfg.task, cfg.count);
    try {
        while (!world.epoch_done()) world.parley();
    } catch (const SessionEnded&) {
    }
    bot.agent->shutdown();
    print_summary(store);
    return kOk;
}

int peer(const RunConfig& cfg, Io io)
{
    if (cfg.connect.empty()) throw UsageError("peer needs --connect <host>:<port>");
    if (is_remote(cfg.model)) throw UsageError("a peer must run a native model");
    net::PeerOptions options;
    try {
        std::tie(options.host, options.port) = net::parse_address(cfg.connect);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (cfg.role == "agent") {
        options.role = net::Role::agent;
    } else if (cfg.role == "observer") {
        options.role = net::Role::observer;
    } else {
        throw UsageError("--role must be agent or observer");
    }
    options.connect_timeout = cfg.connect_timeout;

    Model model = make_model(cfg, false, io);
    const auto stats = net::run_peer(*model.agent, options);
    io.out << "observed " << stats.observed << " messages, acted " << stats.acted << " times\n";
    return kOk;
}

}  // namespace parley::cli
