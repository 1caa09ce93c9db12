#include "parley/teacher.hpp"

#include "parley/errors.hpp"

#include <algorithm>
#include <numeric>

namespace parley {

// ---------------------------------------------------------------------------
// DialogTeacher

DialogTeacher::DialogTeacher(std::string id, std::shared_ptr<const std::vector<Episode>> episodes,
                             DataMode mode, std::uint64_t seed)
    : DialogTeacher(std::move(id), std::move(episodes), mode, seed, 0, 1)
{
}

DialogTeacher::DialogTeacher(std::string id, std::shared_ptr<const std::vector<Episode>> episodes,
                             DataMode mode, std::uint64_t seed, std::size_t shard,
                             std::size_t shard_count)
    : id_(std::move(id)),
      data_(std::move(episodes)),
      mode_(mode),
      seed_(seed),
      rng_(mix_seed(seed, shard)),
      shard_(shard),
      shard_count_(shard_count)
{
    if (!data_) throw TaskError("teacher '" + id_ + "' has no data");
    if (shard_count_ == 0 || shard_ >= shard_count_) throw std::invalid_argument("bad shard");
    for (const auto& e : *data_) {
        if (e.turns.empty()) throw TaskError("teacher '" + id_ + "': empty episode");
        total_turns_ += e.turns.size();
    }
    if (!mode_.ordered && data_->empty()) {
        throw TaskError("teacher '" + id_ + "': no episodes to sample in " + mode_.str());
    }
    epoch_done_ = mode_.ordered && ordered_index() >= data_->size();
}

std::size_t DialogTeacher::episode_length(std::size_t index) const
{
    return (*data_)[index % data_->size()].turns.size();
}

Message DialogTeacher::end_of_data()
{
    pending_labels_.clear();
    Message m;
    m.id = id_;
    m.episode_done = true;
    return m;
}

void DialogTeacher::begin_episode(std::size_t index, std::size_t max_turns, bool forced)
{
    episode_ = index;
    turn_ = 0;
    turn_limit_ = std::min(max_turns, (*data_)[index].turns.size());
    in_episode_ = true;
    forced_ = forced;
    episode_open_ = true;
    episode_start_report_ = report_;
}

void DialogTeacher::start_episode(std::size_t index, std::size_t max_turns)
{
    if (data_->empty()) throw TaskError("teacher '" + id_ + "' has no episodes");
    if (max_turns == 0) throw std::invalid_argument("start_episode: max_turns must be positive");
    begin_episode(index % data_->size(), max_turns, true);
}

Message DialogTeacher::act()
{
    if (!in_episode_) {
        if (mode_.ordered) {
            if (epoch_done_ || ordered_index() >= data_->size()) {
                epoch_done_ = true;
                return end_of_data();
            }
            begin_episode(ordered_index(), SIZE_MAX, false);
        } else {
            begin_episode(uniform_index(rng_, data_->size()), SIZE_MAX, false);
        }
    }

    const Turn& turn = (*data_)[episode_].turns[turn_];
    Message m;
    m.id = id_;
    m.text = turn.text;
    if (!turn.labels.empty() && !mode_.withholds_labels()) m.labels = turn.labels;
    if (turn.label_candidates) m.label_candidates = turn.label_candidates;
    if (turn.reward) m.reward = turn.reward;
    pending_labels_ = turn.labels;

    ++turn_;
    if (turn_ == turn_limit_) {
        m.episode_done = true;
        in_episode_ = false;
        if (mode_.ordered && !forced_) {
            ++ordinal_;
            if (ordered_index() >= data_->size()) epoch_done_ = true;
        }
    }
    return m;
}

void DialogTeacher::observe(const Message& reply)
{
    if (!pending_labels_.empty()) {
        report_.record(reply, pending_labels_);
        pending_labels_.clear();
    }
    if (!in_episode_) episode_open_ = false;
}

void DialogTeacher::reset()
{
    in_episode_ = false;
    episode_open_ = false;
    pending_labels_.clear();
}

void DialogTeacher::restart_epoch()
{
    reset();
    ordinal_ = 0;
    rng_.seed(mix_seed(seed_, shard_));
    epoch_done_ = mode_.ordered && ordered_index() >= data_->size();
}

void DialogTeacher::abandon_episode()
{
    if (!episode_open_) return;
    report_ = episode_start_report_;
    report_.add_abandoned_episode();
    reset();
}

std::unique_ptr<Teacher> DialogTeacher::clone_shard(std::size_t shard, std::size_t shard_count) const
{
    return std::unique_ptr<Teacher>(new DialogTeacher(id_, data_, mode_, seed_, shard, shard_count));
}

// ---------------------------------------------------------------------------
// MultiTaskTeacher

MultiTaskTeacher::MultiTaskTeacher(std::string id, std::vector<std::unique_ptr<Teacher>> tasks,
                                   DataMode mode, std::uint64_t seed, MixPolicy policy)
    : id_(std::move(id)),
      tasks_(std::move(tasks)),
      mode_(mode),
      seed_(seed),
      rng_(mix_seed(seed, 0x6d74)),
      policy_(policy)
{
    if (tasks_.empty()) throw TaskError("multitask teacher needs at least one task");
}

std::size_t MultiTaskTeacher::pick_task()
{
    if (policy_ == MixPolicy::uniform) return uniform_index(rng_, tasks_.size());
    const std::size_t total = num_episodes();
    if (total == 0) throw TaskError("multitask teacher '" + id_ + "' has no episodes");
    std::size_t r = uniform_index(rng_, total);
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        const auto n = tasks_[i]->num_episodes();
        if (r < n) return i;
        r -= n;
    }
    return tasks_.size() - 1;
}

Message MultiTaskTeacher::act()
{
    if (in_episode_ && current_) {
        Message m = tasks_[*current_]->act();
        if (m.episode_done) in_episode_ = false;
        return m;
    }

    if (mode_.ordered) {
        while (cursor_ < tasks_.size() && tasks_[cursor_]->epoch_done()) ++cursor_;
        if (cursor_ == tasks_.size()) {
            current_.reset();
            Message m;
            m.id = id_;
            m.episode_done = true;
            return m;
        }
        current_ = cursor_;
    } else {
        current_ = pick_task();
    }
    in_episode_ = true;
    Message m = tasks_[*current_]->act();
    if (m.episode_done) in_episode_ = false;
    return m;
}

void MultiTaskTeacher::observe(const Message& reply)
{
    if (current_) tasks_[*current_]->observe(reply);
}

void MultiTaskTeacher::reset()
{
    for (auto& t : tasks_) t->reset();
    in_episode_ = false;
}

MetricsReport MultiTaskTeacher::report() const
{
    MetricsReport out;
    for (const auto& t : tasks_) {
        MetricsReport sub = t->report();
        MetricsReport totals = sub;
        totals.clear_tasks();
        out.merge(totals);
        out.set_task(t->id(), std::move(sub));
    }
    return out;
}

bool MultiTaskTeacher::epoch_done() const
{
    return std::all_of(tasks_.begin(), tasks_.end(), [](const auto& t) { return t->epoch_done(); });
}

void MultiTaskTeacher::restart_epoch()
{
    for (auto& t : tasks_) t->restart_epoch();
    cursor_ = 0;
    current_.reset();
    in_episode_ = false;
    rng_.seed(mix_seed(seed_, 0x6d74));
}

void MultiTaskTeacher::abandon_episode()
{
    if (current_) tasks_[*current_]->abandon_episode();
    in_episode_ = false;
}

std::size_t MultiTaskTeacher::num_episodes() const
{
    return std::accumulate(tasks_.begin(), tasks_.end(), std::size_t{0},
                           [](std::size_t n, const auto& t) { return n + t->num_episodes(); });
}

std::size_t MultiTaskTeacher::num_examples() const
{
    return std::accumulate(tasks_.begin(), tasks_.end(), std::size_t{0},
                           [](std::size_t n, const auto& t) { return n + t->num_examples(); });
}

std::pair<std::size_t, std::size_t> MultiTaskTeacher::locate(std::size_t index) const
{
    const std::size_t total = num_episodes();
    if (total == 0) throw TaskError("multitask teacher '" + id_ + "' has no episodes");
    index %= total;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        const auto n = tasks_[i]->num_episodes();
        if (index < n) return {i, index};
        index -= n;
    }
    return {tasks_.size() - 1, 0};
}

std::size_t MultiTaskTeacher::episode_length(std::size_t index) const
{
    auto [task, local] = locate(index);
    return tasks_[task]->episode_length(local);
}

void MultiTaskTeacher::start_episode(std::size_t index, std::size_t max_turns)
{
    auto [task, local] = locate(index);
    tasks_[task]->start_episode(local, max_turns);
    current_ = task;
    in_episode_ = true;
}

std::unique_ptr<Teacher> MultiTaskTeacher::clone_shard(std::size_t shard, std::size_t shard_count) const
{
    std::vector<std::unique_ptr<Teacher>> clones;
    clones.reserve(tasks_.size());
    for (const auto& t : tasks_) clones.push_back(t->clone_shard(shard, shard_count));
    const auto seed = shard_count == 1 ? seed_ : mix_seed(seed_, shard);
    return std::make_unique<MultiTaskTeacher>(id_, std::move(clones), mode_, seed, policy_);
}

}  // namespace parley
