#include "parley/human/worlds.hpp"

#include "parley/errors.hpp"

#include <charconv>

namespace parley::human {

namespace {

std::string trimmed(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

constexpr std::string_view kAskQuestion = "Please ask a question about the paragraph above.";
constexpr std::string_view kEmptyQuestion = "Your question was empty. Please ask a question about the paragraph.";
constexpr std::string_view kEmptyAnswer = "Your answer was empty. Please answer your question.";
constexpr std::string_view kThanks = "Thanks! Your question and answer were recorded.";
constexpr std::string_view kAskRating =
    "Please rate the bot in this conversation from 1 (poor) to 5 (excellent).";
constexpr std::string_view kBadRating = "Please answer with a whole number from 1 to 5.";

}  // namespace

std::optional<int> parse_rating(std::string_view text)
{
    const std::string t = trimmed(text);
    int value = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
    if (value < kMinRating || value > kMaxRating) return std::nullopt;
    return value;
}

// ---------------------------------------------------------------------------

QACollectorWorld::QACollectorWorld(std::shared_ptr<Agent> human, std::vector<std::string> contexts,
                                   QAStore& store, std::size_t episodes)
    : human_(std::move(human)), contexts_(std::move(contexts)), store_(store), episodes_(episodes)
{
    if (!human_) throw std::invalid_argument("null human agent");
    if (contexts_.empty()) throw std::invalid_argument("no contexts to collect questions about");
}

Message QACollectorWorld::prompt(std::string text, bool episode_done) const
{
    Message m;
    m.id = std::string(kCollectorId);
    m.text = std::move(text);
    m.episode_done = episode_done;
    return m;
}

void QACollectorWorld::parley()
{
    if (epoch_done()) throw ContractViolation("collection is already complete");
    if (episode_done_) {
        episode_done_ = false;
        stage_ = Stage::question;
        retry_ = false;
        question_.clear();
    }
    const std::string& context = contexts_[completed_ % contexts_.size()];

    Message ask;
    if (stage_ == Stage::question) {
        ask = prompt(retry_ ? std::string(kEmptyQuestion) : context + "\n\n" + std::string(kAskQuestion));
    } else {
        ask = prompt(retry_ ? std::string(kEmptyAnswer)
                            : "Now please answer your question: " + question_);
    }
    human_->observe(ask);
    Message reply = human_->act();
    const std::string text = trimmed(reply.text.value_or(""));

    std::vector<Message> step{ask, reply};
    retry_ = text.empty();
    if (!retry_) {
        if (stage_ == Stage::question) {
            question_ = text;
            stage_ = Stage::answer;
        } else {
            store_.append({context, question_, text, human_->id(), utc_timestamp()});
            Message thanks = prompt(std::string(kThanks), true);
            human_->observe(thanks);
            step.push_back(std::move(thanks));
            episode_done_ = true;
            ++completed_;
        }
    }
    last_step_ = std::move(step);
}

std::string QACollectorWorld::display() const
{
    return render_messages(last_step_, episode_done_);
}

void QACollectorWorld::shutdown()
{
    human_->shutdown();
}

// ---------------------------------------------------------------------------

ModelEvaluatorWorld::ModelEvaluatorWorld(std::shared_ptr<Teacher> teacher, std::shared_ptr<Agent> bot,
                                         std::shared_ptr<Agent> rater, RatingStore& store,
                                         std::string task, std::size_t episodes)
    : teacher_(teacher),
      rater_(std::move(rater)),
      inner_(std::move(teacher), std::move(bot)),
      store_(store),
      task_(std::move(task)),
      episodes_(episodes)
{
    if (!rater_) throw std::invalid_argument("null rater");
}

bool ModelEvaluatorWorld::epoch_done() const
{
    if (completed_ >= episodes_) return true;
    return stage_ == Stage::dialog && transcript_.empty() && teacher_->epoch_done();
}

void ModelEvaluatorWorld::parley()
{
    if (epoch_done()) throw ContractViolation("evaluation is already complete");
    if (episode_done_) {
        episode_done_ = false;
        transcript_.clear();
    }

    if (stage_ == Stage::dialog) {
        inner_.parley();
        const auto& step = inner_.last_step();
        if (!step.front().text && step.front().episode_done) {
            // ordered data ran out before a new episode began
            last_step_.clear();
            completed_ = episodes_;
            return;
        }
        try {
            for (const auto& m : step) rater_->observe(m);
        } catch (...) {
            teacher_->abandon_episode();
            transcript_.clear();
            throw;
        }
        transcript_.insert(transcript_.end(), step.begin(), step.end());
        last_step_ = step;
        if (inner_.episode_done()) {
            stage_ = Stage::rating;
            retry_ = false;
        }
        return;
    }

    Message ask;
    ask.id = std::string(kEvaluatorId);
    ask.text = std::string(retry_ ? kBadRating : kAskRating);
    rater_->observe(ask);
    Message reply = rater_->act();
    last_step_ = {ask, reply};

    const auto rating = parse_rating(reply.text.value_or(""));
    retry_ = !rating;
    if (rating) {
        store_.append({task_, transcript_, *rating, rater_->id()});
        stage_ = Stage::dialog;
        episode_done_ = true;
        ++completed_;
    }
}

std::string ModelEvaluatorWorld::display() const
{
    return render_messages(last_step_, episode_done_);
}

void ModelEvaluatorWorld::shutdown()
{
    inner_.shutdown();
    rater_->shutdown();
}

}  // namespace parley::human
