#pragma once

#include "parley/human/stores.hpp"
#include "parley/teacher.hpp"
#include "parley/world.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace parley::human {

inline constexpr std::string_view kCollectorId = "QACollector";
inline constexpr std::string_view kEvaluatorId = "ModelEvaluator";

/// Scripted collection of question/answer pairs from a human.
///
/// Each episode shows one context and asks for a question about it, then
/// for the answer. Each parley is one prompt and the human's reply. An
/// empty reply repeats the prompt. The pair is stored once both parts are
/// in, and a closing message ends the episode.
class QACollectorWorld : public World {
public:
    QACollectorWorld(std::shared_ptr<Agent> human, std::vector<std::string> contexts, QAStore& store,
                     std::size_t episodes = 1);

    void parley() override;
    std::string display() const override;
    bool episode_done() const override { return episode_done_; }
    bool epoch_done() const override { return completed_ >= episodes_; }
    void shutdown() override;

    std::size_t completed() const { return completed_; }
    const std::vector<Message>& last_step() const { return last_step_; }

private:
    enum class Stage { question, answer };

    Message prompt(std::string text, bool episode_done = false) const;

    std::shared_ptr<Agent> human_;
    std::vector<std::string> contexts_;
    QAStore& store_;
    std::size_t episodes_;

    std::size_t completed_ = 0;
    Stage stage_ = Stage::question;
    bool retry_ = false;
    bool episode_done_ = false;
    std::string question_;
    std::vector<Message> last_step_;
};

/// Shows a human one teacher-vs-bot episode and asks for a rating.
///
/// Each parley is one step of the inner dialog (forwarded to the rater as
/// it happens) or, once the episode is over, one rating prompt. Replies
/// that are not a whole number from 1 to 5 repeat the prompt.
class ModelEvaluatorWorld : public World {
public:
    ModelEvaluatorWorld(std::shared_ptr<Teacher> teacher, std::shared_ptr<Agent> bot,
                        std::shared_ptr<Agent> rater, RatingStore& store, std::string task,
                        std::size_t episodes = 1);

    void parley() override;
    std::string display() const override;
    bool episode_done() const override { return episode_done_; }
    bool epoch_done() const override;
    void shutdown() override;

    /// Messages shown to the rater for the episode in progress or just rated.
    const std::vector<Message>& transcript() const { return transcript_; }
    std::size_t completed() const { return completed_; }

private:
    enum class Stage { dialog, rating };

    std::shared_ptr<Teacher> teacher_;
    std::shared_ptr<Agent> rater_;
    DialogPartnerWorld inner_;
    RatingStore& store_;
    std::string task_;
    std::size_t episodes_;

    std::size_t completed_ = 0;
    Stage stage_ = Stage::dialog;
    bool retry_ = false;
    bool episode_done_ = false;
    std::vector<Message> transcript_;
    std::vector<Message> last_step_;
};

/// Parses a rating reply: a whole number in [kMinRating, kMaxRating],
/// surrounding whitespace allowed.
std::optional<int> parse_rating(std::string_view text);

}  // namespace parley::human
