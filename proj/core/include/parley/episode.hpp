#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace parley {

struct Turn {
    std::string text;
    std::vector<std::string> labels;
    std::optional<std::vector<std::string>> label_candidates;
    std::optional<double> reward;

    friend bool operator==(const Turn&, const Turn&) = default;
};

/// One dialog: an ordered, non-empty list of teacher turns.
struct Episode {
    std::vector<Turn> turns;
    std::string source_task;

    friend bool operator==(const Episode&, const Episode&) = default;
};

enum class Split { train, valid, test };

std::string_view to_string(Split split);

/// Which split a teacher streams and whether it walks it in order.
/// valid and test are always ordered; test withholds labels from the
/// emitted messages.
struct DataMode {
    Split split = Split::train;
    bool ordered = false;

    /// Accepts "train", "train:ordered", "valid", "test" (and the
    /// ":ordered" suffix on any of them). Throws std::invalid_argument.
    static DataMode parse(std::string_view text);
    std::string str() const;
    bool withholds_labels() const { return split == Split::test; }

    friend bool operator==(const DataMode&, const DataMode&) = default;
};

struct RawEpisodeSet {
    std::vector<Episode> train;
    std::vector<Episode> valid;
    std::vector<Episode> test;

    const std::vector<Episode>& split(Split s) const;
    std::vector<Episode>& split(Split s);
};

std::size_t count_turns(const std::vector<Episode>& episodes);

}  // namespace parley
