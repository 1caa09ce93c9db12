#include "parley/episode.hpp"

#include <numeric>
#include <stdexcept>

namespace parley {

std::string_view to_string(Split split)
{
    switch (split) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
    }
    return "train";
}

DataMode DataMode::parse(std::string_view text)
{
    constexpr std::string_view kOrdered = ":ordered";
    bool ordered = false;
    if (text.size() > kOrdered.size() && text.ends_with(kOrdered)) {
        ordered = true;
        text.remove_suffix(kOrdered.size());
    }
    DataMode mode;
    if (text == "train") {
        mode.split = Split::train;
        mode.ordered = ordered;
    } else if (text == "valid") {
        mode.split = Split::valid;
        mode.ordered = true;
    } else if (text == "test") {
        mode.split = Split::test;
        mode.ordered = true;
    } else {
        throw std::invalid_argument("unknown datatype '" + std::string(text) + "'");
    }
    return mode;
}

std::string DataMode::str() const
{
    std::string out(to_string(split));
    if (split == Split::train && ordered) out += ":ordered";
    return out;
}

const std::vector<Episode>& RawEpisodeSet::split(Split s) const
{
    switch (s) {
        case Split::train: return train;
        case Split::valid: return valid;
        case Split::test: return test;
    }
    return train;
}

std::vector<Episode>& RawEpisodeSet::split(Split s)
{
    return const_cast<std::vector<Episode>&>(std::as_const(*this).split(s));
}

std::size_t count_turns(const std::vector<Episode>& episodes)
{
    return std::accumulate(episodes.begin(), episodes.end(), std::size_t{0},
                           [](std::size_t n, const Episode& e) { return n + e.turns.size(); });
}

}  // namespace parley
