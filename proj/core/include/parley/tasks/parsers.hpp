#pragma once

#include "parley/episode.hpp"

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace parley::tasks {

/// bAbI story format: `N statement` or `N question<TAB>answer[<TAB>ids]`.
///
/// N == 1 starts a new story. Every question becomes one turn whose text is
/// all statements seen so far in the story followed by the question,
/// newline separated. Answers split on `|`. Supporting-fact ids are read
/// and dropped. Stories without questions produce no episode.
/// Throws TaskError on non-increasing line numbers or a missing answer.
std::vector<Episode> parse_babi(std::istream& in, std::string_view source);

/// fbdialog format: `N text[<TAB>labels[<TAB>reward[<TAB>candidates]]]`.
///
/// One turn per line; labels and candidates split on `|`; blank fields are
/// allowed; N == 1 starts a new episode. Text fields understand the escapes
/// `\n`, `\t` and `\\`. Throws TaskError on more than four fields, a bad
/// reward or non-increasing line numbers.
std::vector<Episode> parse_fbdialog(std::istream& in, std::string_view source);

/// SQuAD v1.1 JSON (data -> paragraphs -> qas -> answers). One single-turn
/// episode per question: context, newline, question. Labels are the
/// distinct answer texts; character offsets are not carried over.
/// Throws TaskError on malformed JSON or missing keys.
std::vector<Episode> parse_squad(std::string_view json_text, std::string_view source);

/// Inverse of the fbdialog text escapes.
std::string escape_fbdialog(std::string_view text);

}  // namespace parley::tasks
