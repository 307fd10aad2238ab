#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vsrag {

/// Lowercase, trim, collapse whitespace, strip trailing punctuation from each word and a
/// leading article (a / an / the).
std::vector<std::string> normalize_answer_words(std::string_view text);
std::string normalize_answer(std::string_view text);

/// True iff the normalized prediction equals a normalized gold answer or contains it as a
/// run of whole words.
bool judge_answer(std::string_view predicted, std::span<const std::string> gold_answers);

}  // namespace vsrag
