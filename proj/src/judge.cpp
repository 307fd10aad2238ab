#include "vsrag/judge.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace vsrag {

namespace {

bool is_terminal_punct(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == '"' || c == '\'' || c == ')';
}

}  // namespace

std::vector<std::string> normalize_answer_words(std::string_view text) {
  std::string lowered(text);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::istringstream in(lowered);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) {
    while (!w.empty() && is_terminal_punct(w.back())) w.pop_back();
    while (!w.empty() && (w.front() == '"' || w.front() == '\'' || w.front() == '(')) w.erase(w.begin());
    if (!w.empty()) words.push_back(w);
  }
  if (!words.empty() && (words.front() == "a" || words.front() == "an" || words.front() == "the")) {
    words.erase(words.begin());
  }
  return words;
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  for (const auto& w : normalize_answer_words(text)) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

bool judge_answer(std::string_view predicted, std::span<const std::string> gold_answers) {
  const auto pred = normalize_answer_words(predicted);
  if (pred.empty()) return false;
  for (const auto& g : gold_answers) {
    const auto gold = normalize_answer_words(g);
    if (gold.empty() || gold.size() > pred.size()) continue;
    if (std::search(pred.begin(), pred.end(), gold.begin(), gold.end()) != pred.end()) return true;
  }
  return false;
}

}  // namespace vsrag
