#include "persona_lab/interview/output_parser.hpp"

#include <cstdio>
#include <map>
#include <optional>
#include <regex>
#include <set>

#include "persona_lab/common/error.hpp"
#include "persona_lab/common/text.hpp"

namespace persona_lab::interview {

namespace {

[[noreturn]] void malformed(std::string_view raw, const std::string& reason) {
  throw Error(ErrorCode::MalformedModelOutput, reason,
              {{"raw", std::string(raw)}, {"reason", reason}});
}

// Markdown decoration models like to add around list markers.
std::string strip_decoration(const std::string& line) {
  std::string s = text::trim(line);
  while (!s.empty() && (s[0] == '*' || s[0] == '#' || s[0] == '>' || s[0] == '-')) {
    s = text::trim(s.substr(1));
  }
  return s;
}

std::string strip_emphasis(std::string s) {
  std::string out;
  for (char c : s) {
    if (c != '*') out.push_back(c);
  }
  return text::trim(out);
}

struct Numbered {
  std::string label;
  std::string body;
};

// Collects numbered entries; unnumbered lines continue the current entry and
// lines before the first entry are dropped.
std::vector<Numbered> numbered_entries(std::string_view raw, const std::regex& marker) {
  std::vector<Numbered> out;
  bool open = false;
  for (const auto& line : text::split_lines(raw)) {
    const std::string s = strip_decoration(line);
    std::smatch m;
    if (std::regex_match(s, m, marker)) {
      out.push_back({m[1].str(), strip_emphasis(m[2].str())});
      open = true;
      continue;
    }
    if (s.empty() || s == "---") {
      open = false;
      continue;
    }
    if (open && !out.empty()) {
      out.back().body = text::trim(out.back().body + " " + strip_emphasis(s));
    }
  }
  return out;
}

std::optional<int> domain_by_name(const std::string& label, const DomainRegistry& domains) {
  const std::string norm = text::normalize_label(label);
  for (const auto& d : domains.domains()) {
    if (text::normalize_label(d.name) == norm) return d.domain_id;
  }
  return std::nullopt;
}

// Returns the tagged domain and removes the tag from `body`.
std::optional<int> take_domain_tag(std::string& body, const DomainRegistry& domains) {
  static const std::regex numeric(R"(^[\[(]?\s*domain\s*(\d{1,2})\s*[\])]?\s*(?:[:.\-]|–|—)?\s*)",
                                  std::regex::icase);
  static const std::regex bracketed(R"(^[\[(]([^\])]+)[\])]\s*(?:[:.\-]|–|—)?\s*)");
  static const std::regex trailing(R"(\s*[\[(]\s*domain\s*(\d{1,2})[^\])]*[\])]\s*$)",
                                   std::regex::icase);
  std::smatch m;
  if (std::regex_search(body, m, numeric)) {
    int id = std::stoi(m[1].str());
    body = m.suffix().str();
    return id;
  }
  if (std::regex_search(body, m, bracketed)) {
    std::string inner = m[1].str();
    // "[3. Fears & Deep Motivation]" or "[Fears & Deep Motivation]".
    static const std::regex lead_num(R"(^\s*(\d{1,2})[.)]?\s*(.*)$)");
    std::smatch n;
    std::optional<int> id;
    if (std::regex_match(inner, n, lead_num)) {
      id = std::stoi(n[1].str());
    } else {
      id = domain_by_name(inner, domains);
    }
    if (id) {
      body = m.suffix().str();
      return id;
    }
  }
  if (std::regex_search(body, m, trailing)) {
    int id = std::stoi(m[1].str());
    body = m.prefix().str();
    return id;
  }
  return std::nullopt;
}

std::string strip_purpose_note(std::string body) {
  static const std::regex bracket_note(R"(\s*[\[(][^\[\]()]*[\])]\s*$)");
  static const std::regex labelled_note(
      R"(\s*(?:(?:[-|]|–|—)\s*)?[\[(]?\s*(?:purpose|note|why|goal|aim)\s*:.*$)", std::regex::icase);
  std::smatch m;
  if (std::regex_search(body, m, labelled_note) && m.position(0) > 0) {
    body = m.prefix().str();
  }
  // A bracketed tail after a question mark is a purpose note, not content.
  const auto q = body.rfind('?');
  if (q != std::string::npos && std::regex_search(body, m, bracket_note) &&
      static_cast<std::size_t>(m.position(0)) > q) {
    body = m.prefix().str();
  }
  return text::trim(body);
}

std::string normalized_for_match(std::string_view s) {
  return text::collapse_whitespace(text::to_lower(s));
}

}  // namespace

std::string core_question_id(int position) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "C%02d", position);
  return buf;
}

std::vector<Question> parse_core_questions(std::string_view raw, const DomainRegistry& domains) {
  static const std::regex marker(R"(^(?:Q\s*)?(\d{1,2})\s*[.)]\s*(.*)$)", std::regex::icase);
  auto entries = numbered_entries(raw, marker);
  if (entries.size() != kCoreQuestionCount) {
    malformed(raw, "expected exactly 10 core questions, found " + std::to_string(entries.size()));
  }
  std::vector<Question> out;
  std::set<int> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    std::string body = entries[i].body;
    auto tagged = take_domain_tag(body, domains);
    const int domain = tagged ? *tagged : static_cast<int>(i) + 1;
    body = text::trim(body);
    if (body.empty()) malformed(raw, "core question " + std::to_string(i + 1) + " is empty");
    if (domain < 1 || domain > static_cast<int>(kCoreQuestionCount)) {
      malformed(raw, "domain " + std::to_string(domain) + " is out of range");
    }
    if (!seen.insert(domain).second) {
      malformed(raw, "domain " + std::to_string(domain) + " has more than one question");
    }
    Question q;
    q.question_id = core_question_id(static_cast<int>(i) + 1);
    q.stage = QuestionStage::Core;
    q.domain_id = domain;
    q.text = body;
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Question> parse_followups(std::string_view raw, const FollowUpBounds& bounds,
                                      const SessionState& session) {
  static const std::regex marker(R"(^F\s*(\d{1,2})\s*[.):]\s*(.*)$)", std::regex::icase);
  auto entries = numbered_entries(raw, marker);
  const int n = static_cast<int>(entries.size());
  if (!bounds.contains(n)) {
    malformed(raw, "expected " + std::to_string(bounds.min) + "-" + std::to_string(bounds.max) +
                       " follow-up questions, found " + std::to_string(n));
  }
  static const std::regex qref(R"(\bQ(?:uestion)?\s*#?\s*(\d{1,2})\b)", std::regex::icase);
  static const std::regex quoted(R"((?:"|“)((?:(?!"|“|”).){4,}?)(?:"|”))");
  std::vector<Question> out;
  for (int i = 0; i < n; ++i) {
    const std::string full = entries[i].body;
    std::string body = strip_purpose_note(full);
    if (body.empty()) malformed(raw, "follow-up F" + std::to_string(i + 1) + " is empty");
    Question q;
    q.question_id = "F" + std::to_string(i + 1);
    q.stage = QuestionStage::FollowUp;
    q.text = body;
    std::set<std::string> refs;
    for (auto it = std::sregex_iterator(full.begin(), full.end(), qref);
         it != std::sregex_iterator(); ++it) {
      const int k = std::stoi((*it)[1].str());
      const std::string id = core_question_id(k);
      if (session.find_answer(id)) refs.insert(id);
    }
    for (auto it = std::sregex_iterator(full.begin(), full.end(), quoted);
         it != std::sregex_iterator(); ++it) {
      const std::string phrase = normalized_for_match((*it)[1].str());
      for (const auto& a : session.answers) {
        if (normalized_for_match(a.text).find(phrase) != std::string::npos) {
          refs.insert(a.question_id);
        }
      }
    }
    q.referenced_answer_ids.assign(refs.begin(), refs.end());
    out.push_back(std::move(q));
  }
  return out;
}

PersonaSummary parse_summary(std::string_view raw, const DomainRegistry& domains) {
  PersonaSummary summary;
  summary.full_text = text::trim(raw);
  if (summary.full_text.empty()) malformed(raw, "summary is empty");

  static const std::regex header(R"(^domain\s*(\d{1,2})\b\s*(?:[:.\-)]|–|—)*\s*(.*)$)",
                                 std::regex::icase);
  std::map<int, std::string> sections;
  std::optional<int> current;
  for (const auto& line : text::split_lines(raw)) {
    std::string s = strip_emphasis(strip_decoration(line));
    std::smatch m;
    if (std::regex_match(s, m, header)) {
      current = std::stoi(m[1].str());
      std::string rest = m[2].str();
      // Drop the domain name when the header repeats it.
      for (const auto& d : domains.domains()) {
        if (d.domain_id == *current && text::istarts_with(rest, d.name)) {
          rest = rest.substr(d.name.size());
          while (!rest.empty() && std::string_view(":-.) ").find(rest[0]) != std::string::npos) {
            rest.erase(0, 1);
          }
        }
      }
      if (!rest.empty() && (rest.rfind("–", 0) == 0 || rest.rfind("—", 0) == 0)) {
        rest = rest.substr(3);
      }
      sections[*current] = text::trim(rest);
      continue;
    }
    if (current && !text::trim(s).empty()) {
      auto& body = sections[*current];
      body = text::trim(body + (body.empty() ? "" : " ") + text::trim(s));
    }
  }
  bool complete = true;
  for (const auto& d : domains.domains()) {
    auto it = sections.find(d.domain_id);
    if (it == sections.end() || it->second.empty()) complete = false;
  }
  if (complete && sections.size() == domains.size()) summary.per_domain_insights = sections;
  return summary;
}

}  // namespace persona_lab::interview
