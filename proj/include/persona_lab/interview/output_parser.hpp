#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "persona_lab/interview/config.hpp"
#include "persona_lab/interview/domains.hpp"
#include "persona_lab/interview/session.hpp"

namespace persona_lab::interview {

// Numbered "1." / "1)" lines, optionally tagged "[Domain k]", "(Domain k)",
// "Domain k:" or "[<domain name>]". Untagged questions take the domain of their
// position. Ids are C01..C10. Throws Error(MalformedModelOutput) with
// details {"raw", "reason"} unless there are exactly ten non-empty questions
// covering every domain once.
std::vector<Question> parse_core_questions(std::string_view raw, const DomainRegistry& domains);

// "F1." lines with any trailing purpose note removed. Ids are F1..Fn in output
// order. References to earlier answers come from "Q<k>" mentions and quoted
// phrases found in an answer. Throws Error(MalformedModelOutput) when the count
// is outside `bounds` or a question is empty.
std::vector<Question> parse_followups(std::string_view raw, const FollowUpBounds& bounds,
                                      const SessionState& session);

// Sections headed "Domain k". When all ten domains have text the per-domain map
// is filled; otherwise only full_text is kept. Throws Error(MalformedModelOutput)
// for an empty reply.
PersonaSummary parse_summary(std::string_view raw, const DomainRegistry& domains);

std::string core_question_id(int position);

}  // namespace persona_lab::interview
