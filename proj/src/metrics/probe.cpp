#include "persona_lab/metrics/probe.hpp"

#include "persona_lab/common/error.hpp"

namespace persona_lab::metrics {

using assessments::answer_key;

bool probe_consistent(const assessments::DilemmaItem& a, const assessments::Answer& answer_a,
                      const assessments::DilemmaItem& b, const assessments::Answer& answer_b) {
  if (a.probe_alignment) {
    return answer_key(assessments::align_partner_answer(a, b, answer_b)) == answer_key(answer_a);
  }
  if (b.probe_alignment) {
    return answer_key(assessments::align_partner_answer(b, a, answer_a)) == answer_key(answer_b);
  }
  throw Error(ErrorCode::MissingAlignment,
              "probe pair " + a.item_id + "/" + b.item_id + " has no alignment",
              {{"item", a.item_id}});
}

std::vector<ProbeResult> probe_consistency(
    const std::map<std::string, assessments::ItemAnswers>& answers,
    const assessments::Battery& battery) {
  std::vector<ProbeResult> out;
  for (const auto& item : battery.items) {
    if (!item.probe_partner) continue;
    const auto& partner = battery.at(*item.probe_partner);
    if (partner.number() < item.number()) continue;
    ProbeResult r;
    r.first = item.item_id;
    r.second = partner.item_id;
    if (!item.probe_alignment && !partner.probe_alignment) {
      throw Error(ErrorCode::MissingAlignment,
                  "probe pair " + r.first + "/" + r.second + " has no alignment",
                  {{"item", r.first}});
    }
    for (const auto& [alias, set] : answers) {
      auto a = set.find(item.item_id);
      auto b = set.find(partner.item_id);
      if (a == set.end() || b == set.end()) continue;
      ++r.n;
      if (probe_consistent(item, a->second, partner, b->second)) ++r.consistent;
    }
    if (r.n > 0) r.rate = static_cast<double>(r.consistent) / static_cast<double>(r.n);
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json to_json(const ProbeResult& r) {
  nlohmann::json j = {{"pair", {r.first, r.second}}, {"n", r.n}, {"consistent", r.consistent}};
  j["rate"] = r.rate ? nlohmann::json(*r.rate) : nlohmann::json(nullptr);
  return j;
}

}  // namespace persona_lab::metrics
