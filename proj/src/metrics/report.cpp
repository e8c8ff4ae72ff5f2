#include "persona_lab/metrics/report.hpp"

#include <cstdio>
#include <sstream>

#include "persona_lab/common/error.hpp"
#include "persona_lab/metrics/kernels.hpp"

namespace persona_lab::metrics {

using nlohmann::json;
using simulation::Condition;

const ConditionReport* MetricReport::find(Condition c) const {
  for (const auto& r : conditions) {
    if (r.condition == c) return &r;
  }
  return nullptr;
}

std::optional<MbtiMetrics> mbti_metrics(
    const std::vector<simulation::PersonalityPrediction>& predictions,
    const std::map<std::string, assessments::MbtiReport>& gold) {
  std::vector<LabelSample> top1;
  std::vector<PairSample> pairs;
  std::vector<TraitSample> traits;
  for (const auto& p : predictions) {
    auto g = gold.find(p.participant_alias);
    if (g == gold.end() || g->second.types.empty()) continue;
    top1.push_back({p.mbti_top2[0], g->second.types});
    pairs.push_back({p.mbti_top2, g->second.types});
    TraitSample ts;
    ts.predicted = mbti_vector(p.mbti_top2[0]);
    for (const auto& t : g->second.types) ts.gold.push_back(mbti_vector(t));
    traits.push_back(std::move(ts));
  }
  if (top1.empty()) return std::nullopt;
  MbtiMetrics m;
  m.n = top1.size();
  m.top1_exact = exact_match(top1);
  m.hit_at_2 = hit_at_2_rate(pairs);
  for (int k = 0; k <= 4; ++k) m.off_by[static_cast<std::size_t>(k)] = off_by_k(traits, k);
  m.misclass = misclass_rate(traits);
  return m;
}

std::optional<BigFiveMetrics> bigfive_metrics(
    const std::vector<simulation::PersonalityPrediction>& predictions,
    const std::map<std::string, assessments::BigFiveBits>& gold) {
  std::vector<std::pair<assessments::BigFiveBits, assessments::BigFiveBits>> samples;
  for (const auto& p : predictions) {
    auto g = gold.find(p.participant_alias);
    if (g == gold.end()) continue;
    samples.emplace_back(assessments::binarize_bigfive(p.bigfive), g->second);
  }
  if (samples.empty()) return std::nullopt;
  BigFiveMetrics m;
  m.n = samples.size();
  m.match = bigfive_match(samples);
  return m;
}

std::optional<LikertMetrics> likert_metrics(
    const simulation::PredictionSet& set,
    const std::map<std::string, assessments::ItemAnswers>& gold,
    const assessments::Battery& battery) {
  LikertMetrics m;
  std::size_t exact = 0;
  std::size_t near = 0;
  for (const auto& r : set.records) {
    const auto& item = battery.at(r.item_id);
    if (item.qtype != assessments::QType::Likert) continue;
    auto ga = gold.find(r.participant_alias);
    if (ga == gold.end()) continue;
    auto g = ga->second.find(r.item_id);
    if (g == ga->second.end()) continue;
    const int pv = std::get<assessments::LikertAnswer>(r.answer).value;
    const int gv = std::get<assessments::LikertAnswer>(g->second).value;
    ++m.n;
    exact += pv == gv ? 1 : 0;
    near += likert_off_by_one(pv, gv, *item.scale) ? 1 : 0;
  }
  if (m.n == 0) return std::nullopt;
  m.exact = static_cast<double>(exact) / static_cast<double>(m.n);
  m.off_by_one = static_cast<double>(near) / static_cast<double>(m.n);
  return m;
}

MetricReport build_report(const EvaluationInputs& inputs, const EvaluationOptions& options) {
  if (!inputs.battery) throw Error(ErrorCode::InvalidRequest, "evaluation needs a battery");
  if (inputs.sets.empty() && inputs.personality.empty()) {
    throw Error(ErrorCode::EmptyInput, "no predictions to evaluate");
  }
  options.bootstrap.validate();
  const auto& battery = *inputs.battery;

  MetricReport report;
  report.run_id = inputs.run_id;
  if (report.run_id.empty() && !inputs.sets.empty()) report.run_id = inputs.sets.front().run_id;
  report.battery_hash = assessments::battery_hash(battery);
  report.bootstrap = options.bootstrap;
  report.notes = {
      "Ranking items are scored by pairwise concordance with the gold ordering.",
      "Overall accuracy is the unweighted mean of per-question means.",
      "Confidence intervals resample participants (percentile bootstrap).",
      "MBTI distances are taken to the nearest gold type when two are reported."};
  report.gold_probe_consistency = probe_consistency(inputs.gold, battery);

  for (auto condition : interview::kConditions) {
    const simulation::PredictionSet* set = nullptr;
    for (const auto& s : inputs.sets) {
      if (s.condition == condition) set = &s;
    }
    std::vector<simulation::PersonalityPrediction> personality;
    for (const auto& p : inputs.personality) {
      if (p.condition == condition) personality.push_back(p);
    }
    if (!set && personality.empty()) continue;

    ConditionReport cr;
    cr.condition = condition;
    if (set) {
      cr.scored = true;
      cr.gaps = set->gaps.size();
      ScoreMatrix m = build_score_matrix(*set, inputs.gold, battery, &report.warnings);
      check_missing(m, options.missing);
      cr.participants = m.rows().size();
      cr.scored_cells = m.present_count();
      cr.missing_cells = m.missing_count();
      cr.overall = overall_accuracy(m, options.missing);
      if (options.with_ci && m.rows().size() >= 2) {
        cr.overall_ci = bootstrap_ci(m, options.bootstrap, options.missing);
      }
      cr.per_question = per_question(m, options.missing);
      cr.per_qtype = accuracy_by_qtype(m, battery, options.missing);
      cr.likert = likert_metrics(*set, inputs.gold, battery);

      std::map<std::string, assessments::ItemAnswers> predicted;
      for (const auto& r : set->records) predicted[r.participant_alias][r.item_id] = r.answer;
      cr.probe_consistency = probe_consistency(predicted, battery);
    }
    cr.mbti = mbti_metrics(personality, inputs.gold_mbti);
    cr.bigfive = bigfive_metrics(personality, inputs.gold_bigfive);
    if (!set && cr.mbti) cr.participants = cr.mbti->n;
    report.conditions.push_back(std::move(cr));
  }
  return report;
}

namespace {

json rate_json(const RateCell& c) {
  return {{"value", c.value ? json(*c.value) : json(nullptr)}, {"n", c.n}};
}

}  // namespace

json to_json(const MetricReport& report) {
  json conds = json::array();
  for (const auto& c : report.conditions) {
    json j;
    j["condition"] = interview::condition_token(c.condition);
    j["display_name"] = interview::condition_display_name(c.condition);
    j["participants"] = c.participants;
    j["scored_cells"] = c.scored_cells;
    j["missing_cells"] = c.missing_cells;
    j["gaps"] = c.gaps;
    j["overall_accuracy"] = c.scored ? json{{"value", c.overall},
                                            {"ci", c.overall_ci ? to_json(*c.overall_ci)
                                                                : json(nullptr)}}
                                     : json(nullptr);
    json pq = json::array();
    for (const auto& [id, cell] : c.per_question) {
      json e = rate_json(cell);
      e["item_id"] = id;
      pq.push_back(std::move(e));
    }
    j["per_question"] = std::move(pq);
    json pt = json::object();
    for (const auto& [q, cell] : c.per_qtype) pt[std::string(assessments::qtype_name(q))] = rate_json(cell);
    j["per_qtype"] = std::move(pt);
    j["likert"] = c.likert ? json{{"n", c.likert->n},
                                  {"exact", c.likert->exact},
                                  {"off_by_one", c.likert->off_by_one}}
                           : json(nullptr);
    json probes = json::array();
    for (const auto& p : c.probe_consistency) probes.push_back(to_json(p));
    j["probe_consistency"] = std::move(probes);
    if (c.mbti) {
      j["mbti"] = {{"n", c.mbti->n},
                   {"top1_exact", c.mbti->top1_exact},
                   {"hit_at_2", c.mbti->hit_at_2},
                   {"off_by_k", c.mbti->off_by},
                   {"misclass", c.mbti->misclass}};
    } else {
      j["mbti"] = nullptr;
    }
    if (c.bigfive) {
      json dims = json::object();
      for (auto t : assessments::kTraits) {
        dims[std::string(1, assessments::trait_letter(t))] =
            c.bigfive->match[static_cast<std::size_t>(t)];
      }
      j["bigfive"] = {{"n", c.bigfive->n}, {"match", dims}};
    } else {
      j["bigfive"] = nullptr;
    }
    conds.push_back(std::move(j));
  }
  json gold_probes = json::array();
  for (const auto& p : report.gold_probe_consistency) gold_probes.push_back(to_json(p));
  return {{"run_id", report.run_id},
          {"battery_hash", report.battery_hash},
          {"bootstrap",
           {{"B", report.bootstrap.replicates},
            {"level", report.bootstrap.level},
            {"seed", report.bootstrap.seed},
            {"method", "percentile"}}},
          {"conditions", std::move(conds)},
          {"gold_probe_consistency", std::move(gold_probes)},
          {"notes", report.notes},
          {"warnings", report.warnings}};
}

std::vector<MetricRow> flatten(const MetricReport& report) {
  std::vector<MetricRow> rows;
  for (const auto& c : report.conditions) {
    const std::string cond(interview::condition_token(c.condition));
    auto add = [&](std::string metric, std::optional<double> value, std::size_t n) {
      MetricRow r;
      r.metric = std::move(metric);
      r.condition = cond;
      r.value = value;
      r.n = n;
      rows.push_back(std::move(r));
    };
    MetricRow overall;
    overall.metric = "overall_accuracy";
    overall.condition = cond;
    overall.value = c.overall;
    overall.n = c.scored_cells;
    if (c.overall_ci) {
      overall.ci_lo = c.overall_ci->lo;
      overall.ci_hi = c.overall_ci->hi;
      overall.replicates = c.overall_ci->replicates;
      overall.seed = c.overall_ci->seed;
    }
    if (c.scored) rows.push_back(overall);
    for (const auto& [q, cell] : c.per_qtype) {
      add("qtype_accuracy:" + std::string(assessments::qtype_name(q)), cell.value, cell.n);
    }
    for (const auto& [id, cell] : c.per_question) add("question_accuracy:" + id, cell.value, cell.n);
    if (c.likert) {
      add("likert_exact", c.likert->exact, c.likert->n);
      add("likert_off_by_one", c.likert->off_by_one, c.likert->n);
    }
    for (const auto& p : c.probe_consistency) {
      add("probe_consistency:" + p.first + "-" + p.second, p.rate, p.n);
    }
    if (c.mbti) {
      add("mbti_top1_exact", c.mbti->top1_exact, c.mbti->n);
      add("mbti_hit_at_2", c.mbti->hit_at_2, c.mbti->n);
      for (std::size_t k = 1; k < c.mbti->off_by.size(); ++k) {
        add("mbti_off_by_" + std::to_string(k), c.mbti->off_by[k], c.mbti->n);
      }
      add("mbti_misclass", c.mbti->misclass, c.mbti->n);
    }
    if (c.bigfive) {
      for (auto t : assessments::kTraits) {
        add(std::string("bigfive_match:") + assessments::trait_letter(t),
            c.bigfive->match[static_cast<std::size_t>(t)], c.bigfive->n);
      }
    }
  }
  for (const auto& p : report.gold_probe_consistency) {
    MetricRow r;
    r.metric = "probe_consistency:" + p.first + "-" + p.second;
    r.condition = "gold";
    r.value = p.rate;
    r.n = p.n;
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

std::string fmt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

}  // namespace

std::string to_csv(const std::vector<MetricRow>& rows) {
  std::ostringstream out;
  out << "metric,condition,value,ci_lo,ci_hi,n,B,seed\n";
  for (const auto& r : rows) {
    out << r.metric << ',' << r.condition << ',' << fmt(r.value) << ',' << fmt(r.ci_lo) << ','
        << fmt(r.ci_hi) << ',' << r.n << ',';
    if (r.replicates > 0) out << r.replicates << ',' << r.seed;
    else out << ',';
    out << '\n';
  }
  return out.str();
}

}  // namespace persona_lab::metrics
