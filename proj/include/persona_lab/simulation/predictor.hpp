#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "persona_lab/assessments/battery.hpp"
#include "persona_lab/common/clock.hpp"
#include "persona_lab/gateway/backend.hpp"
#include "persona_lab/interview/session.hpp"
#include "persona_lab/simulation/records.hpp"
#include "persona_lab/store/run_store.hpp"

namespace persona_lab::simulation {

// Context rendered as it appears in prediction prompts.
std::string render_context(const interview::ContextBundle& context);

// Greedy, temperature 0, deterministic.
gateway::PromptRequest build_prompt(const interview::ContextBundle& context,
                                    const assessments::DilemmaItem& item);

// Where an excerpt occurs among the session's answers. Pure.
EvidenceLocation locate_evidence(std::string_view excerpt, const interview::SessionState& session);

// Normalized form used for evidence matching: case-folded, whitespace
// collapsed, surrounding quotes and ellipses removed.
std::string normalize_excerpt(std::string_view excerpt);

// Throws MalformedModelOutput or InvalidPredictedAnswer.
PredictionRecord predict(gateway::ModelGateway& gateway, const interview::SessionState& session,
                         Condition condition, const assessments::DilemmaItem& item,
                         const std::string& created_at);

gateway::PromptRequest build_personality_prompt(const interview::ContextBundle& context);

// MBTI top-2 and Big Five 1-40 scores inferred from the context.
PersonalityPrediction predict_personality(gateway::ModelGateway& gateway,
                                          const interview::SessionState& session,
                                          Condition condition, const std::string& created_at);

struct BatchOptions {
  std::string run_id;
  int parallelism = 4;
  // Abort once failed cells exceed this fraction of the cells to attempt.
  double max_failure_rate = 0.2;
  std::uint64_t seed = 0;
  bool personality = false;  // also predict MBTI / Big Five per participant
  nlohmann::json config = nlohmann::json::object();
  Clock clock = clock_from_env();
  std::function<void(std::size_t done, std::size_t total)> progress;
};

// One PredictionSet per condition. Cells already stored for the run are
// skipped; failures become gaps. Throws StageTooEarly up front and
// RunAborted above the failure threshold.
std::vector<PredictionSet> run_batch(gateway::ModelGateway& gateway, store::RunStore& runs,
                                     const std::vector<interview::SessionState>& sessions,
                                     const assessments::Battery& battery,
                                     const std::vector<Condition>& conditions,
                                     const BatchOptions& options);

}  // namespace persona_lab::simulation
