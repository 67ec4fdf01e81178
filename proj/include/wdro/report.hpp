#pragma once
// JSON and CSV emission. Schemas are frozen in FORMATS.md; every document
// carries a "schema" tag and fields appear in a fixed order.

#include <span>
#include <string>
#include <vector>

#include "wdro/attack.hpp"
#include "wdro/certify.hpp"

namespace wdro::report {

std::string certificate_json(const CertificateReport& rep);
std::string masks_csv(const CertificateReport& rep);

std::string adv_json(const AdvDistribution& dist);
/// Rebuilds an AdvDistribution from adv_json output; anchors index into `data`.
AdvDistribution adv_from_json(const std::string& text, std::span<const LabeledSample> data);

std::string evaluation_json(const Evaluation& ev, LossKind kind);
std::string trace_csv(const AttackTrace& trace);

struct WorstCaseSummary {
  double empirical_loss = 0.0;
  double expected_loss = 0.0;
  double canonical_cost = 0.0;
};
std::string worst_case_json(const WorstCaseDistribution& dist, const WorstCaseSummary& summary);

struct Remark1Row {
  double epsilon = 0.0;
  double sup_value = 0.0;
  double best_t = 0.0;
  double best_eta = 0.0;
};
/// Oracle values next to E + eps/2 and the modulus-1 certificate E + eps.
std::string remark1_json(const std::vector<Remark1Row>& rows, double empirical_loss);

}  // namespace wdro::report
