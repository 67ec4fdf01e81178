#include "wdro/report.hpp"

#include <sstream>

#include "json.hpp"
#include "wdro/error.hpp"
#include "wdro/io.hpp"

namespace wdro::report {

using Json = nlohmann::ordered_json;

namespace {

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string certificate_json(const CertificateReport& rep) {
  Json j;
  j["schema"] = "wdro-certificate/1";
  j["r"] = std::string(to_string(rep.r));
  j["s"] = std::string(to_string(rep.s));
  j["activation"] = std::string(to_string(rep.activation));
  j["exhaustive"] = rep.exhaustive;
  j["estimate"] = rep.estimate;
  j["L_upper"] = rep.L_upper;
  j["l_lower"] = rep.l_lower;
  j["l_N"] = rep.l_N;
  j["tight"] = rep.tight;
  if (rep.tightness) {
    const auto& t = *rep.tightness;
    Json tj;
    tj["upper_mask"] = rep.per_mask.empty() ? "" : rep.per_mask[t.upper_mask].id;
    tj["rival"] = t.rival;
    tj["true_class"] = t.true_class;
    tj["cone_membership"] = t.cone_membership;
    tj["largest_increment"] = t.largest_increment;
    tj["bounds_agree"] = t.bounds_agree;
    j["tightness"] = tj;
  } else {
    j["tightness"] = nullptr;
  }
  if (rep.witness) {
    const auto& w = *rep.witness;
    Json wj;
    wj["mask"] = w.mask.key();
    wj["rival"] = w.rival;
    wj["true_class"] = w.true_class;
    wj["value"] = w.value;
    wj["u"] = vec_json(w.u);
    j["witness"] = wj;
  } else {
    j["witness"] = nullptr;
  }
  j["skipped_degenerate"] = rep.skipped_degenerate;
  j["mask_count"] = rep.per_mask.size();
  Json masks = Json::array();
  for (const auto& m : rep.per_mask) {
    Json mj;
    mj["id"] = m.id;
    mj["provenance"] = std::string(to_string(m.provenance));
    mj["op_norm"] = m.op_norm;
    mj["cone_value"] = m.cone_value;
    mj["rival"] = m.rival;
    mj["true_class"] = m.true_class;
    mj["all_descent"] = m.all_descent;
    masks.push_back(mj);
  }
  j["per_mask"] = masks;
  return dump(j);
}

std::string masks_csv(const CertificateReport& rep) {
  std::ostringstream out;
  out << "id,provenance,op_norm,cone_value,rival,true_class,all_descent\n";
  for (const auto& m : rep.per_mask)
    out << m.id << ',' << to_string(m.provenance) << ',' << io::format_real(m.op_norm) << ','
        << io::format_real(m.cone_value) << ',' << m.rival << ',' << m.true_class << ','
        << (m.all_descent ? 1 : 0) << '\n';
  return out.str();
}

std::string adv_json(const AdvDistribution& dist) {
  Json j;
  j["schema"] = "wdro-adv/1";
  j["kappa"] = dist.kappa;
  j["epsilon"] = dist.epsilon;
  j["r"] = std::string(to_string(dist.r));
  j["anchor_weight"] = dist.anchor_weight();
  j["adv_weight"] = dist.adv_weight();
  Json pairs = Json::array();
  for (const auto& p : dist.pairs) {
    Json pj;
    pj["anchor"] = p.anchor_index;
    pj["label"] = p.anchor.y;
    pj["adv"] = vec_json(p.adv);
    pairs.push_back(pj);
  }
  j["pairs"] = pairs;
  return dump(j);
}

AdvDistribution adv_from_json(const std::string& text, std::span<const LabeledSample> data) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("adversarial distribution JSON: ") + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != "wdro-adv/1")
      throw Error(ErrorCode::Parse, "unsupported schema tag");
    AdvDistribution dist;
    dist.kappa = j.at("kappa").get<double>();
    dist.epsilon = j.at("epsilon").get<double>();
    dist.r = parse_norm(j.at("r").get<std::string>());
    for (const auto& pj : j.at("pairs")) {
      const auto idx = pj.at("anchor").get<std::size_t>();
      if (idx >= data.size())
        throw Error(ErrorCode::Parse, "anchor index " + std::to_string(idx) + " out of range");
      if (pj.at("label").get<std::size_t>() != data[idx].y)
        throw Error(ErrorCode::LabelMismatch, "pair label differs from the dataset label");
      Vec adv(pj.at("adv").get<std::vector<double>>());
      if (adv.size() != data[idx].x.size())
        throw Error(ErrorCode::DimensionMismatch, "adversarial point dimension");
      dist.pairs.push_back({idx, data[idx], std::move(adv)});
    }
    return dist;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("adversarial distribution JSON: ") + e.what());
  }
}

std::string evaluation_json(const Evaluation& ev, LossKind kind) {
  Json j;
  j["schema"] = "wdro-eval/1";
  j["loss"] = std::string(to_string(kind));
  j["expected_loss"] = ev.expected_loss;
  j["weighted_accuracy"] = ev.weighted_accuracy;
  j["clean_accuracy"] = ev.clean_accuracy;
  j["adv_accuracy"] = ev.adv_accuracy;
  return dump(j);
}

std::string trace_csv(const AttackTrace& trace) {
  std::ostringstream out;
  const std::size_t n =
      trace.samples.empty() || trace.samples[0].iterates.empty() ? 0 : trace.samples[0].iterates[0].size();
  out << "sample,iter,rival";
  for (std::size_t k = 0; k < n; ++k) out << ",x" << k;
  out << '\n';
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    const auto& s = trace.samples[i];
    for (std::size_t t = 1; t < s.iterates.size(); ++t) {
      out << i << ',' << t << ',' << s.rivals[t - 1];
      for (double v : s.iterates[t]) out << ',' << io::format_real(v);
      out << '\n';
    }
  }
  return out.str();
}

std::string worst_case_json(const WorstCaseDistribution& dist, const WorstCaseSummary& summary) {
  Json j;
  j["schema"] = "wdro-worst-case/1";
  j["epsilon"] = dist.epsilon;
  j["r"] = std::string(to_string(dist.r));
  j["root"] = dist.root;
  j["eta"] = dist.eta;
  j["alpha"] = dist.alpha;
  j["distance"] = dist.distance;
  j["slope_shortfall"] = dist.slope_shortfall;
  j["ray_origin"] = vec_json(dist.ray_origin);
  j["ray_direction"] = vec_json(dist.ray_direction);
  Json p;
  p["x"] = vec_json(dist.perturbed.x);
  p["y"] = dist.perturbed.y;
  j["perturbed"] = p;
  j["empirical_loss"] = summary.empirical_loss;
  j["expected_loss"] = summary.expected_loss;
  j["canonical_cost"] = summary.canonical_cost;
  return dump(j);
}

std::string remark1_json(const std::vector<Remark1Row>& rows, double empirical_loss) {
  Json j;
  j["schema"] = "wdro-remark1/1";
  j["empirical_loss"] = empirical_loss;
  Json arr = Json::array();
  for (const auto& r : rows) {
    Json rj;
    rj["epsilon"] = r.epsilon;
    rj["sup"] = r.sup_value;
    rj["half_slope_value"] = empirical_loss + r.epsilon / 2.0;
    rj["lipschitz_certificate"] = empirical_loss + r.epsilon;
    rj["best_t"] = r.best_t;
    rj["best_eta"] = r.best_eta;
    arr.push_back(rj);
  }
  j["results"] = arr;
  return dump(j);
}

}  // namespace wdro::report
