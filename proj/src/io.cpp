#include "wellflow/io.hpp"

#include <fstream>
#include <iomanip>

namespace wellflow {

std::string rat_to_string(const Rat& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

Rat rat_from_string(const std::string& s) {
  Rat r;
  if (r.set_str(s, 10) != 0)
    throw std::invalid_argument("bad rational literal: " + s);
  r.canonicalize();
  return r;
}

json trigpoly_to_json(const TrigPoly& f) {
  json terms = json::array();
  for (const auto& [k, cs] : f.terms())
    terms.push_back(json::array({k, cs.c, cs.s}));
  return terms;
}

TrigPoly trigpoly_from_json(const json& j, int dim) {
  TrigPoly f(dim);
  if (!j.is_array())
    throw std::invalid_argument("component: expected a term array");
  for (const auto& t : j) {
    if (!t.is_array() || t.size() != 3 || !t[0].is_array())
      throw std::invalid_argument("term: expected [[k...], cos, sin]");
    f.add_term(t[0].get<Freq>(), t[1].get<double>(), t[2].get<double>());
  }
  return f;
}

namespace {

json components_to_json(const std::vector<TrigPoly>& comps) {
  json out = json::array();
  for (const auto& c : comps) out.push_back(trigpoly_to_json(c));
  return out;
}

std::vector<TrigPoly> components_from_json(const json& j, int dim) {
  if (!j.contains("components") || !j["components"].is_array())
    throw std::invalid_argument("spec: missing 'components' array");
  std::vector<TrigPoly> comps;
  for (const auto& c : j["components"])
    comps.push_back(trigpoly_from_json(c, dim));
  if (static_cast<int>(comps.size()) != dim)
    throw std::invalid_argument("spec: components count != dim");
  return comps;
}

int dim_of(const json& j) {
  if (!j.contains("dim") || !j["dim"].is_number_integer())
    throw std::invalid_argument("spec: missing integer 'dim'");
  return j["dim"].get<int>();
}

}  // namespace

json flow_to_json(const TorusFlow& flow) {
  return {{"dim", flow.dim}, {"components", components_to_json(flow.components)}};
}

TorusFlow flow_from_json(const json& j) {
  const int dim = dim_of(j);
  return TorusFlow(dim, components_from_json(j, dim));
}

json form_to_json(const OneForm& theta) {
  return {{"dim", theta.dim},
          {"form", true},
          {"components", components_to_json(theta.components)}};
}

OneForm form_from_json(const json& j) {
  if (!j.value("form", false))
    throw std::invalid_argument("spec: missing 'form' tag on 1-form file");
  const int dim = dim_of(j);
  return OneForm(dim, components_from_json(j, dim));
}

json potential_to_json(const Potential& V) {
  if (const auto* p = dynamic_cast<const PolynomialPotential*>(&V)) {
    json terms = json::array();
    for (const auto& [e, c] : p->terms()) terms.push_back(json::array({e, c}));
    return {{"type", "polynomial"}, {"dim", p->dim()}, {"terms", terms}};
  }
  if (const auto* p = dynamic_cast<const TrigPotential*>(&V))
    return {{"type", "trig"},
            {"dim", p->dim()},
            {"terms", trigpoly_to_json(p->poly())}};
  if (const auto* p = dynamic_cast<const RbfPotential*>(&V)) {
    json centers = json::array();
    for (int i = 0; i < p->centers().cols(); ++i) {
      json c = json::array();
      for (int d = 0; d < p->centers().rows(); ++d)
        c.push_back(p->centers()(d, i));
      centers.push_back(c);
    }
    json weights = json::array();
    for (int i = 0; i < p->weights().size(); ++i)
      weights.push_back(p->weights()[i]);
    return {{"type", "rbf"},      {"dim", p->dim()},
            {"centers", centers}, {"weights", weights},
            {"sigma", p->sigma()}, {"tau", p->tau()},
            {"radius", p->radius()}};
  }
  throw std::invalid_argument("potential_to_json: unsupported representation");
}

PotentialPtr potential_from_json(const json& j) {
  const std::string type = j.value("type", "");
  const int dim = dim_of(j);
  if (type == "polynomial") {
    std::map<PolynomialPotential::Exponents, double> terms;
    for (const auto& t : j.at("terms"))
      terms[t[0].get<PolynomialPotential::Exponents>()] = t[1].get<double>();
    return std::make_shared<PolynomialPotential>(dim, std::move(terms));
  }
  if (type == "trig")
    return std::make_shared<TrigPotential>(
        trigpoly_from_json(j.at("terms"), dim));
  if (type == "rbf") {
    const auto& jc = j.at("centers");
    Eigen::MatrixXd centers(dim, jc.size());
    for (size_t i = 0; i < jc.size(); ++i)
      for (int d = 0; d < dim; ++d) centers(d, i) = jc[i][d].get<double>();
    const auto& jw = j.at("weights");
    Vec weights(jw.size());
    for (size_t i = 0; i < jw.size(); ++i) weights[i] = jw[i].get<double>();
    return std::make_shared<RbfPotential>(centers, weights,
                                          j.at("sigma").get<double>(),
                                          j.at("tau").get<double>(),
                                          j.at("radius").get<double>());
  }
  throw std::invalid_argument("potential spec: unknown 'type' " + type);
}

json tm_to_json(const TuringMachine& tm) {
  json delta = json::array();
  for (const auto& [key, m] : tm.delta)
    delta.push_back(json::array({tm.states[key.first], key.second,
                                 tm.states[m.q_next], m.write, m.eps}));
  return {{"states", tm.states},
          {"start", tm.states[tm.start]},
          {"halt", tm.states[tm.halt]},
          {"k", tm.k},
          {"delta", delta}};
}

TuringMachine tm_from_json(const json& j) {
  TuringMachine tm;
  tm.states = j.at("states").get<std::vector<std::string>>();
  tm.start = tm.state_index(j.at("start").get<std::string>());
  tm.halt = tm.state_index(j.at("halt").get<std::string>());
  tm.k = j.at("k").get<int>();
  for (const auto& t : j.at("delta")) {
    if (!t.is_array() || t.size() != 5)
      throw std::invalid_argument("tm spec: delta rows are [q,t,q',t',eps]");
    tm.delta[{tm.state_index(t[0].get<std::string>()), t[1].get<int>()}] = {
        tm.state_index(t[2].get<std::string>()), t[3].get<int>(),
        t[4].get<int>()};
  }
  tm.validate();
  return tm;
}

json tape_to_json(const Tape& t) {
  std::vector<int> window;
  for (long n = t.window_first(); n <= t.window_last(); ++n)
    window.push_back(t.at(n));
  return {{"window", window},
          {"first_index", t.window_first()},
          {"left_fill", t.left_fill()},
          {"right_fill", t.right_fill()}};
}

Tape tape_from_json(const json& j) {
  return Tape(j.at("window").get<std::vector<int>>(),
              j.value("first_index", 0L), j.value("left_fill", 0),
              j.value("right_fill", 0));
}

json certificate_to_json(const AdaptedLP& lp, const AdaptedCertificate& cert) {
  json out;
  out["degree"] = lp.K;
  out["eps"] = rat_to_string(lp.eps);
  out["grid_res"] = lp.grid_res;
  out["enclosure_slack"] = rat_to_string(lp.slack);
  out["margin"] = cert.margin;
  if (cert.verdict == AdaptedCertificate::Verdict::Feasible) {
    out["verdict"] = "feasible";
    out["witness"] = form_to_json(cert.witness);
    out["report"] = {{"class", cert.report.class_name()},
                     {"min_thetaY", cert.report.min_thetaY},
                     {"grid_min", cert.report.grid_min},
                     {"margin", cert.report.margin},
                     {"exactness_residual", cert.report.exactness_residual}};
  } else {
    out["verdict"] = "infeasible-at-degree";
    json eq = json::array(), pos = json::array();
    for (const auto& y : cert.farkas_eq) eq.push_back(rat_to_string(y));
    for (const auto& y : cert.farkas_pos) pos.push_back(rat_to_string(y));
    out["farkas"] = {{"equality_multipliers", eq},
                     {"positivity_multipliers", pos},
                     {"positivity_rows", cert.farkas_rows},
                     {"gap", rat_to_string(cert.farkas_gap)},
                     {"residual", rat_to_string(cert.farkas_residual)}};
  }
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  const int n = tr.points.empty() ? 0 : static_cast<int>(tr.points[0].size());
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  os << "\n" << std::setprecision(17);
  for (size_t s = 0; s < tr.times.size(); ++s) {
    os << tr.times[s];
    for (int i = 0; i < n; ++i) os << "," << tr.points[s][i];
    os << "\n";
  }
}

void write_well_csv(std::ostream& os, const WellTrajectory& tr) {
  const int m = tr.states.empty() ? 0 : static_cast<int>(tr.states[0].q.size());
  os << "t";
  for (int i = 1; i <= m; ++i) os << ",q" << i;
  for (int i = 1; i <= m; ++i) os << ",p" << i;
  os << "\n" << std::setprecision(17);
  for (size_t s = 0; s < tr.times.size(); ++s) {
    os << tr.times[s];
    for (int i = 0; i < m; ++i) os << "," << tr.states[s].q[i];
    for (int i = 0; i < m; ++i) os << "," << tr.states[s].p[i];
    os << "\n";
  }
}

void write_orbit_csv(std::ostream& os,
                     const std::vector<std::pair<Rat2, TapePoint>>& orbit) {
  os << "step,z1,z2,u,v\n";
  for (size_t s = 0; s < orbit.size(); ++s)
    os << s << "," << rat_to_string(orbit[s].first.first) << ","
       << rat_to_string(orbit[s].first.second) << ","
       << rat_to_string(orbit[s].second.u) << ","
       << rat_to_string(orbit[s].second.v) << "\n";
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace wellflow
