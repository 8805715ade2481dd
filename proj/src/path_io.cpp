#include "diffpath/path_io.hpp"

#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace diffpath {

const char* to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::Hit:
      return "hit";
    case EventKind::Cross:
      return "cross";
    case EventKind::Terminal:
      return "terminal";
  }
  return "unknown";
}

const char* to_string(Termination reason) noexcept {
  switch (reason) {
    case Termination::Running:
      return "running";
    case Termination::ZeroDifference:
      return "zero_difference";
    case Termination::BudgetExceeded:
      return "budget_exceeded";
    case Termination::SingularActiveSet:
      return "singular_active_set";
    case Termination::LambdaMin:
      return "lambda_min";
    case Termination::NoMoreEvents:
      return "no_more_events";
  }
  return "unknown";
}

namespace {

EventKind event_from_string(const std::string& s) {
  if (s == "hit") return EventKind::Hit;
  if (s == "cross") return EventKind::Cross;
  if (s == "terminal") return EventKind::Terminal;
  throw std::invalid_argument("unknown event kind '" + s + "'");
}

Termination termination_from_string(const std::string& s) {
  for (const auto r : {Termination::Running, Termination::ZeroDifference, Termination::BudgetExceeded,
                       Termination::SingularActiveSet, Termination::LambdaMin, Termination::NoMoreEvents}) {
    if (s == to_string(r)) return r;
  }
  throw std::invalid_argument("unknown termination reason '" + s + "'");
}

}  // namespace

nlohmann::json path_to_json(const SolutionPath<double>& path) {
  using nlohmann::json;
  json doc;
  doc["d"] = path.dim;
  doc["budget_c"] = path.budget_c;
  doc["lambda_min"] = path.lambda_min;
  doc["termination_reason"] = to_string(path.termination);
  json knots = json::array();
  for (const auto& knot : path.knots) {
    json k;
    k["lambda"] = knot.lambda;
    k["event"] = to_string(knot.event.kind);
    if (knot.event.kind == EventKind::Terminal) k["reason"] = to_string(knot.event.reason);
    json idx = json::array();
    for (const VecIndex e : knot.event.indices) idx.push_back(e.value);
    k["event_indices"] = idx;
    k["sign"] = knot.event.sign;
    json entries = json::array();
    // Column-major traversal, same order as vec indices.
    for (int col = 0; col < knot.delta.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(knot.delta, col); it; ++it) {
        entries.push_back({{"i", it.row()}, {"j", it.col()}, {"value", it.value()}});
      }
    }
    k["entries"] = entries;
    json active = json::array();
    for (std::size_t a = 0; a < knot.active.size(); ++a) {
      active.push_back({knot.active[a].value, knot.signs[a]});
    }
    k["active"] = active;
    knots.push_back(std::move(k));
  }
  doc["knots"] = knots;
  return doc;
}

SolutionPath<double> path_from_json(const nlohmann::json& doc) {
  SolutionPath<double> path;
  path.dim = doc.at("d").get<Index>();
  path.budget_c = doc.value("budget_c", Index(0));
  path.lambda_min = doc.value("lambda_min", 0.0);
  path.termination = termination_from_string(doc.at("termination_reason").get<std::string>());
  const Index d = path.dim;
  for (const auto& k : doc.at("knots")) {
    Knot<double> knot;
    knot.lambda = k.at("lambda").get<double>();
    knot.event.kind = event_from_string(k.at("event").get<std::string>());
    if (k.contains("reason")) knot.event.reason = termination_from_string(k.at("reason").get<std::string>());
    for (const auto& e : k.value("event_indices", nlohmann::json::array())) {
      knot.event.indices.push_back(VecIndex{e.get<Index>()});
    }
    knot.event.sign = k.value("sign", 0);
    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& entry : k.at("entries")) {
      const Index i = entry.at("i").get<Index>();
      const Index j = entry.at("j").get<Index>();
      if (i < 0 || j < 0 || i >= d || j >= d) throw std::out_of_range("path_from_json: entry outside d x d");
      triplets.emplace_back(i, j, entry.at("value").get<double>());
    }
    knot.delta.resize(d, d);
    knot.delta.setFromTriplets(triplets.begin(), triplets.end());
    for (const auto& a : k.value("active", nlohmann::json::array())) {
      knot.active.push_back(VecIndex{a.at(0).get<Index>()});
      knot.signs.push_back(a.at(1).get<int>());
    }
    path.knots.push_back(std::move(knot));
  }
  return path;
}

std::string edge_list_tsv(const Eigen::SparseMatrix<double>& delta, const std::vector<std::string>& names) {
  const auto name = [&](Index i) {
    return static_cast<std::size_t>(i) < names.size() ? names[static_cast<std::size_t>(i)] : std::to_string(i);
  };
  std::map<std::pair<Index, Index>, double> upper;
  for (int col = 0; col < delta.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(delta, col); it; ++it) {
      if (it.row() < it.col() && it.value() != 0.0) upper[{it.row(), it.col()}] = it.value();
    }
  }
  std::ostringstream out;
  out << "var_i\tvar_j\tdelta_value\n";
  char buf[64];
  for (const auto& [ij, value] : upper) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out << name(ij.first) << '\t' << name(ij.second) << '\t' << buf << '\n';
  }
  return out.str();
}

}  // namespace diffpath
