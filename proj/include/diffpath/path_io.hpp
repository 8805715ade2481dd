#pragma once

#include "json.hpp"

#include <Eigen/SparseCore>

#include <string>
#include <vector>

#include "diffpath/path_solver.hpp"

namespace diffpath {

// {d, budget_c, lambda_min, termination_reason,
//  knots: [{lambda, event, reason?, event_indices, sign, entries: [{i, j, value}]}]}
nlohmann::json path_to_json(const SolutionPath<double>& path);
SolutionPath<double> path_from_json(const nlohmann::json& doc);

// Tab-separated "var_i\tvar_j\tdelta_value" for nonzero entries with i < j.
// Falls back to 0-based indices when names are empty.
std::string edge_list_tsv(const Eigen::SparseMatrix<double>& delta,
                          const std::vector<std::string>& names = {});

}  // namespace diffpath
