#include "stabgknock/types.hpp"

namespace sgk {

void DesignTriple::validate() const {
  if (X.rows() < 1 || X.cols() < 1)
    fail_validation("DimensionError", "design matrix must be at least 1x1");
  if (U.size() != X.rows() || Y.size() != X.rows())
    fail_validation("DimensionError", "X, U, Y row counts differ");
  if (!X.allFinite() || !U.allFinite() || !Y.allFinite())
    fail_validation("NonFiniteInput", "dataset contains non-finite values");
  if (!col_names.empty() && static_cast<int>(col_names.size()) != p())
    fail_validation("DimensionError", "column name count does not match p");
}

DesignTriple DesignTriple::rows(const IndexSet& idx) const {
  DesignTriple out;
  out.X = X(idx, Eigen::all);
  out.U = U(idx);
  out.Y = Y(idx);
  out.col_names = col_names;
  return out;
}

DesignTriple DesignTriple::columns(const IndexSet& idx) const {
  DesignTriple out;
  out.X = X(Eigen::all, idx);
  out.U = U;
  out.Y = Y;
  if (!col_names.empty()) {
    out.col_names.reserve(idx.size());
    for (int j : idx) out.col_names.push_back(col_names[j]);
  }
  return out;
}

IndexSet intersect_sets(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool contains_all(const IndexSet& superset, const IndexSet& subset) {
  return std::includes(superset.begin(), superset.end(), subset.begin(), subset.end());
}

}  // namespace sgk
