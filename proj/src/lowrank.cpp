#include "eggroll/lowrank.hpp"

#include <Eigen/SVD>
#include <iostream>
#include <mutex>
#include <set>

namespace eggroll {

namespace {
WarnHandler g_warn = nullptr;
std::mutex g_warn_mutex;
std::set<std::string> g_warned;
}

void set_warn_handler(WarnHandler h) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  g_warn = h;
  g_warned.clear();
}

// Each distinct message is emitted once; population loops would otherwise
// repeat the same warning per member.
void warn(const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  if (!g_warned.insert(msg).second) return;
  if (g_warn)
    g_warn(msg);
  else
    std::cerr << "[warn] " << msg << "\n";
}

int numerical_rank(const MatrixD& m, double tol_rel) {
  Eigen::JacobiSVD<MatrixD> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = tol_rel * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return rank;
}

}  // namespace eggroll
