#include "spinbath/chain_state.hpp"

#include "spinbath/errors.hpp"

namespace spinbath {

namespace {

int insertion_index(const std::vector<int>& sites, int new_site) {
  return static_cast<int>(std::lower_bound(sites.begin(), sites.end(), new_site) - sites.begin());
}

}  // namespace

void ChainState::apply_replace(int pos, int new_site, const Eigen::ArrayXd& new_col, double new_log_lik) {
  sites.erase(sites.begin() + pos);
  const int dst = insertion_index(sites, new_site);
  sites.insert(sites.begin() + dst, new_site);

  // Shift the columns between the removal and insertion points, then drop the
  // new column in. memmove-style, one column at a time.
  if (dst > pos) {
    for (int c = pos; c < dst; ++c) mods.col(c) = mods.col(c + 1);
  } else if (dst < pos) {
    for (int c = pos; c > dst; --c) mods.col(c) = mods.col(c - 1);
  }
  mods.col(dst) = new_col;
  log_lik = new_log_lik;
}

void ChainState::apply_birth(int new_site, const Eigen::ArrayXd& new_col, double new_log_lik) {
  const int dst = insertion_index(sites, new_site);
  if (dst < static_cast<int>(sites.size()) && sites[static_cast<std::size_t>(dst)] == new_site) {
    throw ValidationError("birth proposal duplicates an occupied site");
  }
  sites.insert(sites.begin() + dst, new_site);

  Eigen::ArrayXXd grown(mods.rows() == 0 ? new_col.size() : mods.rows(), sites.size());
  if (dst > 0) grown.leftCols(dst) = mods.leftCols(dst);
  grown.col(dst) = new_col;
  const int tail = static_cast<int>(sites.size()) - dst - 1;
  if (tail > 0) grown.rightCols(tail) = mods.rightCols(tail);
  mods.swap(grown);
  log_lik = new_log_lik;
}

void ChainState::apply_death(int pos, double new_log_lik) {
  sites.erase(sites.begin() + pos);

  Eigen::ArrayXXd shrunk(mods.rows(), sites.size());
  if (pos > 0) shrunk.leftCols(pos) = mods.leftCols(pos);
  const int tail = static_cast<int>(sites.size()) - pos;
  if (tail > 0) shrunk.rightCols(tail) = mods.rightCols(tail);
  mods.swap(shrunk);
  log_lik = new_log_lik;
}

}  // namespace spinbath
