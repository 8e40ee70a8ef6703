#include "frechet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <optional>
#include <queue>

namespace frechet {

namespace {

constexpr double kMassTolerance = 1e-9;

void check_masses(const TransportInstance& inst) {
  if (inst.costs.rows() != inst.row_mass.size() || inst.costs.cols() != inst.col_mass.size()) {
    throw ArgumentError("transport cost matrix does not match the mass vectors");
  }
  if (!inst.costs.allFinite()) throw ArgumentError("transport costs must be finite");
  auto non_negative = [](const Eigen::VectorXd& v) {
    return v.size() == 0 || v.minCoeff() >= -kMassTolerance;
  };
  if (!non_negative(inst.row_mass) || !non_negative(inst.col_mass)) {
    throw InconsistentError("transport masses must be non-negative");
  }
  if (std::abs(inst.row_mass.sum() - inst.col_mass.sum()) > kMassTolerance) {
    throw InconsistentError("row and column masses differ");
  }
}

class TransportSimplex {
 public:
  TransportSimplex(Eigen::MatrixXd costs, std::vector<double> supply, std::vector<double> demand)
      : c_(std::move(costs)),
        m_(static_cast<std::size_t>(c_.rows())),
        k_(static_cast<std::size_t>(c_.cols())),
        flow_(m_ * k_, 0.0),
        basic_(m_ * k_, false),
        u_(m_),
        v_(k_) {
    northwest_corner(std::move(supply), std::move(demand));
    const double scale = c_.size() > 0 ? c_.cwiseAbs().maxCoeff() : 0.0;
    tolerance_ = 1e-12 * (1.0 + scale);
  }

  double solve() {
    const std::size_t max_pivots = 1000 * (m_ + k_) * (m_ + k_) + 1000;
    for (std::size_t pivot = 0; pivot < max_pivots; ++pivot) {
      compute_potentials();
      const auto entering = find_entering();
      if (!entering) return total_cost();
      pivot_on(*entering);
    }
    throw NumericalError("transportation simplex did not terminate", Eigen::VectorXd());
  }

 private:
  std::size_t cell(std::size_t i, std::size_t j) const { return i * k_ + j; }

  // Staircase path from (0, 0) to (m-1, k-1): always m + k - 1 basic cells,
  // some possibly carrying zero flow.
  void northwest_corner(std::vector<double> supply, std::vector<double> demand) {
    std::size_t i = 0;
    std::size_t j = 0;
    while (true) {
      const double x = std::max(0.0, std::min(supply[i], demand[j]));
      flow_[cell(i, j)] = x;
      basic_[cell(i, j)] = true;
      supply[i] -= x;
      demand[j] -= x;
      if (i == m_ - 1 && j == k_ - 1) break;
      if (i == m_ - 1) {
        ++j;
      } else if (j == k_ - 1) {
        ++i;
      } else if (supply[i] <= demand[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void build_adjacency() {
    row_adj_.assign(m_, {});
    col_adj_.assign(k_, {});
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < k_; ++j) {
        if (basic_[cell(i, j)]) {
          row_adj_[i].push_back(j);
          col_adj_[j].push_back(i);
        }
      }
    }
  }

  // u_i + v_j = c_ij on the basis tree, rooted at u_0 = 0.
  void compute_potentials() {
    build_adjacency();
    std::vector<bool> row_done(m_, false);
    std::vector<bool> col_done(k_, false);
    std::queue<std::pair<bool, std::size_t>> frontier;  // (is_row, index)
    u_[0] = 0.0;
    row_done[0] = true;
    frontier.push({true, 0});
    while (!frontier.empty()) {
      const auto [is_row, idx] = frontier.front();
      frontier.pop();
      if (is_row) {
        for (auto j : row_adj_[idx]) {
          if (col_done[j]) continue;
          v_[j] = c_(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(j)) - u_[idx];
          col_done[j] = true;
          frontier.push({false, j});
        }
      } else {
        for (auto i : col_adj_[idx]) {
          if (row_done[i]) continue;
          u_[i] = c_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(idx)) - v_[idx];
          row_done[i] = true;
          frontier.push({true, i});
        }
      }
    }
  }

  // Lowest-index cell with negative reduced cost.
  std::optional<std::size_t> find_entering() const {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < k_; ++j) {
        if (basic_[cell(i, j)]) continue;
        const double reduced =
            c_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - u_[i] - v_[j];
        if (reduced < -tolerance_) return cell(i, j);
      }
    }
    return std::nullopt;
  }

  // Tree path from row `from` to column `to`, as a list of basic cells.
  std::vector<std::size_t> tree_path(std::size_t from, std::size_t to) const {
    // Nodes: rows are 0..m-1, columns are m..m+k-1.
    const std::size_t none = m_ + k_;
    std::vector<std::size_t> parent(m_ + k_, none);
    std::queue<std::size_t> frontier;
    parent[from] = from;
    frontier.push(from);
    while (!frontier.empty()) {
      const std::size_t node = frontier.front();
      frontier.pop();
      if (node == m_ + to) break;
      if (node < m_) {
        for (auto j : row_adj_[node]) {
          if (parent[m_ + j] == none) {
            parent[m_ + j] = node;
            frontier.push(m_ + j);
          }
        }
      } else {
        for (auto i : col_adj_[node - m_]) {
          if (parent[i] == none) {
            parent[i] = node;
            frontier.push(i);
          }
        }
      }
    }
    std::vector<std::size_t> cells;
    for (std::size_t node = m_ + to; node != from; node = parent[node]) {
      const std::size_t up = parent[node];
      cells.push_back(node < m_ ? cell(node, up - m_) : cell(up, node - m_));
    }
    return cells;  // starts at the cell touching column `to`
  }

  void pivot_on(std::size_t entering) {
    const std::size_t i = entering / k_;
    const std::size_t j = entering % k_;
    const auto path = tree_path(i, j);
    // Signs alternate around the cycle starting with − next to the entering cell.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving = flow_.size();
    for (std::size_t t = 0; t < path.size(); t += 2) {
      const std::size_t c = path[t];
      if (flow_[c] < theta || (flow_[c] == theta && c < leaving)) {
        theta = flow_[c];
        leaving = c;
      }
    }
    for (std::size_t t = 0; t < path.size(); ++t) {
      flow_[path[t]] += (t % 2 == 0) ? -theta : theta;
      flow_[path[t]] = std::max(flow_[path[t]], 0.0);
    }
    flow_[entering] = theta;
    flow_[leaving] = 0.0;
    basic_[leaving] = false;
    basic_[entering] = true;
  }

  double total_cost() const {
    double total = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < k_; ++j) {
        if (basic_[cell(i, j)]) {
          total += flow_[cell(i, j)] * c_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
      }
    }
    return total;
  }

  Eigen::MatrixXd c_;
  std::size_t m_;
  std::size_t k_;
  std::vector<double> flow_;
  std::vector<bool> basic_;
  std::vector<double> u_;
  std::vector<double> v_;
  std::vector<std::vector<std::size_t>> row_adj_;
  std::vector<std::vector<std::size_t>> col_adj_;
  double tolerance_ = 0.0;
};

}  // namespace

double transport_binary(const TransportInstance& inst) {
  check_masses(inst);
  if (inst.costs.cols() != 2) throw ArgumentError("transport_binary needs exactly two columns");
  const Eigen::Index m = inst.costs.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::VectorXd diff = inst.costs.col(1) - inst.costs.col(0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return diff[a] < diff[b]; });
  double cost = inst.row_mass.dot(inst.costs.col(0));
  double remaining = std::max(0.0, inst.col_mass[1]);
  for (auto r : order) {
    if (remaining <= 0.0) break;
    const double take = std::min(std::max(0.0, inst.row_mass[r]), remaining);
    cost += take * diff[r];
    remaining -= take;
  }
  return cost;
}

double transport_general(const TransportInstance& inst) {
  check_masses(inst);
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < inst.row_mass.size(); ++i) {
    if (inst.row_mass[i] > 0.0) rows.push_back(i);
  }
  for (Eigen::Index j = 0; j < inst.col_mass.size(); ++j) {
    if (inst.col_mass[j] > 0.0) cols.push_back(j);
  }
  if (rows.empty() || cols.empty()) return 0.0;

  Eigen::MatrixXd costs(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  std::vector<double> supply;
  std::vector<double> demand;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    supply.push_back(inst.row_mass[rows[a]]);
    for (std::size_t b = 0; b < cols.size(); ++b) {
      costs(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = inst.costs(rows[a], cols[b]);
    }
  }
  for (auto j : cols) demand.push_back(inst.col_mass[j]);
  return TransportSimplex(std::move(costs), std::move(supply), std::move(demand)).solve();
}

OracleResult exact_bounds(const DatasetView& data, const LabelModel& model, const GMatrix& g) {
  const std::size_t n = data.n();
  if (n == 0) throw InsufficientSampleError("no samples");
  if (static_cast<std::size_t>(g.rows()) != n || g.cols() != model.num_classes()) {
    throw ArgumentError("G shape does not match data and label model");
  }
  const std::size_t num_z = data.num_signatures();
  const double size = static_cast<double>(n) * static_cast<double>(g.cols()) * static_cast<double>(num_z);
  if (size > kOracleSizeLimit) {
    throw TooLargeError("oracle instance too large: n*|Y|*|Z| = " + std::to_string(size));
  }
  const Eigen::MatrixXd probs = model.aligned(*data.signatures);
  if ((probs.colwise().sum().array() - 1.0).abs().maxCoeff() > kMassTolerance) {
    throw InconsistentError("label-model rows are not probability vectors");
  }

  std::vector<std::vector<Eigen::Index>> members(num_z);
  for (std::size_t i = 0; i < n; ++i) members[data.z_ids[i]].push_back(static_cast<Eigen::Index>(i));

  OracleResult out;
  const double unit = 1.0 / static_cast<double>(n);
  for (std::size_t z = 0; z < num_z; ++z) {
    const auto& rows = members[z];
    if (rows.empty()) continue;
    TransportInstance inst;
    inst.costs.resize(static_cast<Eigen::Index>(rows.size()), g.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      inst.costs.row(static_cast<Eigen::Index>(r)) = g.values().row(rows[r]);
    }
    inst.row_mass = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(rows.size()), unit);
    inst.col_mass = probs.col(static_cast<Eigen::Index>(z)) * (unit * static_cast<double>(rows.size()));

    auto solve = g.cols() == 2 ? transport_binary : transport_general;
    SignatureContribution part;
    part.z = z;
    part.lower = solve(inst);
    inst.costs = -inst.costs;
    part.upper = -solve(inst);
    out.lower += part.lower;
    out.upper += part.upper;
    out.per_signature.push_back(part);
  }
  return out;
}

}  // namespace frechet
