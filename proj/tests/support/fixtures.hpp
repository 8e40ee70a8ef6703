#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "frechet/domain.hpp"
#include "frechet/random.hpp"

namespace frechet::testing {

struct Instance {
  DatasetView data;
  LabelModel model;
  GMatrix g;
};

// n samples spread over signatures (k,) for k < num_signatures.
inline DatasetView dataset_from_ids(const std::vector<int>& ids) {
  std::vector<WeakSignature> raw;
  raw.reserve(ids.size());
  for (int id : ids) raw.push_back({id});
  auto enc = encode_signatures(raw);
  DatasetView d;
  d.signatures = enc.table;
  d.z_ids = enc.ids;
  return d;
}

inline std::vector<double> random_simplex(Rng& rng, int k) {
  std::vector<double> p(static_cast<std::size_t>(k));
  double total = 0.0;
  for (auto& v : p) {
    v = -std::log(1.0 - rng.uniform());  // exponential -> Dirichlet(1)
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

inline LabelModel random_model(Rng& rng, const SignatureTable& table, int k) {
  LabelModel m(k);
  for (const auto& s : table.signatures()) m.set_row(s, random_simplex(rng, k));
  return m;
}

// Every signature observed at least once.
inline Instance random_instance(Rng& rng, std::size_t n, int k, int num_z) {
  std::vector<int> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = i < static_cast<std::size_t>(num_z) ? static_cast<int>(i)
                                                 : static_cast<int>(rng.below(static_cast<std::uint64_t>(num_z)));
  }
  DatasetView d = dataset_from_ids(ids);
  LabelModel m = random_model(rng, *d.signatures, k);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(n), k);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index y = 0; y < g.cols(); ++y) g(i, y) = 2.0 * rng.uniform() - 1.0;
  }
  return {std::move(d), std::move(m), GMatrix(g, 1.0)};
}

// Two samples, one signature, G rows [0,1] and [1,0].
inline Instance two_point(double p1) {
  DatasetView d = dataset_from_ids({0, 0});
  LabelModel m(2);
  m.set_row({0}, {1.0 - p1, p1});
  Eigen::MatrixXd g(2, 2);
  g << 0, 1, 1, 0;
  return {std::move(d), std::move(m), GMatrix(g, 1.0)};
}

inline DualVariables random_dual(Rng& rng, Eigen::Index k, Eigen::Index z, double scale) {
  DualVariables a(k, z);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = scale * (2.0 * rng.uniform() - 1.0);
  return a;
}

}  // namespace frechet::testing

namespace frechet::testing {

// Random coupling with the given marginals by iterative proportional fitting.
inline Eigen::MatrixXd ipf_coupling(Rng& rng, const Eigen::VectorXd& rows, const Eigen::VectorXd& cols) {
  Eigen::MatrixXd pi(rows.size(), cols.size());
  for (Eigen::Index i = 0; i < pi.size(); ++i) pi(i) = 0.05 + rng.uniform();
  for (int sweep = 0; sweep < 5000; ++sweep) {
    for (Eigen::Index i = 0; i < pi.rows(); ++i) {
      const double s = pi.row(i).sum();
      pi.row(i) *= s > 0 ? rows(i) / s : 0.0;
    }
    for (Eigen::Index j = 0; j < pi.cols(); ++j) {
      const double s = pi.col(j).sum();
      pi.col(j) *= s > 0 ? cols(j) / s : 0.0;
    }
    if ((pi.rowwise().sum() - rows).cwiseAbs().maxCoeff() < 1e-15) break;
  }
  return pi;
}

// E_pi[g] for a random coupling of the empirical (X,Z) and model (Y,Z) marginals.
inline double random_coupling_value(Rng& rng, const DatasetView& data, const LabelModel& model,
                                    const GMatrix& g) {
  const Eigen::MatrixXd p = model.aligned(*data.signatures);
  const double n = static_cast<double>(data.n());
  double total = 0.0;
  for (std::size_t z = 0; z < data.num_signatures(); ++z) {
    std::vector<Eigen::Index> members;
    for (std::size_t i = 0; i < data.n(); ++i) {
      if (data.z_ids[i] == z) members.push_back(static_cast<Eigen::Index>(i));
    }
    if (members.empty()) continue;
    const auto m = static_cast<Eigen::Index>(members.size());
    Eigen::VectorXd rows = Eigen::VectorXd::Constant(m, 1.0 / n);
    Eigen::VectorXd cols = p.col(static_cast<Eigen::Index>(z)) * (static_cast<double>(m) / n);
    const Eigen::MatrixXd pi = ipf_coupling(rng, rows, cols);
    for (Eigen::Index r = 0; r < m; ++r) total += pi.row(r).dot(g.values().row(members[static_cast<std::size_t>(r)]));
  }
  return total;
}

}  // namespace frechet::testing
