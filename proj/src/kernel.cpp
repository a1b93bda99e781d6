#include "mkagg/kernel.hpp"

namespace mkagg {

KernelMatrix gram_dense(const EmbeddedSet& embedded) {
  if (embedded.size() == 0) throw InvalidArgument("gram: empty embedded set");
  MatrixXd k = MatrixXd::Zero(embedded.size(), embedded.size());
  k.selfadjointView<Eigen::Lower>().rankUpdate(embedded.phi.transpose());
  MatrixXd full = k.selfadjointView<Eigen::Lower>();
  return KernelMatrix(std::move(full));
}

KernelMatrix gram(const EmbeddedSet& embedded) {
  if (embedded.size() == 0) throw InvalidArgument("gram: empty embedded set");
  if (!embedded.block_sparse()) return gram_dense(embedded);

  const auto& assignment = *embedded.assignment;
  const auto& layout = *embedded.block_layout;
  std::vector<std::vector<Index>> by_block(layout.size());
  for (std::size_t i = 0; i < assignment.size(); ++i)
    by_block[static_cast<std::size_t>(assignment[i])].push_back(static_cast<Index>(i));

  BlockDiagonal out;
  out.order = embedded.size();
  for (std::size_t b = 0; b < layout.size(); ++b) {
    if (by_block[b].empty()) continue;
    const auto& members = by_block[b];
    const BlockRange r = layout[b];
    const MatrixXd local = embedded.phi(Eigen::seqN(r.offset, r.size), members);
    MatrixXd kb = MatrixXd::Zero(local.cols(), local.cols());
    kb.selfadjointView<Eigen::Lower>().rankUpdate(local.transpose());
    out.blocks.emplace_back(kb.selfadjointView<Eigen::Lower>());
    out.members.push_back(members);
  }
  return KernelMatrix(std::move(out));
}

KernelMatrix clip_negatives(const KernelMatrix& k) {
  return k.transformed([](MatrixXd& m) { m = m.cwiseMax(0.0); });
}

KernelMatrix threshold_sparsify(const KernelMatrix& k, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("threshold_sparsify: tau must be >= 0");
  return k.transformed([tau](MatrixXd& m) {
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i)
        if (i != j && m(i, j) < tau) m(i, j) = 0.0;
  });
}

Index nonzeros(const KernelMatrix& k) {
  if (!k.is_block()) return (k.dense().array() != 0.0).count();
  Index nnz = 0;
  for (const auto& b : k.blocks().blocks) nnz += (b.array() != 0.0).count();
  return nnz;
}

}  // namespace mkagg
