#include "gadnr/tape.hpp"

#include <algorithm>
#include <cmath>

#include "gadnr/errors.hpp"
#include "gadnr/hungarian.hpp"
#include "gadnr/kernels.hpp"

namespace gadnr::ad {

Matrix SparseMatrix::multiply(const Matrix& x) const {
  if (cols != x.rows) throw NumericError("sparse_matmul: inner dimensions disagree");
  Matrix y(rows, x.cols);
  const auto n = static_cast<std::size_t>(x.cols);
  for (int i = 0; i < rows; ++i) {
    double* yi = y.row(i);
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      kernels::axpy(yi, vals[k], x.row(col_idx[k]), n);
  }
  return y;
}

Matrix SparseMatrix::multiply_transpose(const Matrix& x) const {
  if (rows != x.rows) throw NumericError("sparse_matmul^T: inner dimensions disagree");
  Matrix y(cols, x.cols);
  const auto n = static_cast<std::size_t>(x.cols);
  for (int i = 0; i < rows; ++i) {
    const double* xi = x.row(i);
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      kernels::axpy(y.row(col_idx[k]), vals[k], xi, n);
  }
  return y;
}

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::leaf: return "leaf";
    case OpKind::constant: return "constant";
    case OpKind::matmul: return "matmul";
    case OpKind::matmul_tn: return "matmul_tn";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::add_bias_row: return "add_bias_row";
    case OpKind::relu: return "relu";
    case OpKind::tanh_op: return "tanh";
    case OpKind::exp_op: return "exp";
    case OpKind::clamp: return "clamp";
    case OpKind::scale: return "scale";
    case OpKind::sparse_matmul: return "sparse_matmul";
    case OpKind::gather_rows: return "gather_rows";
    case OpKind::rowwise_sqnorm: return "rowwise_sqnorm";
    case OpKind::sum: return "sum";
    case OpKind::mean_rows: return "mean_rows";
    case OpKind::mse: return "mse";
    case OpKind::stack_scalars: return "stack_scalars";
    case OpKind::diag_mask: return "diag_mask";
    case OpKind::gaussian_kl: return "gaussian_kl";
    case OpKind::gaussian_kl_samples: return "gaussian_kl_samples";
    case OpKind::hungarian_ot: return "hungarian_ot";
  }
  return "?";
}

void Tape::check_finite(const Matrix& m, OpKind kind) const {
  if (!all_finite(m))
    throw NumericError(std::string("non-finite output of op '") + op_name(kind) + "'");
}

Val Tape::push(Node n) {
  check_finite(n.value, n.kind);
  nodes_.push_back(std::move(n));
  return static_cast<Val>(nodes_.size() - 1);
}

Matrix& Tape::ensure_grad(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && n.value.size() > 0) n.grad = Matrix(n.value.rows, n.value.cols);
  return n.grad;
}

Val Tape::leaf(DTensor& t) {
  auto it = leaf_ids_.find(&t);
  if (it != leaf_ids_.end()) return it->second;
  Node n;
  n.kind = OpKind::leaf;
  n.value = t.value;
  n.requires_grad = t.requires_grad;
  n.bound = &t;
  const Val id = push(std::move(n));
  leaf_ids_.emplace(&t, id);
  return id;
}

Val Tape::constant(Matrix m) {
  Node n;
  n.kind = OpKind::constant;
  n.value = std::move(m);
  return push(std::move(n));
}

Val Tape::matmul(Val a, Val b) {
  Node n;
  n.kind = OpKind::matmul;
  n.inputs = {a, b};
  n.value = gadnr::matmul(nodes_[a].value, nodes_[b].value);
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

Val Tape::matmul_tn(Val a, Val b) {
  Node n;
  n.kind = OpKind::matmul_tn;
  n.inputs = {a, b};
  n.value = gadnr::matmul_tn(nodes_[a].value, nodes_[b].value);
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

Val Tape::add(Val a, Val b) {
  const Matrix& va = nodes_[a].value;
  const Matrix& vb = nodes_[b].value;
  if (!va.same_shape(vb)) throw NumericError("add: shape mismatch");
  Node n;
  n.kind = OpKind::add;
  n.inputs = {a, b};
  n.value = Matrix(va.rows, va.cols);
  kernels::add(n.value.data.data(), va.data.data(), vb.data.data(), va.size());
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

Val Tape::sub(Val a, Val b) {
  const Matrix& va = nodes_[a].value;
  const Matrix& vb = nodes_[b].value;
  if (!va.same_shape(vb)) throw NumericError("sub: shape mismatch");
  Node n;
  n.kind = OpKind::sub;
  n.inputs = {a, b};
  n.value = Matrix(va.rows, va.cols);
  kernels::sub(n.value.data.data(), va.data.data(), vb.data.data(), va.size());
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

Val Tape::mul(Val a, Val b) {
  const Matrix& va = nodes_[a].value;
  const Matrix& vb = nodes_[b].value;
  if (!va.same_shape(vb)) throw NumericError("mul: shape mismatch");
  Node n;
  n.kind = OpKind::mul;
  n.inputs = {a, b};
  n.value = Matrix(va.rows, va.cols);
  kernels::mul(n.value.data.data(), va.data.data(), vb.data.data(), va.size());
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

Val Tape::add_bias_row(Val a, Val bias) {
  const Matrix& va = nodes_[a].value;
  const Matrix& vb = nodes_[bias].value;
  if (vb.rows != 1 || vb.cols != va.cols) throw NumericError("add_bias_row: shape mismatch");
  Node n;
  n.kind = OpKind::add_bias_row;
  n.inputs = {a, bias};
  n.value = Matrix(va.rows, va.cols);
  for (int i = 0; i < va.rows; ++i)
    kernels::add(n.value.row(i), va.row(i), vb.row(0), static_cast<std::size_t>(va.cols));
  n.requires_grad = nodes_[a].requires_grad || nodes_[bias].requires_grad;
  return push(std::move(n));
}

Val Tape::relu(Val a) {
  const Matrix& va = nodes_[a].value;
  Node n;
  n.kind = OpKind::relu;
  n.inputs = {a};
  n.value = Matrix(va.rows, va.cols);
  kernels::relu(n.value.data.data(), va.data.data(), va.size());
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

Val Tape::tanh(Val a) {
  const Matrix& va = nodes_[a].value;
  Node n;
  n.kind = OpKind::tanh_op;
  n.inputs = {a};
  n.value = Matrix(va.rows, va.cols);
  for (std::size_t i = 0; i < va.size(); ++i) n.value.data[i] = std::tanh(va.data[i]);
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

Val Tape::exp(Val a) {
  const Matrix& va = nodes_[a].value;
  Node n;
  n.kind = OpKind::exp_op;
  n.inputs = {a};
  n.value = Matrix(va.rows, va.cols);
  for (std::size_t i = 0; i < va.size(); ++i) n.value.data[i] = std::exp(va.data[i]);
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

Val Tape::clamp(Val a, double lo, double hi) {
  const Matrix& va = nodes_[a].value;
  Node n;
  n.kind = OpKind::clamp;
  n.inputs = {a};
  n.c0 = lo;
  n.c1 = hi;
  n.value = Matrix(va.rows, va.cols);
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double v = va.data[i];
    n.value.data[i] = v < lo ? lo : (v > hi ? hi : v);
  }
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

Val Tape::scale(Val a, double c) {
  const Matrix& va = nodes_[a].value;
  Node n;
  n.kind = OpKind::scale;
  n.inputs = {a};
  n.c0 = c;
  n.value = Matrix(va.rows, va.cols);
  kernels::scal(n.value.data.data(), c, va.data.data(), va.size());
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

Val Tape::sparse_matmul(const SparseMatrix& s, Val a) {
  Node n;
  n.kind = OpKind::sparse_matmul;
  n.inputs = {a};
  n.sparse = &s;
  n.value = s.multiply(nodes_[a].value);
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

Val Tape::gather_rows(Val a, std::vector<int> index) {
  const Matrix& va = nodes_[a].value;
  for (int i : index) {
    if (i < 0 || i >= va.rows) throw NumericError("gather_rows: index out of range");
  }
  Node n;
  n.kind = OpKind::gather_rows;
  n.inputs = {a};
  n.value = Matrix(static_cast<int>(index.size()), va.cols);
  for (std::size_t r = 0; r < index.size(); ++r)
    std::copy_n(va.row(index[r]), va.cols, n.value.row(static_cast<int>(r)));
  n.index = std::move(index);
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

Val Tape::rowwise_sqnorm(Val a) {
  const Matrix& va = nodes_[a].value;
  Node n;
  n.kind = OpKind::rowwise_sqnorm;
  n.inputs = {a};
  n.value = Matrix(va.rows, 1);
  for (int i = 0; i < va.rows; ++i)
    n.value(i, 0) = kernels::dot(va.row(i), va.row(i), static_cast<std::size_t>(va.cols));
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

Val Tape::sum(Val a) {
  const Matrix& va = nodes_[a].value;
  Node n;
  n.kind = OpKind::sum;
  n.inputs = {a};
  n.value = Matrix(1, 1);
  n.value(0, 0) = kernels::sum(va.data.data(), va.size());
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

Val Tape::mean_rows(Val a) {
  const Matrix& va = nodes_[a].value;
  if (va.rows == 0) throw NumericError("mean_rows: empty input");
  Node n;
  n.kind = OpKind::mean_rows;
  n.inputs = {a};
  n.value = Matrix(1, va.cols);
  for (int i = 0; i < va.rows; ++i)
    kernels::axpy(n.value.row(0), 1.0 / va.rows, va.row(i), static_cast<std::size_t>(va.cols));
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

Val Tape::mse(Val a, Val b) {
  const Matrix& va = nodes_[a].value;
  const Matrix& vb = nodes_[b].value;
  if (!va.same_shape(vb)) throw NumericError("mse: shape mismatch");
  Node n;
  n.kind = OpKind::mse;
  n.inputs = {a, b};
  n.value = Matrix(1, 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va.data[i] - vb.data[i];
    acc += d * d;
  }
  n.value(0, 0) = acc / static_cast<double>(va.size());
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

Val Tape::stack_scalars(const std::vector<Val>& parts) {
  Node n;
  n.kind = OpKind::stack_scalars;
  n.value = Matrix(static_cast<int>(parts.size()), 1);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Matrix& v = nodes_[parts[i]].value;
    if (v.rows != 1 || v.cols != 1) throw NumericError("stack_scalars: non-scalar input");
    n.value(static_cast<int>(i), 0) = v(0, 0);
    n.requires_grad = n.requires_grad || nodes_[parts[i]].requires_grad;
  }
  n.inputs.assign(parts.begin(), parts.end());
  return push(std::move(n));
}

Val Tape::diag_mask(Val a) {
  const Matrix& va = nodes_[a].value;
  if (va.rows != va.cols) throw NumericError("diag_mask: matrix not square");
  Node n;
  n.kind = OpKind::diag_mask;
  n.inputs = {a};
  n.value = Matrix(va.rows, va.cols);
  for (int i = 0; i < va.rows; ++i) n.value(i, i) = va(i, i);
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

Val Tape::gaussian_kl(const Matrix& mu1, const Matrix& cov1, Val mu2, Val cov2, double c) {
  Node n;
  n.kind = OpKind::gaussian_kl;
  n.inputs = {mu2, cov2};
  n.kl = std::make_unique<GaussianKl>(
      gaussian_kl_with_grad(mu1, cov1, nodes_[mu2].value, nodes_[cov2].value, c));
  n.value = Matrix(1, 1);
  n.value(0, 0) = n.kl->value;
  n.requires_grad = nodes_[mu2].requires_grad || nodes_[cov2].requires_grad;
  return push(std::move(n));
}

Val Tape::gaussian_kl_samples(const Matrix& mu1, const Matrix& cov1, Val samples, double c,
                              bool diagonal_cov) {
  const Matrix& h = nodes_[samples].value;
  const int q = h.rows;
  const int p = h.cols;
  if (q < 2) throw NumericError("gaussian_kl_samples: need at least 2 samples");

  Moments mom = empirical_moments(h);
  if (diagonal_cov) {
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) {
        if (i != j) mom.cov(i, j) = 0.0;
      }
  }
  auto kl = std::make_unique<GaussianKl>(gaussian_kl_with_grad(mu1, cov1, mom.mean, mom.cov, c));
  if (diagonal_cov) {
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) {
        if (i != j) kl->d_cov2(i, j) = 0.0;
      }
  }

  // Backward payload: centered samples; d/dh_i = g_mu/q + 2/(q-1) * gS (h_i - mean).
  auto centered = std::make_unique<Matrix>(q, p);
  for (int i = 0; i < q; ++i)
    kernels::sub(centered->row(i), h.row(i), mom.mean.row(0), static_cast<std::size_t>(p));

  Node n;
  n.kind = OpKind::gaussian_kl_samples;
  n.inputs = {samples};
  n.kl = std::move(kl);
  n.residual = std::move(centered);
  n.value = Matrix(1, 1);
  n.value(0, 0) = n.kl->value;
  n.requires_grad = nodes_[samples].requires_grad;
  return push(std::move(n));
}

Val Tape::hungarian_ot(Val samples, const Matrix& targets) {
  const Matrix& s = nodes_[samples].value;
  if (s.rows != targets.rows || s.cols != targets.cols)
    throw NumericError("hungarian_ot: sample/target shape mismatch");
  const int d = s.rows;
  const int p = s.cols;
  Matrix cost(d, d);
  std::vector<double> diff(static_cast<std::size_t>(p));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      kernels::sub(diff.data(), s.row(i), targets.row(j), static_cast<std::size_t>(p));
      cost(i, j) = kernels::dot(diff.data(), diff.data(), static_cast<std::size_t>(p));
    }
  const Assignment asg = hungarian_min_cost(cost);

  Node n;
  n.kind = OpKind::hungarian_ot;
  n.inputs = {samples};
  n.residual = std::make_unique<Matrix>(d, p);
  for (int i = 0; i < d; ++i) {
    kernels::sub(n.residual->row(i), s.row(i), targets.row(asg.col_of_row[i]),
                 static_cast<std::size_t>(p));
    kernels::scal(n.residual->row(i), 2.0, n.residual->row(i), static_cast<std::size_t>(p));
  }
  n.value = Matrix(1, 1);
  n.value(0, 0) = asg.total;
  n.requires_grad = nodes_[samples].requires_grad;
  return push(std::move(n));
}

double Tape::scalar(Val v) const {
  const Matrix& m = nodes_[v].value;
  if (m.rows != 1 || m.cols != 1) throw NumericError("scalar: tensor is not 1x1");
  return m(0, 0);
}

void Tape::backward(Val loss) {
  if (backward_done_) throw NumericError("backward: tape already consumed; build a new tape");
  backward_done_ = true;
  const Matrix& lv = nodes_[loss].value;
  if (lv.rows != 1 || lv.cols != 1) throw NumericError("backward: loss is not a 1x1 scalar");
  if (!nodes_[loss].requires_grad) return;
  ensure_grad(loss)(0, 0) = 1.0;

  for (int id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    const Matrix& g = n.grad;
    switch (n.kind) {
      case OpKind::leaf:
      case OpKind::constant:
        break;
      case OpKind::matmul: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        if (a.requires_grad) {
          Matrix da = matmul_nt(g, b.value);
          kernels::axpy(ensure_grad(n.inputs[0]).data.data(), 1.0, da.data.data(), da.size());
        }
        if (b.requires_grad) {
          Matrix db = gadnr::matmul_tn(a.value, g);
          kernels::axpy(ensure_grad(n.inputs[1]).data.data(), 1.0, db.data.data(), db.size());
        }
        break;
      }
      case OpKind::matmul_tn: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        if (a.requires_grad) {
          Matrix da = matmul_nt(b.value, g);  // B G^T : (mxk)(kxn)^T -> mxn
          kernels::axpy(ensure_grad(n.inputs[0]).data.data(), 1.0, da.data.data(), da.size());
        }
        if (b.requires_grad) {
          Matrix db = gadnr::matmul(a.value, g);
          kernels::axpy(ensure_grad(n.inputs[1]).data.data(), 1.0, db.data.data(), db.size());
        }
        break;
      }
      case OpKind::add:
        for (int k = 0; k < 2; ++k) {
          if (nodes_[n.inputs[k]].requires_grad)
            kernels::axpy(ensure_grad(n.inputs[k]).data.data(), 1.0, g.data.data(), g.size());
        }
        break;
      case OpKind::sub: {
        if (nodes_[n.inputs[0]].requires_grad)
          kernels::axpy(ensure_grad(n.inputs[0]).data.data(), 1.0, g.data.data(), g.size());
        if (nodes_[n.inputs[1]].requires_grad)
          kernels::axpy(ensure_grad(n.inputs[1]).data.data(), -1.0, g.data.data(), g.size());
        break;
      }
      case OpKind::mul: {
        Node& a = nodes_[n.inputs[0]];
        Node& b = nodes_[n.inputs[1]];
        if (a.requires_grad)
          kernels::madd(ensure_grad(n.inputs[0]).data.data(), g.data.data(), b.value.data.data(),
                        g.size());
        if (b.requires_grad)
          kernels::madd(ensure_grad(n.inputs[1]).data.data(), g.data.data(), a.value.data.data(),
                        g.size());
        break;
      }
      case OpKind::add_bias_row: {
        if (nodes_[n.inputs[0]].requires_grad)
          kernels::axpy(ensure_grad(n.inputs[0]).data.data(), 1.0, g.data.data(), g.size());
        if (nodes_[n.inputs[1]].requires_grad) {
          Matrix& db = ensure_grad(n.inputs[1]);
          for (int i = 0; i < g.rows; ++i)
            kernels::axpy(db.row(0), 1.0, g.row(i), static_cast<std::size_t>(g.cols));
        }
        break;
      }
      case OpKind::relu: {
        const Matrix& a = nodes_[n.inputs[0]].value;
        kernels::relu_bwd(ensure_grad(n.inputs[0]).data.data(), g.data.data(), a.data.data(),
                          g.size());
        break;
      }
      case OpKind::tanh_op: {
        Matrix& da = ensure_grad(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i)
          da.data[i] += g.data[i] * (1.0 - n.value.data[i] * n.value.data[i]);
        break;
      }
      case OpKind::exp_op:
        kernels::madd(ensure_grad(n.inputs[0]).data.data(), g.data.data(), n.value.data.data(),
                      g.size());
        break;
      case OpKind::clamp: {
        const Matrix& a = nodes_[n.inputs[0]].value;
        Matrix& da = ensure_grad(n.inputs[0]);
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (a.data[i] > n.c0 && a.data[i] < n.c1) da.data[i] += g.data[i];
        }
        break;
      }
      case OpKind::scale:
        kernels::axpy(ensure_grad(n.inputs[0]).data.data(), n.c0, g.data.data(), g.size());
        break;
      case OpKind::sparse_matmul: {
        Matrix da = n.sparse->multiply_transpose(g);
        kernels::axpy(ensure_grad(n.inputs[0]).data.data(), 1.0, da.data.data(), da.size());
        break;
      }
      case OpKind::gather_rows: {
        Matrix& da = ensure_grad(n.inputs[0]);
        for (std::size_t r = 0; r < n.index.size(); ++r)
          kernels::axpy(da.row(n.index[r]), 1.0, g.row(static_cast<int>(r)),
                        static_cast<std::size_t>(g.cols));
        break;
      }
      case OpKind::rowwise_sqnorm: {
        const Matrix& a = nodes_[n.inputs[0]].value;
        Matrix& da = ensure_grad(n.inputs[0]);
        for (int i = 0; i < a.rows; ++i)
          kernels::axpy(da.row(i), 2.0 * g(i, 0), a.row(i), static_cast<std::size_t>(a.cols));
        break;
      }
      case OpKind::sum: {
        Matrix& da = ensure_grad(n.inputs[0]);
        const double gv = g(0, 0);
        for (std::size_t i = 0; i < da.size(); ++i) da.data[i] += gv;
        break;
      }
      case OpKind::mean_rows: {
        const Matrix& a = nodes_[n.inputs[0]].value;
        Matrix& da = ensure_grad(n.inputs[0]);
        for (int i = 0; i < a.rows; ++i)
          kernels::axpy(da.row(i), 1.0 / a.rows, g.row(0), static_cast<std::size_t>(a.cols));
        break;
      }
      case OpKind::mse: {
        const Matrix& a = nodes_[n.inputs[0]].value;
        const Matrix& b = nodes_[n.inputs[1]].value;
        const double gv = 2.0 * g(0, 0) / static_cast<double>(a.size());
        if (nodes_[n.inputs[0]].requires_grad) {
          Matrix& da = ensure_grad(n.inputs[0]);
          for (std::size_t i = 0; i < a.size(); ++i) da.data[i] += gv * (a.data[i] - b.data[i]);
        }
        if (nodes_[n.inputs[1]].requires_grad) {
          Matrix& db = ensure_grad(n.inputs[1]);
          for (std::size_t i = 0; i < a.size(); ++i) db.data[i] -= gv * (a.data[i] - b.data[i]);
        }
        break;
      }
      case OpKind::stack_scalars: {
        for (std::size_t i = 0; i < n.inputs.size(); ++i) {
          if (nodes_[n.inputs[i]].requires_grad)
            ensure_grad(n.inputs[i])(0, 0) += g(static_cast<int>(i), 0);
        }
        break;
      }
      case OpKind::diag_mask: {
        Matrix& da = ensure_grad(n.inputs[0]);
        for (int i = 0; i < g.rows; ++i) da(i, i) += g(i, i);
        break;
      }
      case OpKind::gaussian_kl: {
        const double gv = g(0, 0);
        if (nodes_[n.inputs[0]].requires_grad)
          kernels::axpy(ensure_grad(n.inputs[0]).data.data(), gv, n.kl->d_mu2.data.data(),
                        n.kl->d_mu2.size());
        if (nodes_[n.inputs[1]].requires_grad)
          kernels::axpy(ensure_grad(n.inputs[1]).data.data(), gv, n.kl->d_cov2.data.data(),
                        n.kl->d_cov2.size());
        break;
      }
      case OpKind::gaussian_kl_samples: {
        const double gv = g(0, 0);
        const Matrix& centered = *n.residual;
        const int q = centered.rows;
        const int p = centered.cols;
        Matrix& da = ensure_grad(n.inputs[0]);
        const double cov_scale = 2.0 / (q - 1);
        for (int i = 0; i < q; ++i) {
          double* dst = da.row(i);
          const double* ci = centered.row(i);
          for (int a = 0; a < p; ++a) {
            double s = n.kl->d_mu2(0, a) / q;
            s += cov_scale * kernels::dot(n.kl->d_cov2.row(a), ci, static_cast<std::size_t>(p));
            dst[a] += gv * s;
          }
        }
        break;
      }
      case OpKind::hungarian_ot:
        kernels::axpy(ensure_grad(n.inputs[0]).data.data(), g(0, 0), n.residual->data.data(),
                      n.residual->size());
        break;
    }
  }

  // Flush leaf gradients into their bound tensors.
  for (Node& n : nodes_) {
    if (n.kind == OpKind::leaf && n.bound && n.bound->requires_grad && !n.grad.empty())
      kernels::axpy(n.bound->grad.data.data(), 1.0, n.grad.data.data(), n.grad.size());
  }
}

}  // namespace gadnr::ad
