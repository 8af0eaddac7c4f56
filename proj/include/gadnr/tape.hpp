#pragma once
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "gadnr/gaussian.hpp"
#include "gadnr/matrix.hpp"

namespace gadnr::ad {

// Persistent tensor: model parameter or fixed buffer. Gradients accumulate
// additively across backward passes; callers reset with zero_grad between
// optimizer steps.
struct DTensor {
  std::string name;
  Matrix value;
  Matrix grad;
  bool requires_grad = true;

  DTensor() = default;
  DTensor(std::string n, Matrix v, bool rg = true)
      : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols), requires_grad(rg) {}

  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

// CSR matrix used for the fixed aggregation operators. Values never carry
// gradients; only the dense operand does.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;  // rows+1
  std::vector<int> col_idx;
  std::vector<double> vals;

  Matrix multiply(const Matrix& x) const;
  Matrix multiply_transpose(const Matrix& x) const;
};

// Handle to a tape node.
using Val = int;

enum class OpKind {
  leaf,
  constant,
  matmul,
  matmul_tn,
  add,
  sub,
  mul,
  add_bias_row,
  relu,
  tanh_op,
  exp_op,
  clamp,
  scale,
  sparse_matmul,
  gather_rows,
  rowwise_sqnorm,
  sum,
  mean_rows,
  mse,
  stack_scalars,
  diag_mask,
  gaussian_kl,
  gaussian_kl_samples,
  hungarian_ot,
};

const char* op_name(OpKind k);

// Record of executed ops in topological order. One forward pass builds a
// tape; backward replays it once in reverse. A tape and its tensors belong
// to a single logical thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Leaf bound to an external tensor; memoized per DTensor.
  Val leaf(DTensor& t);
  // Unnamed constant value (never differentiated).
  Val constant(Matrix m);

  Val matmul(Val a, Val b);
  Val matmul_tn(Val a, Val b);  // A^T B
  Val add(Val a, Val b);
  Val sub(Val a, Val b);
  Val mul(Val a, Val b);  // elementwise
  Val add_bias_row(Val a, Val bias);
  Val relu(Val a);
  Val tanh(Val a);
  Val exp(Val a);
  Val clamp(Val a, double lo, double hi);
  Val scale(Val a, double c);
  Val sparse_matmul(const SparseMatrix& s, Val a);
  Val gather_rows(Val a, std::vector<int> index);
  Val rowwise_sqnorm(Val a);  // mxn -> mx1
  Val sum(Val a);             // -> 1x1
  Val mean_rows(Val a);       // mxn -> 1xn
  Val mse(Val a, Val b);      // -> 1x1
  Val stack_scalars(const std::vector<Val>& parts);  // -> kx1
  Val diag_mask(Val a);
  // KL against fixed target moments; gradients reach mu2/cov2 only.
  Val gaussian_kl(const Matrix& mu1, const Matrix& cov1, Val mu2, Val cov2, double c);
  // Fused form of mean/covariance estimation over a qxp sample block followed
  // by gaussian_kl. Numerically identical to the composed ops (equivalence
  // tested); one node instead of five on the per-node hot path.
  Val gaussian_kl_samples(const Matrix& mu1, const Matrix& cov1, Val samples, double c,
                          bool diagonal_cov);
  // Minimum-cost matching of decoded samples to fixed target rows; the
  // gradient follows the optimal assignment.
  Val hungarian_ot(Val samples, const Matrix& targets);

  const Matrix& value(Val v) const { return nodes_[v].value; }
  double scalar(Val v) const;
  bool requires_grad(Val v) const { return nodes_[v].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Accumulates d(loss)/dP into every reachable DTensor with requires_grad.
  // loss must be 1x1; a second call on the same tape throws.
  void backward(Val loss);

  // Gradient of a non-leaf node after backward (test introspection).
  const Matrix& grad(Val v) const { return nodes_[v].grad; }

 private:
  struct Node {
    OpKind kind;
    std::vector<int> inputs;
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    DTensor* bound = nullptr;
    double c0 = 0.0, c1 = 0.0;
    std::vector<int> index;
    const SparseMatrix* sparse = nullptr;
    std::unique_ptr<GaussianKl> kl;
    std::unique_ptr<Matrix> residual;  // hungarian_ot backward payload
  };

  Val push(Node n);
  Matrix& ensure_grad(int id);
  void check_finite(const Matrix& m, OpKind kind) const;

  std::vector<Node> nodes_;
  std::unordered_map<const DTensor*, int> leaf_ids_;
  bool backward_done_ = false;
};

}  // namespace gadnr::ad
