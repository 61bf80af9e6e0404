#include "neuropt/symgraph/kernels.hpp"

#include <fmt/format.h>

#include "neuropt/error.hpp"

namespace neuropt::sym {

bool unary_scalar(OpKind kind, double x, double& out) {
  switch (kind) {
    case OpKind::Neg: out = -x; return true;
    case OpKind::Tanh: out = std::tanh(x); return true;
    case OpKind::Sigmoid: out = sigmoid_value(x); return true;
    case OpKind::Relu: out = relu_value(x); return true;
    case OpKind::Step: out = step_value(x); return true;
    case OpKind::Exp: out = std::exp(x); return true;
    case OpKind::Log:
      if (!(x > 0.0)) return false;
      out = std::log(x);
      return true;
    case OpKind::Sin: out = std::sin(x); return true;
    case OpKind::Cos: out = std::cos(x); return true;
    case OpKind::Sqrt:
      if (x < 0.0) return false;
      out = std::sqrt(x);
      return true;
    default: break;
  }
  throw Error(fmt::format("unary_scalar: {} is not an elementwise unary kind", op_name(kind)));
}

bool binary_scalar(OpKind kind, double a, double b, double& out) {
  switch (kind) {
    case OpKind::Add: out = a + b; return true;
    case OpKind::Sub: out = a - b; return true;
    case OpKind::Mul: out = a * b; return true;
    case OpKind::Div:
      if (b == 0.0) return false;
      out = a / b;
      return true;
    case OpKind::Pow:
      out = std::pow(a, b);
      // A finite base with a non-real or infinite result is a domain error.
      return !(std::isfinite(a) && !std::isfinite(out));
    default: break;
  }
  throw Error(fmt::format("binary_scalar: {} is not an elementwise binary kind", op_name(kind)));
}

namespace {

[[noreturn]] void domain_failure(const Node& node, double x, std::int64_t location) {
  throw DomainError(
      fmt::format("{} domain error at node {} (argument {})", op_name(node.kind), location, x),
      location);
}

}  // namespace

void evaluate_node(const Node& node, std::span<const Matrix* const> args, Matrix& out,
                   std::int64_t location) {
  const Shape s = node.shape;
  if (out.rows() != s.rows || out.cols() != s.cols) out.resize(s.rows, s.cols);

  switch (node.kind) {
    case OpKind::Symbol:
    case OpKind::Constant:
      throw Error("evaluate_node: leaf nodes carry no value rule");

    case OpKind::Add:
    case OpKind::Sub:
    case OpKind::Mul:
    case OpKind::Div: {
      const Matrix& a = *args[0];
      const Matrix& b = *args[1];
      const bool a_scalar = a.size() == 1;
      const bool b_scalar = b.size() == 1;
      const double* pa = a.data();
      const double* pb = b.data();
      double* po = out.data();
      const Eigen::Index n = out.size();
      for (Eigen::Index i = 0; i < n; ++i) {
        const double x = a_scalar ? pa[0] : pa[i];
        const double y = b_scalar ? pb[0] : pb[i];
        if (!binary_scalar(node.kind, x, y, po[i])) domain_failure(node, y, location);
      }
      return;
    }

    case OpKind::Pow: {
      const Matrix& a = *args[0];
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (!binary_scalar(OpKind::Pow, a.data()[i], node.exponent, out.data()[i])) {
          domain_failure(node, a.data()[i], location);
        }
      }
      return;
    }

    case OpKind::Neg:
    case OpKind::Tanh:
    case OpKind::Sigmoid:
    case OpKind::Relu:
    case OpKind::Step:
    case OpKind::Exp:
    case OpKind::Log:
    case OpKind::Sin:
    case OpKind::Cos:
    case OpKind::Sqrt: {
      const Matrix& a = *args[0];
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (!unary_scalar(node.kind, a.data()[i], out.data()[i])) {
          domain_failure(node, a.data()[i], location);
        }
      }
      return;
    }

    case OpKind::MatMul: {
      // i-k-j order: each output entry accumulates its products in increasing
      // k, the same order the lowered tape uses.
      const Matrix& a = *args[0];
      const Matrix& b = *args[1];
      const Eigen::Index inner = a.cols();
      const Eigen::Index cols = b.cols();
      out.setZero();
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double* row = out.data() + i * cols;
        for (Eigen::Index k = 0; k < inner; ++k) {
          const double aik = a.data()[i * inner + k];
          const double* brow = b.data() + k * cols;
          for (Eigen::Index j = 0; j < cols; ++j) row[j] = row[j] + aik * brow[j];
        }
      }
      return;
    }

    case OpKind::Transpose:
      out = args[0]->transpose();
      return;

    case OpKind::Concat: {
      Eigen::Index row = 0;
      for (const Matrix* part : args) {
        out.middleRows(row, part->rows()) = *part;
        row += part->rows();
      }
      return;
    }

    case OpKind::SumSq: {
      const Matrix& a = *args[0];
      double acc = 0.0;
      for (Eigen::Index i = 0; i < a.size(); ++i) acc = acc + a.data()[i] * a.data()[i];
      out(0, 0) = acc;
      return;
    }
  }
  throw Error("evaluate_node: unknown op kind");
}

}  // namespace neuropt::sym
