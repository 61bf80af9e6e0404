#include "neuropt/symgraph/function.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <mutex>
#include <unordered_set>

#include <fmt/format.h>

#include "neuropt/error.hpp"
#include "neuropt/symgraph/kernels.hpp"
#include "store.hpp"

namespace neuropt::sym {

namespace {

class NameRegistry {
 public:
  static NameRegistry& instance() {
    static NameRegistry registry;
    return registry;
  }

  void acquire(const std::string& name) {
    std::lock_guard lock(mutex_);
    if (!live_.insert(name).second) {
      throw ValidationError(fmt::format("function name '{}' is already in use", name));
    }
  }

  void release(const std::string& name) {
    std::lock_guard lock(mutex_);
    live_.erase(name);
  }

 private:
  std::mutex mutex_;
  std::unordered_set<std::string> live_;
};

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

}  // namespace

struct SymFunction::Impl {
  std::string name;
  std::vector<ExprRef> inputs;
  std::vector<ExprRef> outputs;
  std::vector<Node> program;
  std::vector<std::int32_t> program_source;  // graph index of each program node
  std::vector<std::int32_t> input_pos;
  std::vector<std::int32_t> output_pos;

  ~Impl() { NameRegistry::instance().release(name); }
};

SymFunction::SymFunction(std::string name, std::vector<ExprRef> inputs,
                         std::vector<ExprRef> outputs) {
  if (!valid_identifier(name)) {
    throw ValidationError(fmt::format("function name '{}' is not an identifier", name));
  }
  if (outputs.empty()) throw ValidationError(fmt::format("function '{}' has no outputs", name));

  const ExprRef& anchor = outputs.front();
  for (const auto& e : inputs) {
    if (!e.same_graph(anchor)) throw ValidationError("function inputs and outputs must share a graph");
    if (!e.is_symbol()) {
      throw ValidationError(fmt::format("function '{}': input node {} is {}, not a Symbol", name,
                                        e.index(), op_name(e.kind())));
    }
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (inputs[i] == inputs[j]) {
        throw ValidationError(
            fmt::format("function '{}': input '{}' listed twice", name, inputs[i].symbol_name()));
      }
    }
  }
  for (const auto& e : outputs) {
    if (!e.same_graph(anchor)) throw ValidationError("function outputs must share a graph");
  }

  for (const ExprRef& s : free_symbols(outputs)) {
    if (std::find(inputs.begin(), inputs.end(), s) == inputs.end()) {
      throw ValidationError(fmt::format("function '{}': symbol '{}' is reachable but not an input",
                                        name, s.symbol_name()));
    }
  }

  // Reachable set (outputs plus declared inputs) in ascending index order.
  auto& store = detail::Access::store(anchor);
  std::int32_t top = 0;
  for (const auto& e : outputs) top = std::max(top, e.index());
  for (const auto& e : inputs) top = std::max(top, e.index());
  std::vector<char> seen(static_cast<std::size_t>(top) + 1, 0);
  std::vector<std::int32_t> stack;
  for (const auto& e : outputs) stack.push_back(e.index());
  for (const auto& e : inputs) stack.push_back(e.index());
  while (!stack.empty()) {
    const std::int32_t i = stack.back();
    stack.pop_back();
    if (seen[static_cast<std::size_t>(i)]) continue;
    seen[static_cast<std::size_t>(i)] = 1;
    for (const std::int32_t op : store.nodes[static_cast<std::size_t>(i)].operands) {
      stack.push_back(op);
    }
  }

  auto impl = std::make_shared<Impl>();
  std::vector<std::int32_t> position(static_cast<std::size_t>(top) + 1, -1);
  for (std::int32_t i = 0; i <= top; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) continue;
    Node n = store.nodes[static_cast<std::size_t>(i)];
    for (auto& op : n.operands) op = position[static_cast<std::size_t>(op)];
    position[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(impl->program.size());
    impl->program.push_back(std::move(n));
    impl->program_source.push_back(i);
  }
  for (const auto& e : inputs) impl->input_pos.push_back(position[static_cast<std::size_t>(e.index())]);
  for (const auto& e : outputs) impl->output_pos.push_back(position[static_cast<std::size_t>(e.index())]);

  NameRegistry::instance().acquire(name);
  impl->name = std::move(name);
  impl->inputs = std::move(inputs);
  impl->outputs = std::move(outputs);
  impl_ = std::move(impl);
}

const std::string& SymFunction::name() const { return impl_->name; }
const std::vector<ExprRef>& SymFunction::inputs() const { return impl_->inputs; }
const std::vector<ExprRef>& SymFunction::outputs() const { return impl_->outputs; }
ExprGraph SymFunction::graph() const { return impl_->outputs.front().graph(); }
const std::vector<Node>& SymFunction::program() const { return impl_->program; }
const std::vector<std::int32_t>& SymFunction::source_indices() const {
  return impl_->program_source;
}
const std::vector<std::int32_t>& SymFunction::input_positions() const { return impl_->input_pos; }
const std::vector<std::int32_t>& SymFunction::output_positions() const { return impl_->output_pos; }

void evaluate(const SymFunction& f, std::span<const Matrix> inputs, Workspace& ws) {
  const auto& program = f.program();
  const auto& in_pos = f.input_positions();
  if (inputs.size() != in_pos.size()) {
    throw ValidationError(fmt::format("function '{}' expects {} inputs, got {}", f.name(),
                                      in_pos.size(), inputs.size()));
  }

  ws.storage_.resize(program.size());
  ws.values_.assign(program.size(), nullptr);
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Shape want = program[static_cast<std::size_t>(in_pos[k])].shape;
    if (inputs[k].rows() != want.rows || inputs[k].cols() != want.cols) {
      throw ValidationError(fmt::format("function '{}': input {} has shape ({},{}), expected {}",
                                        f.name(), k, inputs[k].rows(), inputs[k].cols(),
                                        to_string(want)));
    }
    ws.values_[static_cast<std::size_t>(in_pos[k])] = &inputs[k];
  }

  std::vector<const Matrix*> args;
  for (std::size_t i = 0; i < program.size(); ++i) {
    const Node& n = program[i];
    if (n.kind == OpKind::Symbol) continue;
    if (n.kind == OpKind::Constant) {
      ws.values_[i] = n.payload.get();
      continue;
    }
    args.clear();
    for (const std::int32_t op : n.operands) args.push_back(ws.values_[static_cast<std::size_t>(op)]);
    evaluate_node(n, args, ws.storage_[i], f.source_indices()[i]);
    ws.values_[i] = &ws.storage_[i];
  }
  ws.outputs_ = f.output_positions();
}

std::vector<Matrix> evaluate(const SymFunction& f, std::span<const Matrix> inputs) {
  Workspace ws;
  evaluate(f, inputs, ws);
  std::vector<Matrix> out;
  out.reserve(ws.n_outputs());
  for (std::size_t k = 0; k < ws.n_outputs(); ++k) out.push_back(ws.output(k));
  return out;
}

std::vector<Matrix> evaluate(const SymFunction& f, std::initializer_list<Matrix> inputs) {
  return evaluate(f, std::span<const Matrix>(inputs.begin(), inputs.size()));
}

std::string unique_function_name(std::string_view prefix) {
  static std::atomic<std::uint64_t> counter{0};
  return fmt::format("{}_{}", prefix, counter.fetch_add(1));
}

}  // namespace neuropt::sym
