#pragma once

// Multi-block circuit layer: named code blocks laid out on a single register,
// op sequences with named gates, in-code checkpoints, encoding of logical
// payloads across blocks, and a plain-text circuit dump.

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "eqsim/codes.hpp"
#include "eqsim/statevec.hpp"

namespace eqsim {

// Blocks occupy descending qubit ranges; ancillas sit above all blocks.
// Within a block, qubits[0] is block position 1 (the most significant qubit),
// so printed bitstrings read ancillas first, then block 0, block 1, ...
struct BlockLayout {
  std::vector<std::pair<std::string, std::vector<int>>> blocks;
  std::vector<int> ancillas;
  int total_qubits = 0;

  int num_blocks() const { return static_cast<int>(blocks.size()); }

  int block_index(std::string_view name) const {
    for (std::size_t b = 0; b < blocks.size(); ++b)
      if (blocks[b].first == name) return static_cast<int>(b);
    throw std::invalid_argument("unknown block: " + std::string(name));
  }

  const std::vector<int>& block_qubits(std::string_view name) const {
    return blocks[static_cast<std::size_t>(block_index(name))].second;
  }

  // All block qubits, block 0 first, positions descending. Excludes ancillas.
  std::vector<int> data_qubits() const {
    std::vector<int> qs;
    for (const auto& [name, qubits] : blocks) qs.insert(qs.end(), qubits.begin(), qubits.end());
    return qs;
  }
};

inline BlockLayout make_layout(int block_size, const std::vector<std::string>& block_names,
                               int num_ancillas = 0) {
  BlockLayout lay;
  lay.total_qubits = block_size * static_cast<int>(block_names.size()) + num_ancillas;
  if (lay.total_qubits > kMaxQubits) throw std::out_of_range("layout exceeds qubit budget");
  for (int a = 0; a < num_ancillas; ++a) lay.ancillas.push_back(lay.total_qubits - 1 - a);
  int top = lay.total_qubits - num_ancillas - 1;
  for (const std::string& name : block_names) {
    std::vector<int> qs(static_cast<std::size_t>(block_size));
    for (int i = 0; i < block_size; ++i) qs[static_cast<std::size_t>(i)] = top - i;
    lay.blocks.emplace_back(name, std::move(qs));
    top -= block_size;
  }
  return lay;
}

struct CircuitOp {
  std::string gate_name;  // "X" renders as CNOT when controlled
  GateMatrix gate;
  std::vector<int> controls;
  std::vector<int> targets;
};

// A position p means "after the first p ops". Declared blocks are expected to
// be inside the code space there; undeclared blocks carry no promise.
struct Checkpoint {
  int position = 0;
  std::vector<std::string> blocks;
};

struct Circuit {
  std::string name;       // CLI token, e.g. "fig1a"
  std::string code_name;  // code the blocks are encoded with
  BlockLayout layout;
  std::vector<CircuitOp> ops;
  std::vector<Checkpoint> checkpoints;
  // Named non-permutation gates used by the ops, for the dump's matrix table.
  std::map<std::string, GateMatrix> gate_table;

  void add_cnot(int control, int target) {
    ops.push_back({"X", gates::x(), {control}, {target}});
  }
  void add_controlled(std::string gate_name, const GateMatrix& g, int control, int target) {
    gate_table.emplace(gate_name, g);
    ops.push_back({std::move(gate_name), g, {control}, {target}});
  }
  void add_single(std::string gate_name, const GateMatrix& g, int target) {
    gate_table.emplace(gate_name, g);
    ops.push_back({std::move(gate_name), g, {}, {target}});
  }
  void add_checkpoint(int position, std::vector<std::string> block_names) {
    checkpoints.push_back({position, std::move(block_names)});
  }
};

inline void apply_op(StateVector& state, const CircuitOp& op) {
  apply_controlled(state, op.gate, op.controls, op.targets);
}

// Runs ops [from, to); to = -1 means "to the end".
inline void run_circuit(const Circuit& circuit, StateVector& state, int from = 0, int to = -1) {
  int end = (to < 0) ? static_cast<int>(circuit.ops.size()) : to;
  if (from < 0 || end > static_cast<int>(circuit.ops.size()) || from > end)
    throw std::out_of_range("op range out of bounds");
  for (int p = from; p < end; ++p) apply_op(state, circuit.ops[static_cast<std::size_t>(p)]);
}

// ---------------------------------------------------------------------------
// Encoding across blocks. Logical basis labels: block 0 is the most
// significant bit of the label, matching the printed qubit order.

namespace detail {

inline std::uint64_t embed_block_index(std::uint64_t sub, const std::vector<int>& qubits) {
  std::uint64_t idx = 0;
  const int n = static_cast<int>(qubits.size());
  for (int i = 0; i < n; ++i)
    if (sub >> (n - 1 - i) & 1) idx |= std::uint64_t{1} << qubits[static_cast<std::size_t>(i)];
  return idx;
}

}  // namespace detail

// Sparse terms of the encoded |basis label> product state (ancillas at 0).
inline std::vector<std::pair<std::uint64_t, cdouble>> encoded_basis_terms(
    const BlockLayout& layout, const CodeSpec& code, std::uint64_t label,
    LogicalBasis basis = LogicalBasis::zero_one) {
  const int nb = layout.num_blocks();
  std::vector<std::pair<std::uint64_t, cdouble>> acc = {{0, 1.0}};
  for (int b = 0; b < nb; ++b) {
    int bit = static_cast<int>(label >> (nb - 1 - b) & 1);
    auto block_terms = codeword_terms(code, bit, basis);
    std::vector<std::pair<std::uint64_t, cdouble>> next;
    next.reserve(acc.size() * block_terms.size());
    const auto& qubits = layout.blocks[static_cast<std::size_t>(b)].second;
    for (const auto& [idx0, amp0] : acc)
      for (const auto& [sub, amp] : block_terms)
        next.emplace_back(idx0 | detail::embed_block_index(sub, qubits), amp0 * amp);
    acc = std::move(next);
  }
  return acc;
}

// Encodes an arbitrary logical vector: sum_j coeffs[j] |encoded basis j>.
inline StateVector encode_logical_vector(const BlockLayout& layout, const CodeSpec& code,
                                         const std::vector<cdouble>& coeffs,
                                         LogicalBasis basis = LogicalBasis::zero_one) {
  const std::uint64_t nlab = std::uint64_t{1} << layout.num_blocks();
  if (coeffs.size() != nlab)
    throw std::invalid_argument("encode_logical_vector: need 2^num_blocks coefficients");
  double total = 0.0;
  for (const cdouble& c : coeffs) total += std::norm(c);
  if (std::abs(total - 1.0) > kFidelityTol)
    throw std::invalid_argument("encode_logical_vector: coefficients must be normalized");
  StateVector s = zero_state(layout.total_qubits);
  for (std::uint64_t j = 0; j < nlab; ++j) {
    if (coeffs[j] == cdouble(0.0)) continue;
    for (const auto& [idx, amp] : encoded_basis_terms(layout, code, j, basis))
      s.amps[idx] += coeffs[j] * amp;
  }
  return s;
}

// Product of per-block payloads alpha|0_L> + beta|1_L>.
inline StateVector encode_blocks(const BlockLayout& layout, const CodeSpec& code,
                                 const std::vector<std::pair<cdouble, cdouble>>& payloads,
                                 LogicalBasis basis = LogicalBasis::zero_one) {
  const int nb = layout.num_blocks();
  if (static_cast<int>(payloads.size()) != nb)
    throw std::invalid_argument("encode_blocks: one payload per block required");
  const std::uint64_t nlab = std::uint64_t{1} << nb;
  std::vector<cdouble> coeffs(nlab);
  for (std::uint64_t j = 0; j < nlab; ++j) {
    cdouble c = 1.0;
    for (int b = 0; b < nb; ++b) {
      const auto& [alpha, beta] = payloads[static_cast<std::size_t>(b)];
      c *= (j >> (nb - 1 - b) & 1) ? beta : alpha;
    }
    coeffs[j] = c;
  }
  return encode_logical_vector(layout, code, coeffs, basis);
}

// <encoded basis j | state>, evaluated sparsely.
inline cdouble overlap_with_encoded_basis(const BlockLayout& layout, const CodeSpec& code,
                                          std::uint64_t label, const StateVector& state,
                                          LogicalBasis basis = LogicalBasis::zero_one) {
  cdouble acc = 0.0;
  for (const auto& [idx, amp] : encoded_basis_terms(layout, code, label, basis))
    acc += std::conj(amp) * state.amps[idx];
  return acc;
}

// ---------------------------------------------------------------------------
// Logical controlled-phase between two blocks, applied directly on the
// register: -1 on components where both blocks carry odd bit parity (for both
// supported codes the logical value of a codeword is its parity).
inline void apply_logical_cz(StateVector& state, const std::vector<int>& qubits_a,
                             const std::vector<int>& qubits_b) {
  const std::uint64_t mask_a = detail::mask_of(qubits_a, state.num_qubits);
  const std::uint64_t mask_b = detail::mask_of(qubits_b, state.num_qubits);
  if (mask_a & mask_b) throw std::invalid_argument("blocks overlap");
  for (std::uint64_t i = 0; i < state.dim(); ++i)
    if ((std::popcount(i & mask_a) & 1) && (std::popcount(i & mask_b) & 1)) state.amps[i] = -state.amps[i];
}

// ---------------------------------------------------------------------------
// Checkpoint verification: runs the circuit on `input` and, at every declared
// checkpoint, measures how far each declared block strays from the +1
// eigenspace of its stabilizers. Returns the worst deviation |<S> - 1|.
inline double check_checkpoints(const Circuit& circuit, const CodeSpec& code,
                                const StateVector& input) {
  StateVector state = input;
  double worst = 0.0;
  auto inspect = [&](int position) {
    for (const Checkpoint& cp : circuit.checkpoints) {
      if (cp.position != position) continue;
      for (const std::string& bname : cp.blocks) {
        const auto& qubits = circuit.layout.block_qubits(bname);
        for (const std::string& st : code.stabilizers) {
          PauliString obs = embed_pauli(st, qubits, state.num_qubits);
          worst = std::max(worst, std::abs(expectation_pauli(state, obs) - 1.0));
        }
      }
    }
  };
  for (int p = 0; p <= static_cast<int>(circuit.ops.size()); ++p) {
    inspect(p);
    if (p < static_cast<int>(circuit.ops.size())) apply_op(state, circuit.ops[static_cast<std::size_t>(p)]);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Plain-text dump: header, one op per line in execution order with CHECKPOINT
// markers interleaved, then a matrix table for the named gates (if any).

namespace detail {

inline std::string join_ints(const std::vector<int>& v, char prefix) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += prefix;
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace detail

inline std::string dump_circuit(const Circuit& circuit) {
  std::ostringstream os;
  os.precision(17);
  os << "CIRCUIT " << circuit.name << " code=" << circuit.code_name
     << " qubits=" << circuit.layout.total_qubits << '\n';
  for (const auto& [name, qubits] : circuit.layout.blocks) {
    os << "BLOCK " << name;
    for (int q : qubits) os << ' ' << q;
    os << '\n';
  }
  if (!circuit.layout.ancillas.empty()) {
    os << "ANCILLA";
    for (int q : circuit.layout.ancillas) os << ' ' << q;
    os << '\n';
  }
  auto checkpoints_at = [&](int position) {
    for (const Checkpoint& cp : circuit.checkpoints) {
      if (cp.position != position) continue;
      os << "CHECKPOINT";
      for (std::size_t i = 0; i < cp.blocks.size(); ++i) os << (i ? "," : " ") << cp.blocks[i];
      os << '\n';
    }
  };
  for (int p = 0; p <= static_cast<int>(circuit.ops.size()); ++p) {
    checkpoints_at(p);
    if (p >= static_cast<int>(circuit.ops.size())) break;
    const CircuitOp& op = circuit.ops[static_cast<std::size_t>(p)];
    if (!op.controls.empty() && op.gate_name == "X") {
      os << "CNOT " << detail::join_ints(op.controls, 'c') << ' '
         << detail::join_ints(op.targets, 't') << '\n';
    } else if (!op.controls.empty()) {
      os << "CU " << op.gate_name << ' ' << detail::join_ints(op.controls, 'c') << ' '
         << detail::join_ints(op.targets, 't') << '\n';
    } else {
      os << "U " << op.gate_name << ' ' << detail::join_ints(op.targets, 'q') << '\n';
    }
  }
  for (const auto& [name, gate] : circuit.gate_table) {
    os << "MATRIX " << name;
    for (const cdouble& e : gate.m) os << ' ' << e.real() << ',' << e.imag();
    os << '\n';
  }
  return os.str();
}

}  // namespace eqsim
