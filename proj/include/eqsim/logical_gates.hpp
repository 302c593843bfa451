#pragma once

// Builders for the encoded two- and three-block gate constructions, the two
// variants of the square-root-of-X gate they use, and extraction of the
// logical action matrix of a circuit (with leakage accounting).

#include <string>
#include <vector>

#include "eqsim/circuit.hpp"
#include "eqsim/codes.hpp"
#include "eqsim/statevec.hpp"

namespace eqsim {

// ---------------------------------------------------------------------------
// Square root of X. The `paper` variant (1/sqrt2)[[1,i],[i,1]] squares to iX,
// so a doubly-applied V leaves a relative phase i behind; the `exact` variant
// (1/2)[[1-i,1+i],[1+i,1-i]] squares to X bit-exactly in double precision.
enum class VVariant { paper, exact };

inline const char* v_variant_name(VVariant v) { return v == VVariant::paper ? "paper" : "exact"; }

inline VVariant v_variant_from(std::string_view s) {
  if (s == "paper") return VVariant::paper;
  if (s == "exact") return VVariant::exact;
  throw std::invalid_argument("unknown V variant: " + std::string(s));
}

inline GateMatrix v_gate(VVariant v) {
  if (v == VVariant::paper) {
    const double s = 1.0 / std::numbers::sqrt2;
    return make_gate(1, {s, cdouble(0, s), cdouble(0, s), s});
  }
  return make_gate(1, {cdouble(0.5, -0.5), cdouble(0.5, 0.5), cdouble(0.5, 0.5), cdouble(0.5, -0.5)});
}

inline GateMatrix v_dagger(VVariant v) {
  GateMatrix g = v_gate(v);
  for (cdouble& e : g.m) e = std::conj(e);
  std::swap(g.m[1], g.m[2]);
  return g;
}

// ---------------------------------------------------------------------------
// Two-block controlled-NOT constructions. Interior checkpoints declare the
// target block only: mid-gate the control block is entangled with the target
// and is *not* promised to sit in the code space (projecting its stabilizers
// there would damage the payload), while the partially-shifted target block
// stays inside the code space after every individual op.

namespace detail {

inline void add_cnot_checkpoints(Circuit& c) {
  c.add_checkpoint(0, {"C", "T"});
  for (int p = 1; p < static_cast<int>(c.ops.size()); ++p) c.add_checkpoint(p, {"T"});
  c.add_checkpoint(static_cast<int>(c.ops.size()), {"C", "T"});
}

// Guard for constructions that flip only the block's top qubit: that is a
// logical flip exactly when the code declares a weight-one logical X there.
inline void require_top_qubit_logical_flip(const CodeSpec& code, const char* what) {
  std::string want(static_cast<std::size_t>(code.block_size), 'I');
  want[0] = 'X';
  if (code.logical_x != want)
    throw std::invalid_argument(std::string(what) +
                                ": code has no single-qubit logical flip on position 1 (" +
                                code.name + ")");
}

}  // namespace detail

// Qubit-by-qubit CNOTs between two blocks; valid for both supported codes.
inline Circuit build_transversal_cnot(const CodeSpec& code) {
  Circuit c;
  c.name = "transversal_cnot";
  c.code_name = code.name;
  c.layout = make_layout(code.block_size, {"C", "T"});
  const auto& cq = c.layout.block_qubits("C");
  const auto& tq = c.layout.block_qubits("T");
  for (int i = 0; i < code.block_size; ++i) c.add_cnot(cq[static_cast<std::size_t>(i)], tq[static_cast<std::size_t>(i)]);
  detail::add_cnot_checkpoints(c);
  return c;
}

// Every control qubit drives the target block's top qubit; the three control
// CNOTs together flip it exactly when the control block carries logical 1.
inline Circuit build_top_qubit_cnot(const CodeSpec& code) {
  detail::require_top_qubit_logical_flip(code, "build_top_qubit_cnot");
  Circuit c;
  c.name = "top_qubit_cnot";
  c.code_name = code.name;
  c.layout = make_layout(code.block_size, {"C", "T"});
  const auto& cq = c.layout.block_qubits("C");
  const int t_top = c.layout.block_qubits("T")[0];
  for (int q : cq) c.add_cnot(q, t_top);
  detail::add_cnot_checkpoints(c);
  return c;
}

// Control-block parity is collected onto a bus ancilla, kicked into the
// target's top qubit once, then uncollected.
inline Circuit build_parity_ancilla_cnot(const CodeSpec& code) {
  detail::require_top_qubit_logical_flip(code, "build_parity_ancilla_cnot");
  Circuit c;
  c.name = "parity_ancilla_cnot";
  c.code_name = code.name;
  c.layout = make_layout(code.block_size, {"C", "T"}, 1);
  const auto& cq = c.layout.block_qubits("C");
  const int anc = c.layout.ancillas[0];
  const int t_top = c.layout.block_qubits("T")[0];
  for (int q : cq) c.add_cnot(q, anc);
  c.add_cnot(anc, t_top);
  for (int q : cq) c.add_cnot(q, anc);
  detail::add_cnot_checkpoints(c);
  return c;
}

// ---------------------------------------------------------------------------
// Three-block Toffoli family. Five stages:
//   V^(CI), CNOT(CI->CII), V-dagger^(CII), CNOT(CI->CII), V^(CII),
// where V^(B) means "V on the target block, controlled by block B's logical
// value". Per target basis sector with control parities (x, y) the target
// sees V^x Vdag^{x XOR y} V^y = X^{x y} (up to the paper variant's phase), so
// the net effect is a doubly-controlled flip.

// How a control block's logical value (= bit parity) reaches the V control:
//   ancilla — parity is CNOT-copied to a bus ancilla and uncomputed after;
//             control-block qubits only ever act as CNOT controls.
//   fold    — parity is folded onto the block's own top qubit and unfolded
//             after; cheaper, but the block leaves the code space inside the
//             stage and single faults there can alias memory errors.
enum class ControlMode { ancilla, fold };

// Where V lands on the target block:
//   top_qubit   — once, on block position 1 (needs a weight-one logical X);
//   transversal — on every target qubit (the block-size-fold product of X is
//                 a logical flip for both supported codes).
enum class TargetSpan { top_qubit, transversal };

inline Circuit build_toffoli(const CodeSpec& code, VVariant v, ControlMode mode, TargetSpan span) {
  if (span == TargetSpan::top_qubit)
    detail::require_top_qubit_logical_flip(code, "build_toffoli");
  Circuit c;
  c.name = "toffoli";
  c.code_name = code.name;
  c.layout = make_layout(code.block_size, {"CI", "CII", "T"}, mode == ControlMode::ancilla ? 1 : 0);
  const auto& tq = c.layout.block_qubits("T");
  const GateMatrix vg = v_gate(v);
  const GateMatrix vdg = v_dagger(v);

  auto controlled_v_stage = [&](const std::string& block, const GateMatrix& g, const std::string& gname) {
    const auto& bq = c.layout.block_qubits(block);
    int vctrl;
    if (mode == ControlMode::ancilla) {
      vctrl = c.layout.ancillas[0];
      for (int q : bq) c.add_cnot(q, vctrl);
    } else {
      vctrl = bq[0];
      for (std::size_t i = 1; i < bq.size(); ++i) c.add_cnot(bq[i], vctrl);
    }
    if (span == TargetSpan::top_qubit) {
      c.add_controlled(gname, g, vctrl, tq[0]);
    } else {
      for (int q : tq) c.add_controlled(gname, g, vctrl, q);
    }
    if (mode == ControlMode::ancilla) {
      for (int q : c.layout.block_qubits(block)) c.add_cnot(q, vctrl);
    } else {
      for (std::size_t i = 1; i < bq.size(); ++i) c.add_cnot(bq[i], vctrl);
    }
  };
  auto transversal_stage = [&] {
    const auto& a = c.layout.block_qubits("CI");
    const auto& b = c.layout.block_qubits("CII");
    for (std::size_t i = 0; i < a.size(); ++i) c.add_cnot(a[i], b[i]);
  };

  c.add_checkpoint(0, {"CI", "CII", "T"});
  controlled_v_stage("CI", vg, "V");
  c.add_checkpoint(static_cast<int>(c.ops.size()), {"CI", "CII"});
  transversal_stage();
  c.add_checkpoint(static_cast<int>(c.ops.size()), {"CI", "CII"});
  controlled_v_stage("CII", vdg, "Vdag");
  c.add_checkpoint(static_cast<int>(c.ops.size()), {"CI", "CII"});
  transversal_stage();
  c.add_checkpoint(static_cast<int>(c.ops.size()), {"CI", "CII"});
  controlled_v_stage("CII", vg, "V");
  c.add_checkpoint(static_cast<int>(c.ops.size()), {"CI", "CII", "T"});
  return c;
}

// Toffoli acting on the (+,-) logical labels: a layer of Hadamards on every
// data qubit maps those labels onto computational products, the inner
// (ancilla, transversal) Toffoli applies the doubly-controlled flip there,
// and a second layer maps back. Checkpoints only at the ends — in between
// the blocks live in the Hadamard-dual space.
inline Circuit build_dual_basis_toffoli(const CodeSpec& code, VVariant v) {
  Circuit inner = build_toffoli(code, v, ControlMode::ancilla, TargetSpan::transversal);
  Circuit c;
  c.name = "dual_basis_toffoli";
  c.code_name = code.name;
  c.layout = inner.layout;
  for (int q : c.layout.data_qubits()) c.add_single("H", gates::h(), q);
  for (const CircuitOp& op : inner.ops) c.ops.push_back(op);
  for (const auto& [name, g] : inner.gate_table) c.gate_table.emplace(name, g);
  for (int q : c.layout.data_qubits()) c.add_single("H", gates::h(), q);
  c.add_checkpoint(0, {"CI", "CII", "T"});
  c.add_checkpoint(static_cast<int>(c.ops.size()), {"CI", "CII", "T"});
  return c;
}

// ---------------------------------------------------------------------------
// Logical action: the matrix <encoded k| U |encoded j> over logical basis
// labels, plus per-column leakage (weight that left the coded subspace,
// including any ancilla not returned to 0).
struct ActionMatrix {
  int num_blocks = 0;
  std::vector<cdouble> m;  // row-major, dim = 2^num_blocks
  std::vector<double> leakage;

  int dim() const { return 1 << num_blocks; }
  const cdouble& at(int r, int c) const { return m[static_cast<std::size_t>(r) * dim() + c]; }

  double max_leakage() const {
    double worst = 0.0;
    for (double l : leakage) worst = std::max(worst, l);
    return worst;
  }
};

inline ActionMatrix logical_action_matrix(const Circuit& circuit, const CodeSpec& code,
                                          LogicalBasis basis = LogicalBasis::zero_one) {
  ActionMatrix am;
  am.num_blocks = circuit.layout.num_blocks();
  const int d = am.dim();
  am.m.assign(static_cast<std::size_t>(d) * d, cdouble(0.0));
  am.leakage.assign(static_cast<std::size_t>(d), 0.0);
  std::vector<cdouble> coeffs(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    std::fill(coeffs.begin(), coeffs.end(), cdouble(0.0));
    coeffs[static_cast<std::size_t>(j)] = 1.0;
    StateVector state = encode_logical_vector(circuit.layout, code, coeffs, basis);
    run_circuit(circuit, state);
    double in_code = 0.0;
    for (int k = 0; k < d; ++k) {
      cdouble o = overlap_with_encoded_basis(circuit.layout, code, static_cast<std::uint64_t>(k),
                                             state, basis);
      am.m[static_cast<std::size_t>(k) * d + j] = o;
      in_code += std::norm(o);
    }
    am.leakage[static_cast<std::size_t>(j)] = 1.0 - in_code;
  }
  return am;
}

// ---------------------------------------------------------------------------
// Reference matrices and comparison up to a global phase.

inline std::vector<cdouble> permutation_matrix(int dim, const std::vector<int>& image) {
  std::vector<cdouble> m(static_cast<std::size_t>(dim) * dim, cdouble(0.0));
  for (int j = 0; j < dim; ++j) m[static_cast<std::size_t>(image[static_cast<std::size_t>(j)]) * dim + j] = 1.0;
  return m;
}

// Labels (c, t) -> (c, t ^ c); block 0 = control.
inline std::vector<cdouble> ideal_cnot_matrix() { return permutation_matrix(4, {0, 1, 3, 2}); }

// Labels (a, b) -> (a ^ b, b); block 1 = control (the "reversed" direction a
// transversal CNOT takes on the (+,-) labels).
inline std::vector<cdouble> ideal_reversed_cnot_matrix() { return permutation_matrix(4, {0, 3, 2, 1}); }

// Labels (a, b, t) -> (a, b, t ^ (a & b)).
inline std::vector<cdouble> ideal_toffoli_matrix() {
  return permutation_matrix(8, {0, 1, 2, 3, 4, 5, 7, 6});
}

struct MatrixComparison {
  double max_abs_deviation = 0.0;
  cdouble global_phase = 1.0;  // phase divided out of the computed matrix
};

// Aligns `got` to `want` on the entry where `want` is largest, then reports
// the worst entrywise deviation. Only a unit phase is divided out.
inline MatrixComparison compare_up_to_global_phase(const std::vector<cdouble>& got,
                                                   const std::vector<cdouble>& want) {
  if (got.size() != want.size()) throw std::invalid_argument("matrix size mismatch");
  MatrixComparison r;
  std::size_t anchor = 0;
  for (std::size_t k = 1; k < want.size(); ++k)
    if (std::abs(want[k]) > std::abs(want[anchor])) anchor = k;
  if (std::abs(got[anchor]) > 1e-9) {
    cdouble ratio = got[anchor] / want[anchor];
    r.global_phase = ratio / std::abs(ratio);
  }
  for (std::size_t k = 0; k < want.size(); ++k)
    r.max_abs_deviation = std::max(r.max_abs_deviation, std::abs(got[k] / r.global_phase - want[k]));
  return r;
}

}  // namespace eqsim
