#pragma once

// Stabilizer code descriptions and block-level operations: the 3-qubit
// phase-protecting code and the 7-qubit CSS code, their codewords,
// stabilizers, syndrome tables, encoding, logical readout and memory-style
// correction. Codeword bitstrings use the printing convention of
// statevec.hpp: leftmost character = highest qubit = block position 1.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eqsim/statevec.hpp"

namespace eqsim {

struct LogicalReadout {
  cdouble alpha;   // overlap with the logical-0 basis state
  cdouble beta;    // overlap with the logical-1 basis state
  double leakage;  // weight outside the code space: 1 - |alpha|^2 - |beta|^2
};

enum class LogicalBasis {
  zero_one,    // |0_L>, |1_L>
  plus_minus,  // |+_L> -> label 0, |-_L> -> label 1
};

struct CodeSpec {
  std::string name;
  int block_size = 0;
  // Signed computational basis strings of the two codewords, in fixed order.
  std::vector<std::pair<int, std::string>> codeword_zero;
  std::vector<std::pair<int, std::string>> codeword_one;
  std::vector<std::string> stabilizers;  // X-type checks first, fixed order
  std::string logical_x;
  std::string logical_z;
  std::string correctable;  // Pauli kinds with syndrome-table coverage
  std::map<std::string, std::string> syndrome_table;  // "+-.." -> correction string

  std::string trivial_syndrome() const {
    return std::string(stabilizers.size(), '+');
  }
};

inline std::string syndrome_key(const std::vector<int>& syndrome) {
  std::string s;
  s.reserve(syndrome.size());
  for (int v : syndrome) s += (v == 1 ? '+' : '-');
  return s;
}

// Commutation-based syndrome of a block-local Pauli: entry k is -1 iff the
// error anticommutes with stabilizer k (symplectic product of the masks).
inline std::string pauli_syndrome(const CodeSpec& code, const PauliString& error) {
  std::string key;
  key.reserve(code.stabilizers.size());
  for (const std::string& st : code.stabilizers) {
    PauliString s = PauliString::parse(st);
    int anti = (std::popcount(error.x_bits & s.z_bits) + std::popcount(error.z_bits & s.x_bits)) & 1;
    key += anti ? '-' : '+';
  }
  return key;
}

namespace detail {

inline CodeSpec make_three_bit() {
  CodeSpec c;
  c.name = "three_bit";
  c.block_size = 3;
  c.codeword_zero = {{1, "000"}, {1, "011"}, {1, "101"}, {1, "110"}};
  for (const auto& [sign, bits] : c.codeword_zero) {
    std::string flipped = bits;
    for (char& ch : flipped) ch = (ch == '0' ? '1' : '0');
    c.codeword_one.emplace_back(sign, flipped);
  }
  c.stabilizers = {"XXI", "IXX"};
  c.logical_x = "XII";
  c.logical_z = "ZZZ";
  c.correctable = "Z";
  return c;
}

inline CodeSpec make_seven_bit() {
  CodeSpec c;
  c.name = "seven_bit";
  c.block_size = 7;
  // Even-weight classical codewords spanned by three generators, listed in
  // generator-combination order; the odd codewords are their complements.
  const std::uint64_t gen[3] = {index_of_bits("1010101"), index_of_bits("0110011"),
                                index_of_bits("0001111")};
  for (int m = 0; m < 8; ++m) {
    std::uint64_t w = 0;
    for (int k = 0; k < 3; ++k)
      if (m >> k & 1) w ^= gen[k];
    c.codeword_zero.emplace_back(1, bits_of_index(w, 7));
    c.codeword_one.emplace_back(1, bits_of_index(w ^ 0x7f, 7));
  }
  // Parity checks act on block positions {4,5,6,7}, {2,3,6,7}, {1,3,5,7}.
  const std::vector<std::vector<int>> supports = {{4, 5, 6, 7}, {2, 3, 6, 7}, {1, 3, 5, 7}};
  for (char kind : {'X', 'Z'}) {
    for (const auto& sup : supports) {
      std::string st(7, 'I');
      for (int pos : sup) st[static_cast<std::size_t>(pos - 1)] = kind;
      c.stabilizers.push_back(st);
    }
  }
  c.logical_x = "XXXXXXX";
  c.logical_z = "ZZZZZZZ";
  c.correctable = "XYZ";
  return c;
}

inline void fill_syndrome_table(CodeSpec& c) {
  c.syndrome_table[c.trivial_syndrome()] = std::string(static_cast<std::size_t>(c.block_size), 'I');
  for (char kind : c.correctable) {
    for (int pos = 0; pos < c.block_size; ++pos) {
      std::string corr(static_cast<std::size_t>(c.block_size), 'I');
      corr[static_cast<std::size_t>(pos)] = kind;
      std::string key = pauli_syndrome(c, PauliString::parse(corr));
      auto [it, inserted] = c.syndrome_table.emplace(key, corr);
      if (!inserted && it->second != corr)
        throw std::logic_error("code has colliding single-error syndromes");
    }
  }
}

}  // namespace detail

inline const CodeSpec& code_registry(std::string_view name) {
  static const CodeSpec three = [] {
    CodeSpec c = detail::make_three_bit();
    detail::fill_syndrome_table(c);
    return c;
  }();
  static const CodeSpec seven = [] {
    CodeSpec c = detail::make_seven_bit();
    detail::fill_syndrome_table(c);
    return c;
  }();
  if (name == "three_bit") return three;
  if (name == "seven_bit") return seven;
  throw std::invalid_argument("unknown code: " + std::string(name));
}

// Sparse form of an encoded logical basis state: (amplitude index, amplitude)
// pairs over a single block. Normalization is 1/sqrt(#codewords).
inline std::vector<std::pair<std::uint64_t, cdouble>> codeword_terms(const CodeSpec& code,
                                                                     int label,
                                                                     LogicalBasis basis) {
  std::vector<std::pair<std::uint64_t, cdouble>> terms;
  if (basis == LogicalBasis::zero_one) {
    const auto& words = (label == 0) ? code.codeword_zero : code.codeword_one;
    double scale = 1.0 / std::sqrt(static_cast<double>(words.size()));
    for (const auto& [sign, bits] : words)
      terms.emplace_back(index_of_bits(bits), sign * scale);
  } else {
    // |+_L> = (|0_L> + |1_L>)/sqrt(2); |-_L> flips the sign of the odd words.
    double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(code.codeword_zero.size()));
    for (const auto& [sign, bits] : code.codeword_zero)
      terms.emplace_back(index_of_bits(bits), sign * scale);
    double one_sign = (label == 0) ? 1.0 : -1.0;
    for (const auto& [sign, bits] : code.codeword_one)
      terms.emplace_back(index_of_bits(bits), one_sign * sign * scale);
  }
  return terms;
}

// alpha|0_L> + beta|1_L> (or the (+,-) labels) on a single block.
inline StateVector encode(const CodeSpec& code, cdouble alpha, cdouble beta,
                          LogicalBasis basis = LogicalBasis::zero_one) {
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > kFidelityTol)
    throw std::invalid_argument("encode: |alpha|^2 + |beta|^2 must be 1");
  StateVector s = zero_state(code.block_size);
  for (const auto& [idx, amp] : codeword_terms(code, 0, basis)) s.amps[idx] += alpha * amp;
  for (const auto& [idx, amp] : codeword_terms(code, 1, basis)) s.amps[idx] += beta * amp;
  return s;
}

inline StateVector encode_basis(const CodeSpec& code, int label,
                                LogicalBasis basis = LogicalBasis::zero_one) {
  return encode(code, label == 0 ? 1.0 : 0.0, label == 0 ? 0.0 : 1.0, basis);
}

// Logical overlaps of a single-block state; works on arbitrary states, so
// leakage reports how much weight lies outside the code space.
inline LogicalReadout decode_logical(const CodeSpec& code, const StateVector& state,
                                     LogicalBasis basis = LogicalBasis::zero_one) {
  if (state.num_qubits != code.block_size)
    throw std::invalid_argument("decode_logical: state size does not match block size");
  LogicalReadout r{0.0, 0.0, 0.0};
  for (const auto& [idx, amp] : codeword_terms(code, 0, basis))
    r.alpha += std::conj(amp) * state.amps[idx];
  for (const auto& [idx, amp] : codeword_terms(code, 1, basis))
    r.beta += std::conj(amp) * state.amps[idx];
  r.leakage = 1.0 - std::norm(r.alpha) - std::norm(r.beta);
  return r;
}

// Embeds a block-local Pauli string onto the given qubits of a larger
// register. block_qubits[0] is block position 1 (the string's leftmost char).
inline PauliString embed_pauli(std::string_view block_string, const std::vector<int>& block_qubits,
                               int num_qubits) {
  if (block_string.size() != block_qubits.size())
    throw std::invalid_argument("embed_pauli: string length does not match block size");
  PauliString p;
  p.num_qubits = num_qubits;
  for (std::size_t i = 0; i < block_string.size(); ++i) {
    PauliString one = PauliString::single(num_qubits, block_qubits[i], block_string[i]);
    p.x_bits |= one.x_bits;
    p.z_bits |= one.z_bits;
  }
  return p;
}

// Measures the code's stabilizers (in their fixed order) on the block sitting
// at block_qubits. Projective, so the state collapses accordingly; on
// stabilizer eigenstates (every intended use) it is deterministic and leaves
// the state unchanged. One sub-seed per stabilizer is derived from rng_seed.
inline std::vector<int> extract_syndrome_on(const CodeSpec& code, StateVector& state,
                                            const std::vector<int>& block_qubits,
                                            std::uint64_t rng_seed) {
  std::vector<int> syndrome;
  syndrome.reserve(code.stabilizers.size());
  for (std::size_t k = 0; k < code.stabilizers.size(); ++k) {
    PauliString obs = embed_pauli(code.stabilizers[k], block_qubits, state.num_qubits);
    syndrome.push_back(measure_pauli(state, obs, Rng::derive(rng_seed, k)));
  }
  return syndrome;
}

inline std::vector<int> extract_syndrome(const CodeSpec& code, StateVector& state,
                                         std::uint64_t rng_seed) {
  if (state.num_qubits != code.block_size)
    throw std::invalid_argument("extract_syndrome: state size does not match block size");
  std::vector<int> qubits(static_cast<std::size_t>(code.block_size));
  for (int i = 0; i < code.block_size; ++i) qubits[static_cast<std::size_t>(i)] = code.block_size - 1 - i;
  return extract_syndrome_on(code, state, qubits, rng_seed);
}

// Single-block correction: measure the syndrome, apply the tabulated Pauli,
// verify the result is back in the code space. Unknown syndromes and residual
// syndromes (more than one error) are hard failures, never silently accepted.
inline std::string correct_memory(const CodeSpec& code, StateVector& state, std::uint64_t rng_seed) {
  std::string key = syndrome_key(extract_syndrome(code, state, rng_seed));
  auto it = code.syndrome_table.find(key);
  if (it == code.syndrome_table.end())
    throw std::runtime_error("correct_memory: syndrome " + key + " not in table");
  apply_pauli(state, PauliString::parse(it->second));
  std::string check = syndrome_key(extract_syndrome(code, state, Rng::derive(rng_seed, 0x5eed)));
  if (check != code.trivial_syndrome())
    throw std::runtime_error("correct_memory: residual syndrome " + check +
                             " after correction (more than one error?)");
  return it->second;
}

}  // namespace eqsim
