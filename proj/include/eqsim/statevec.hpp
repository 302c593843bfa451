#pragma once

// Dense state-vector simulation core: amplitudes, gate kernels, Pauli-string
// observables and projective measurement. Qubit k is bit k of the amplitude
// index (qubit 0 = least significant bit). Printed bitstrings read the other
// way around, |q_{n-1} ... q_1 q_0>, so a bitstring parses as a binary number.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eqsim {

using cdouble = std::complex<double>;

inline constexpr int kMaxQubits = 24;
inline constexpr double kNormTol = 1e-9;      // allowed L2 norm drift; beyond it we abort
inline constexpr double kUnitaryTol = 1e-12;  // entrywise unitarity tolerance
inline constexpr double kEntryTol = 1e-12;    // entrywise state/matrix comparisons
inline constexpr double kFidelityTol = 1e-10; // fidelity / leakage checks
inline constexpr double kEigenTol = 1e-9;     // outcome probability treated as certain
inline constexpr double kAmpEpsilon = 1e-14;  // amplitudes below this are dump-suppressed

// ---------------------------------------------------------------------------
// Deterministic RNG. splitmix64 stream with explicit seeding; avoids stdlib
// distributions so that identical seeds give identical bytes everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller.
  double next_gauss() {
    double u = 0.0;
    while (u == 0.0) u = next_unit();
    double v = next_unit();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  }

  static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
    Rng r(seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1)));
    return r.next_u64();
  }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Small dense unitary acting on `arity` qubits; row-major, dim = 2^arity.
// Matrix basis labels read |t_0 t_1 ...> with targets[0] the most significant
// bit, matching how bitstrings are printed.
struct GateMatrix {
  int arity = 1;
  std::vector<cdouble> m;

  int dim() const { return 1 << arity; }
  const cdouble& at(int r, int c) const { return m[static_cast<std::size_t>(r) * dim() + c]; }
  cdouble& at(int r, int c) { return m[static_cast<std::size_t>(r) * dim() + c]; }

  bool is_unitary(double tol = kUnitaryTol) const {
    const int d = dim();
    if (m.size() != static_cast<std::size_t>(d) * d) return false;
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        cdouble acc = 0.0;
        for (int k = 0; k < d; ++k) acc += std::conj(at(k, r)) * at(k, c);
        if (std::abs(acc - (r == c ? 1.0 : 0.0)) > tol) return false;
      }
    }
    return true;
  }
};

inline GateMatrix make_gate(int arity, std::initializer_list<cdouble> entries) {
  GateMatrix g{arity, std::vector<cdouble>(entries)};
  if (g.m.size() != static_cast<std::size_t>(g.dim()) * g.dim())
    throw std::invalid_argument("make_gate: entry count does not match arity");
  return g;
}

namespace gates {
inline const GateMatrix& identity() {
  static const GateMatrix g = make_gate(1, {1, 0, 0, 1});
  return g;
}
inline const GateMatrix& x() {
  static const GateMatrix g = make_gate(1, {0, 1, 1, 0});
  return g;
}
inline const GateMatrix& y() {
  static const GateMatrix g = make_gate(1, {0, cdouble(0, -1), cdouble(0, 1), 0});
  return g;
}
inline const GateMatrix& z() {
  static const GateMatrix g = make_gate(1, {1, 0, 0, -1});
  return g;
}
inline const GateMatrix& h() {
  static const double s = 1.0 / std::numbers::sqrt2;
  static const GateMatrix g = make_gate(1, {s, s, s, -s});
  return g;
}
inline const GateMatrix& pauli(char kind) {
  switch (kind) {
    case 'I': return identity();
    case 'X': return x();
    case 'Y': return y();
    case 'Z': return z();
    default: throw std::invalid_argument(std::string("unknown Pauli kind: ") + kind);
  }
}
}  // namespace gates

// ---------------------------------------------------------------------------
struct StateVector {
  int num_qubits = 0;
  std::vector<cdouble> amps;

  std::uint64_t dim() const { return std::uint64_t{1} << num_qubits; }

  double norm() const {
    double acc = 0.0;
    for (const cdouble& a : amps) acc += std::norm(a);
    return std::sqrt(acc);
  }

  void check_norm() const {
    if (std::abs(norm() - 1.0) > kNormTol)
      throw std::runtime_error("state norm drifted beyond tolerance");
  }
};

inline StateVector zero_state(int num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits)
    throw std::out_of_range("num_qubits must be in 1..24");
  StateVector s;
  s.num_qubits = num_qubits;
  s.amps.assign(std::uint64_t{1} << num_qubits, cdouble(0.0));
  return s;
}

inline StateVector basis_state(int num_qubits, std::uint64_t index) {
  StateVector s = zero_state(num_qubits);
  if (index >= s.dim()) throw std::out_of_range("basis index out of range");
  s.amps[index] = 1.0;
  return s;
}

// "100" -> index 4: leftmost character is the highest qubit.
inline std::uint64_t index_of_bits(std::string_view bits) {
  std::uint64_t idx = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw std::invalid_argument("bitstring must be over {0,1}");
    idx = (idx << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return idx;
}

inline std::string bits_of_index(std::uint64_t index, int num_qubits) {
  std::string s(static_cast<std::size_t>(num_qubits), '0');
  for (int q = 0; q < num_qubits; ++q)
    if (index >> q & 1) s[static_cast<std::size_t>(num_qubits - 1 - q)] = '1';
  return s;
}

inline StateVector basis_state(int num_qubits, std::string_view bits) {
  if (static_cast<int>(bits.size()) != num_qubits)
    throw std::invalid_argument("bitstring length must equal num_qubits");
  return basis_state(num_qubits, index_of_bits(bits));
}

// ---------------------------------------------------------------------------
// Gate application kernels.

namespace detail {

inline std::uint64_t mask_of(const std::vector<int>& qubits, int num_qubits) {
  std::uint64_t m = 0;
  for (int q : qubits) {
    if (q < 0 || q >= num_qubits) throw std::out_of_range("qubit index out of range");
    std::uint64_t bit = std::uint64_t{1} << q;
    if (m & bit) throw std::invalid_argument("duplicate qubit index");
    m |= bit;
  }
  return m;
}

inline void check_norm_sq(double norm_sq) {
  if (std::abs(std::sqrt(norm_sq) - 1.0) > kNormTol)
    throw std::runtime_error("state norm drifted beyond tolerance");
}

}  // namespace detail

// Applies `gate` to `targets` on every amplitude group selected by
// control_mask (all control bits 1). targets[0] is the most significant bit
// of the gate's index. Norm is re-checked on every call; renormalization is
// never applied silently.
inline void apply_controlled(StateVector& state, const GateMatrix& gate,
                             const std::vector<int>& controls, const std::vector<int>& targets) {
  if (static_cast<int>(targets.size()) != gate.arity)
    throw std::invalid_argument("target count does not match gate arity");
  if (!gate.is_unitary()) throw std::invalid_argument("gate matrix is not unitary");

  const std::uint64_t cmask = detail::mask_of(controls, state.num_qubits);
  const std::uint64_t tmask = detail::mask_of(targets, state.num_qubits);
  if (cmask & tmask) throw std::invalid_argument("controls and targets overlap");

  const int k = gate.arity;
  const int d = 1 << k;
  // Bit of the gate index contributed by each target (targets[0] = MSB).
  std::array<std::uint64_t, 8> tbit{};
  if (k > 8) throw std::invalid_argument("gate arity too large");
  for (int j = 0; j < k; ++j) tbit[static_cast<std::size_t>(j)] = std::uint64_t{1} << targets[static_cast<std::size_t>(j)];

  std::array<cdouble, 256> in{}, out{};
  double norm_sq = 0.0;
  const std::uint64_t dim = state.dim();
  for (std::uint64_t base = 0; base < dim; ++base) {
    if ((base & cmask) != cmask) {
      norm_sq += std::norm(state.amps[base]);
      continue;
    }
    if (base & tmask) continue;  // handled by its group's base index
    for (int r = 0; r < d; ++r) {
      std::uint64_t idx = base;
      for (int j = 0; j < k; ++j)
        if (r >> (k - 1 - j) & 1) idx |= tbit[static_cast<std::size_t>(j)];
      in[static_cast<std::size_t>(r)] = state.amps[idx];
    }
    for (int r = 0; r < d; ++r) {
      cdouble acc = 0.0;
      for (int c = 0; c < d; ++c) acc += gate.at(r, c) * in[static_cast<std::size_t>(c)];
      out[static_cast<std::size_t>(r)] = acc;
      norm_sq += std::norm(acc);
    }
    for (int r = 0; r < d; ++r) {
      std::uint64_t idx = base;
      for (int j = 0; j < k; ++j)
        if (r >> (k - 1 - j) & 1) idx |= tbit[static_cast<std::size_t>(j)];
      state.amps[idx] = out[static_cast<std::size_t>(r)];
    }
  }
  detail::check_norm_sq(norm_sq);
}

inline void apply_unitary(StateVector& state, const GateMatrix& gate,
                          const std::vector<int>& targets) {
  apply_controlled(state, gate, {}, targets);
}

inline void apply_cnot(StateVector& state, int control, int target) {
  apply_controlled(state, gates::x(), {control}, {target});
}

// ---------------------------------------------------------------------------
// Pauli strings. Stored as X/Z bit masks; a qubit with both bits set carries Y.
// String form uses the bitstring convention: leftmost character = qubit n-1.
struct PauliString {
  int num_qubits = 0;
  std::uint64_t x_bits = 0;
  std::uint64_t z_bits = 0;

  static PauliString parse(std::string_view s) {
    PauliString p;
    p.num_qubits = static_cast<int>(s.size());
    for (int i = 0; i < p.num_qubits; ++i) {
      std::uint64_t bit = std::uint64_t{1} << (p.num_qubits - 1 - i);
      switch (s[static_cast<std::size_t>(i)]) {
        case 'I': break;
        case 'X': p.x_bits |= bit; break;
        case 'Y': p.x_bits |= bit; p.z_bits |= bit; break;
        case 'Z': p.z_bits |= bit; break;
        default: throw std::invalid_argument("Pauli string must be over {I,X,Y,Z}");
      }
    }
    return p;
  }

  static PauliString single(int num_qubits, int qubit, char kind) {
    if (qubit < 0 || qubit >= num_qubits) throw std::out_of_range("qubit index out of range");
    PauliString p;
    p.num_qubits = num_qubits;
    std::uint64_t bit = std::uint64_t{1} << qubit;
    switch (kind) {
      case 'I': break;
      case 'X': p.x_bits = bit; break;
      case 'Y': p.x_bits = bit; p.z_bits = bit; break;
      case 'Z': p.z_bits = bit; break;
      default: throw std::invalid_argument(std::string("unknown Pauli kind: ") + kind);
    }
    return p;
  }

  std::string str() const {
    std::string s(static_cast<std::size_t>(num_qubits), 'I');
    for (int q = 0; q < num_qubits; ++q) {
      std::uint64_t bit = std::uint64_t{1} << q;
      char c = 'I';
      if ((x_bits & bit) && (z_bits & bit)) c = 'Y';
      else if (x_bits & bit) c = 'X';
      else if (z_bits & bit) c = 'Z';
      s[static_cast<std::size_t>(num_qubits - 1 - q)] = c;
    }
    return s;
  }

  bool is_identity() const { return x_bits == 0 && z_bits == 0; }
  int y_count() const { return std::popcount(x_bits & z_bits); }
};

namespace detail {
inline const cdouble kIPow[4] = {cdouble(1, 0), cdouble(0, 1), cdouble(-1, 0), cdouble(0, -1)};

// Per-basis-state factor of a Pauli string (excluding the global i^{#Y}):
// (-1)^{popcount(index & (z_bits))} where Y contributes through z_bits too,
// evaluated on the *input* index of the mapping index -> index ^ x_bits.
inline double pauli_sign(const PauliString& p, std::uint64_t index) {
  return (std::popcount(index & p.z_bits) & 1) ? -1.0 : 1.0;
}
}  // namespace detail

// In-place |psi> -> P|psi>. One pass; pairs are swapped when P flips bits.
inline void apply_pauli(StateVector& state, const PauliString& p) {
  if (p.num_qubits != state.num_qubits)
    throw std::invalid_argument("Pauli string length must equal num_qubits");
  const cdouble global = detail::kIPow[p.y_count() & 3];
  const std::uint64_t dim = state.dim();
  if (p.x_bits == 0) {
    for (std::uint64_t i = 0; i < dim; ++i)
      state.amps[i] *= global * detail::pauli_sign(p, i);
    return;
  }
  for (std::uint64_t i = 0; i < dim; ++i) {
    std::uint64_t j = i ^ p.x_bits;
    if (j < i) continue;
    cdouble ai = state.amps[i], aj = state.amps[j];
    state.amps[j] = global * detail::pauli_sign(p, i) * ai;
    state.amps[i] = global * detail::pauli_sign(p, j) * aj;
  }
}

inline cdouble inner_product(const StateVector& a, const StateVector& b) {
  if (a.num_qubits != b.num_qubits) throw std::invalid_argument("qubit count mismatch");
  cdouble acc = 0.0;
  for (std::uint64_t i = 0; i < a.dim(); ++i) acc += std::conj(a.amps[i]) * b.amps[i];
  return acc;
}

inline double fidelity(const StateVector& a, const StateVector& b) {
  return std::norm(inner_product(a, b));
}

// <psi| P |psi>; real for Hermitian P.
inline double expectation_pauli(const StateVector& state, const PauliString& p) {
  if (p.num_qubits != state.num_qubits)
    throw std::invalid_argument("Pauli string length must equal num_qubits");
  const cdouble global = detail::kIPow[p.y_count() & 3];
  cdouble acc = 0.0;
  for (std::uint64_t i = 0; i < state.dim(); ++i) {
    cdouble mapped = global * detail::pauli_sign(p, i) * state.amps[i];
    acc += std::conj(state.amps[i ^ p.x_bits]) * mapped;
  }
  return acc.real();
}

// Projects onto the `sign` eigenspace of P and renormalizes (the one place
// renormalization is legitimate). Throws if the branch has ~zero probability.
inline void project_pauli(StateVector& state, const PauliString& p, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
  StateVector mapped = state;
  apply_pauli(mapped, p);
  double prob = 0.0;
  for (std::uint64_t i = 0; i < state.dim(); ++i) {
    state.amps[i] = 0.5 * (state.amps[i] + static_cast<double>(sign) * mapped.amps[i]);
    prob += std::norm(state.amps[i]);
  }
  if (prob < 1e-12) throw std::runtime_error("projection onto zero-probability branch");
  double scale = 1.0 / std::sqrt(prob);
  for (cdouble& a : state.amps) a *= scale;
}

// Projective measurement of a Pauli-string observable. Deterministic — no
// randomness consumed — when the state is (numerically) an eigenstate;
// otherwise one uniform draw from Rng(rng_seed) decides the branch.
inline int measure_pauli(StateVector& state, const PauliString& p, std::uint64_t rng_seed) {
  state.check_norm();
  double ev = expectation_pauli(state, p);
  double p_plus = std::clamp(0.5 * (1.0 + ev), 0.0, 1.0);
  int outcome;
  if (p_plus >= 1.0 - kEigenTol) outcome = 1;
  else if (p_plus <= kEigenTol) outcome = -1;
  else outcome = Rng(rng_seed).next_unit() < p_plus ? 1 : -1;
  project_pauli(state, p, outcome);
  return outcome;
}

inline int measure_pauli(StateVector& state, std::string_view observable, std::uint64_t rng_seed) {
  return measure_pauli(state, PauliString::parse(observable), rng_seed);
}

// ---------------------------------------------------------------------------
// Diagnostics and comparisons.

// One line per non-suppressed amplitude: "index(bitstring) re im".
inline std::string dump_state(const StateVector& state) {
  std::ostringstream os;
  os.precision(17);
  for (std::uint64_t i = 0; i < state.dim(); ++i) {
    if (std::abs(state.amps[i]) < kAmpEpsilon) continue;
    os << i << '(' << bits_of_index(i, state.num_qubits) << ") " << state.amps[i].real() << ' '
       << state.amps[i].imag() << '\n';
  }
  return os.str();
}

// Canonical global phase: first amplitude above threshold made real-positive.
inline void align_global_phase(StateVector& state, double threshold = 1e-12) {
  for (const cdouble& a : state.amps) {
    if (std::abs(a) > threshold) {
      cdouble phase = a / std::abs(a);
      for (cdouble& b : state.amps) b /= phase;
      return;
    }
  }
}

inline double max_entry_distance(const StateVector& a, const StateVector& b) {
  if (a.num_qubits != b.num_qubits) throw std::invalid_argument("qubit count mismatch");
  double worst = 0.0;
  for (std::uint64_t i = 0; i < a.dim(); ++i)
    worst = std::max(worst, std::abs(a.amps[i] - b.amps[i]));
  return worst;
}

// Reduced density matrix of `qubits` (order: qubits[0] = most significant bit
// of the row/column index), dim 2^k. Used for ancilla-purity and block
// restoration checks.
inline std::vector<cdouble> reduced_density(const StateVector& state, const std::vector<int>& qubits) {
  const int k = static_cast<int>(qubits.size());
  if (k > 12) throw std::invalid_argument("reduced_density: too many qubits");
  const std::uint64_t qmask = detail::mask_of(qubits, state.num_qubits);
  const int d = 1 << k;
  auto embed = [&](std::uint64_t rest, int sub) {
    std::uint64_t idx = rest;
    for (int j = 0; j < k; ++j)
      if (sub >> (k - 1 - j) & 1) idx |= std::uint64_t{1} << qubits[static_cast<std::size_t>(j)];
    return idx;
  };
  std::vector<cdouble> rho(static_cast<std::size_t>(d) * d, cdouble(0.0));
  for (std::uint64_t rest = 0; rest < state.dim(); ++rest) {
    if (rest & qmask) continue;
    for (int r = 0; r < d; ++r) {
      cdouble ar = state.amps[embed(rest, r)];
      if (ar == cdouble(0.0)) continue;
      for (int c = 0; c < d; ++c)
        rho[static_cast<std::size_t>(r) * d + c] += ar * std::conj(state.amps[embed(rest, c)]);
    }
  }
  return rho;
}

inline double purity(const std::vector<cdouble>& rho) {
  double acc = 0.0;
  for (const cdouble& e : rho) acc += std::norm(e);
  return acc;
}

}  // namespace eqsim
