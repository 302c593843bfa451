#pragma once

// End-to-end verification checks, one function per claim, shared by the CLI's
// --all mode and the acceptance test binary. Each check reports pass/fail, a
// human-readable detail line, and its runtime; checks with a pinned runtime
// budget fail when they exceed it.

#include <chrono>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "eqsim/circuit.hpp"
#include "eqsim/codes.hpp"
#include "eqsim/error_recovery.hpp"
#include "eqsim/logical_gates.hpp"
#include "eqsim/statevec.hpp"

namespace eqsim {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline CriterionResult timed_criterion(int id, std::string name, double budget_s,
                                       const std::function<bool(std::string&)>& body) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  auto t0 = std::chrono::steady_clock::now();
  try {
    r.pass = body(r.detail);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && r.seconds > budget_s) {
    r.pass = false;
    std::ostringstream os;
    os << r.detail << " [runtime " << r.seconds << "s exceeded budget " << budget_s << "s]";
    r.detail = os.str();
  }
  return r;
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

}  // namespace detail

// 1 — transversal CNOT on random two-block superpositions: the output must
// equal the directly-constructed entangled logical state.
inline CriterionResult criterion_superposition(std::uint64_t seed) {
  return detail::timed_criterion(1, "transversal CNOT on random payload superpositions", 1.0,
                                 [&](std::string& det) {
    const CodeSpec& code = code_registry("three_bit");
    Circuit circ = build_transversal_cnot(code);
    double worst = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      Rng rng(Rng::derive(seed, 0xc1 * 1000 + static_cast<std::uint64_t>(iter)));
      auto payloads = detail::random_payloads(2, rng);
      StateVector state = encode_blocks(circ.layout, code, payloads);
      run_circuit(circ, state);
      const auto& [alpha, beta] = payloads[0];
      const auto& [a, b] = payloads[1];
      StateVector expected =
          encode_logical_vector(circ.layout, code, {alpha * a, alpha * b, beta * b, beta * a});
      worst = std::min(worst, fidelity(state, expected));
    }
    det = "100 random payloads, min fidelity " + detail::fmt(worst);
    return worst >= 1.0 - kFidelityTol;
  });
}

// 2 — every CNOT construction implements the logical CNOT matrix with
// negligible leakage.
inline CriterionResult criterion_cnot_matrices(std::uint64_t) {
  return detail::timed_criterion(2, "CNOT constructions match the logical CNOT matrix", 1.0,
                                 [&](std::string& det) {
    struct Case { const char* label; Circuit circ; const CodeSpec* code; };
    const CodeSpec& three = code_registry("three_bit");
    const CodeSpec& seven = code_registry("seven_bit");
    std::vector<Case> cases;
    cases.push_back({"transversal/3", build_transversal_cnot(three), &three});
    cases.push_back({"top-qubit/3", build_top_qubit_cnot(three), &three});
    cases.push_back({"parity-ancilla/3", build_parity_ancilla_cnot(three), &three});
    cases.push_back({"transversal/7", build_transversal_cnot(seven), &seven});
    const auto want = ideal_cnot_matrix();
    double worst_dev = 0.0, worst_leak = 0.0;
    for (const Case& c : cases) {
      ActionMatrix am = logical_action_matrix(c.circ, *c.code);
      MatrixComparison cmp = compare_up_to_global_phase(am.m, want);
      worst_dev = std::max(worst_dev, cmp.max_abs_deviation);
      worst_leak = std::max(worst_leak, am.max_leakage());
    }
    det = "4 constructions, worst matrix deviation " + detail::fmt(worst_dev) +
             ", worst leakage " + detail::fmt(worst_leak);
    return worst_dev <= 1e-10 && worst_leak <= 1e-10;
  });
}

// 3 — the three-block construction is a logical Toffoli with the exact V, and
// with the textbook V it deviates by exactly a phase i on the (1,1) control
// sector.
inline CriterionResult criterion_toffoli_action(std::uint64_t) {
  return detail::timed_criterion(3, "Toffoli action and V-variant phase", 1.0,
                                 [&](std::string& det) {
    const CodeSpec& code = code_registry("three_bit");
    const auto ideal = ideal_toffoli_matrix();

    Circuit exact = build_toffoli(code, VVariant::exact, ControlMode::ancilla, TargetSpan::top_qubit);
    ActionMatrix am_exact = logical_action_matrix(exact, code);
    MatrixComparison cmp_exact = compare_up_to_global_phase(am_exact.m, ideal);

    auto want_paper = ideal;
    want_paper[6 * 8 + 7] = cdouble(0, 1);
    want_paper[7 * 8 + 6] = cdouble(0, 1);
    Circuit paper = build_toffoli(code, VVariant::paper, ControlMode::ancilla, TargetSpan::top_qubit);
    ActionMatrix am_paper = logical_action_matrix(paper, code);
    MatrixComparison cmp_paper = compare_up_to_global_phase(am_paper.m, want_paper);

    det = "exact-V deviation " + detail::fmt(cmp_exact.max_abs_deviation) +
             ", leakage " + detail::fmt(am_exact.max_leakage()) +
             "; paper-V matches Toffoli-with-phase-i template within " +
             detail::fmt(cmp_paper.max_abs_deviation);
    return cmp_exact.max_abs_deviation <= 1e-10 && am_exact.max_leakage() <= 1e-10 &&
           cmp_paper.max_abs_deviation <= 1e-10 && am_paper.max_leakage() <= 1e-10;
  });
}

// 4 — equal-weight payloads encode to the product strings |+++> / |--->, and
// the Hadamard-conjugated construction is a Toffoli on the (+,-) labels.
inline CriterionResult criterion_dual_basis(std::uint64_t) {
  return detail::timed_criterion(4, "dual-basis encoding and dual-basis Toffoli", 0.0,
                                 [&](std::string& det) {
    const CodeSpec& code = code_registry("three_bit");
    const double s = 1.0 / std::numbers::sqrt2;
    double worst_entry = 0.0;
    for (int label = 0; label < 2; ++label) {
      StateVector got = encode(code, s, label == 0 ? s : -s);
      StateVector want = zero_state(3);
      for (std::uint64_t idx = 0; idx < 8; ++idx) {
        double sign = (label == 1 && (std::popcount(idx) & 1)) ? -1.0 : 1.0;
        want.amps[idx] = sign / std::sqrt(8.0);
      }
      worst_entry = std::max(worst_entry, max_entry_distance(got, want));
    }

    Circuit circ = build_dual_basis_toffoli(code, VVariant::exact);
    ActionMatrix am = logical_action_matrix(circ, code, LogicalBasis::plus_minus);
    MatrixComparison cmp = compare_up_to_global_phase(am.m, ideal_toffoli_matrix());
    det = "encoding entry deviation " + detail::fmt(worst_entry) + ", dual Toffoli deviation " +
             detail::fmt(cmp.max_abs_deviation) + ", leakage " + detail::fmt(am.max_leakage());
    return worst_entry <= kEntryTol && cmp.max_abs_deviation <= 1e-10 &&
           am.max_leakage() <= 1e-10;
  });
}

// 5 — seven-qubit block memory: every single-qubit Pauli on every position is
// detected and undone by the syndrome table, for random payloads.
inline CriterionResult criterion_seven_bit_memory(std::uint64_t seed) {
  return detail::timed_criterion(5, "seven-qubit single-error correction", 5.0,
                                 [&](std::string& det) {
    const CodeSpec& code = code_registry("seven_bit");
    double worst = 1.0;
    int cases = 0;
    for (int p = 0; p < 8; ++p) {
      Rng rng(Rng::derive(seed, 0xc5 * 100 + static_cast<std::uint64_t>(p)));
      auto payload = detail::random_payloads(1, rng)[0];
      StateVector clean = encode(code, payload.first, payload.second);
      for (char kind : {'X', 'Y', 'Z'}) {
        for (int q = 0; q < 7; ++q) {
          StateVector state = clean;
          apply_pauli(state, PauliString::single(7, q, kind));
          std::string corr = correct_memory(code, state, Rng::derive(seed, cases));
          int block_pos = 7 - 1 - q;  // qubit q sits at string position 7-q
          if (corr[static_cast<std::size_t>(block_pos)] != kind) return false;
          worst = std::min(worst, fidelity(state, clean));
          ++cases;
        }
      }
    }
    det = std::to_string(cases) + " injected errors, min post-correction fidelity " +
             detail::fmt(worst);
    return worst >= 1.0 - kFidelityTol;
  });
}

// 6 — fault propagation through the transversal CNOT, in both logical bases:
// (a) on (+,-) payloads a phase fault on the block that acts as the dual
//     target keeps its idle-memory syndrome and does not spread;
// (b) the same fault on the dual control block copies its syndrome onto both
//     blocks (same per-block pattern);
// (c) on (0,1) payloads a control-block phase fault at any position needs
//     only that block's memory correction;
// and the full phase-fault sweep is recovered in both bases.
inline CriterionResult criterion_propagation(std::uint64_t seed) {
  return detail::timed_criterion(6, "fault propagation through the transversal CNOT", 10.0,
                                 [&](std::string& det) {
    const CodeSpec& code = code_registry("three_bit");
    Circuit circ = build_transversal_cnot(code);
    const auto& cq = circ.layout.block_qubits("C");
    const auto& tq = circ.layout.block_qubits("T");
    const std::string trivial = code.trivial_syndrome();

    auto pm_input = [&](std::uint64_t salt) {
      Rng rng(Rng::derive(seed, 0xc6 * 1000 + salt));
      return encode_blocks(circ.layout, code, detail::random_payloads(2, rng),
                           LogicalBasis::plus_minus);
    };
    auto idle_key = [&](int block_pos) {
      std::string e(3, 'I');
      e[static_cast<std::size_t>(block_pos)] = 'Z';
      return pauli_syndrome(code, PauliString::parse(e));
    };

    // (a) physical control block = dual-basis target: fault stays put.
    for (int i = 0; i < 3; ++i) {
      StateVector state = pm_input(static_cast<std::uint64_t>(i));
      run_with_faults(circ, state, {{cq[static_cast<std::size_t>(i)], 'Z', 0}});
      auto syn = measure_block_syndromes(circ.layout, code, state, Rng::derive(seed, 10 + i));
      if (syn[0] != idle_key(i) || syn[1] != trivial) {
        det = "dual-target fault spread: " + join_syndromes(syn);
        return false;
      }
    }
    // (b) physical target block = dual-basis control: syndrome copies to both.
    for (int i = 0; i < 3; ++i) {
      StateVector state = pm_input(100 + static_cast<std::uint64_t>(i));
      run_with_faults(circ, state, {{tq[static_cast<std::size_t>(i)], 'Z', 0}});
      auto syn = measure_block_syndromes(circ.layout, code, state, Rng::derive(seed, 20 + i));
      if (syn[0] != idle_key(i) || syn[1] != idle_key(i)) {
        det = "dual-control fault did not copy: " + join_syndromes(syn);
        return false;
      }
    }

    // Shared table over the full phase-fault sweep.
    auto faults = enumerate_fault_points(circ, "Z");
    RecoveryTable table = build_recovery_table(circ, code, faults, Rng::derive(seed, 0x7a));

    // (c) control-block faults in the (0,1) basis: memory correction on that
    // block alone.
    for (int i = 0; i < 3; ++i) {
      for (int p = 0; p <= 3; ++p) {
        Rng rng(Rng::derive(seed, 0xc6c + static_cast<std::uint64_t>(i * 4 + p)));
        StateVector input = encode_blocks(circ.layout, code, detail::random_payloads(2, rng));
        StateVector ref = input;
        run_circuit(circ, ref);
        StateVector state = input;
        run_with_faults(circ, state, {{cq[static_cast<std::size_t>(i)], 'Z', p}});
        RecoveryOutcome o = recover_joint(circ, code, table, state, Rng::derive(seed, 30 + i * 4 + p), ref);
        bool memory_style = o.recovered && o.correction.cz_blocks.empty() &&
                            o.correction.paulis.size() == 1 &&
                            o.correction.paulis[0].first == cq[static_cast<std::size_t>(i)];
        if (!memory_style) {
          det = "control fault Z@" + qubit_label(circ.layout, cq[static_cast<std::size_t>(i)]) +
                   "@p" + std::to_string(p) + " not memory-correctable (got " +
                   o.correction.str(circ.layout) + ")";
          return false;
        }
      }
    }

    // Full sweep recovered in the (0,1) basis...
    SweepReport rep = run_sweep(circ, code, faults, Rng::derive(seed, 0x5e), table);
    if (!rep.all_recovered) {
      det = "sweep left unrecovered faults in the (0,1) basis";
      return false;
    }
    // ...and with (+,-) payloads against the same table.
    for (std::size_t fi = 0; fi < faults.size(); ++fi) {
      StateVector input = pm_input(0xb0 + fi);
      StateVector ref = input;
      run_circuit(circ, ref);
      StateVector state = input;
      run_with_faults(circ, state, {faults[fi]});
      RecoveryOutcome o = recover_joint(circ, code, table, state, Rng::derive(seed, 0x6b0 + fi), ref);
      if (!o.recovered) {
        det = "fault " + fault_label(circ.layout, faults[fi]) + " unrecovered on (+,-) payloads";
        return false;
      }
    }
    det = "propagation patterns verified; " + std::to_string(faults.size()) +
             " faults recovered in both bases";
    return true;
  });
}

// 7 — phase faults on either control block of the three-block Toffoli, at
// every position: unambiguous table, every fault recovered.
inline CriterionResult criterion_toffoli_control_sweep(std::uint64_t seed) {
  return detail::timed_criterion(7, "Toffoli control-block fault sweep with joint recovery", 30.0,
                                 [&](std::string& det) {
    const CodeSpec& code = code_registry("three_bit");
    Circuit circ = build_toffoli(code, VVariant::exact, ControlMode::ancilla, TargetSpan::top_qubit);
    std::vector<int> qubits = circ.layout.block_qubits("CI");
    for (int q : circ.layout.block_qubits("CII")) qubits.push_back(q);
    auto faults = enumerate_fault_points(circ, "Z", qubits);
    RecoveryTable table = build_recovery_table(circ, code, faults, Rng::derive(seed, 0xc7));
    SweepReport rep = run_sweep(circ, code, faults, Rng::derive(seed, 0xc7 + 1), table);
    det = std::to_string(faults.size()) + " control-block faults, table size " +
             std::to_string(table.entries.size()) + ", all recovered";
    return rep.all_recovered;
  });
}

// 8 — the 21-qubit three-block Toffoli on the seven-qubit code acts as the
// logical Toffoli.
inline CriterionResult criterion_toffoli7(std::uint64_t) {
  return detail::timed_criterion(8, "21-qubit Toffoli action", 120.0, [&](std::string& det) {
    const CodeSpec& code = code_registry("seven_bit");
    Circuit circ = build_toffoli(code, VVariant::exact, ControlMode::fold, TargetSpan::transversal);
    if (circ.layout.total_qubits != 21) {
      det = "unexpected register size " + std::to_string(circ.layout.total_qubits);
      return false;
    }
    ActionMatrix am = logical_action_matrix(circ, code);
    MatrixComparison cmp = compare_up_to_global_phase(am.m, ideal_toffoli_matrix());
    det = "matrix deviation " + detail::fmt(cmp.max_abs_deviation) + ", leakage " +
             detail::fmt(am.max_leakage());
    return cmp.max_abs_deviation <= 1e-10 && am.max_leakage() <= 1e-10;
  });
}

// 9 — the parity-bus ancilla disentangles: after the ancilla-mediated CNOT on
// random payloads it is exactly |0> again.
inline CriterionResult criterion_ancilla_disentangles(std::uint64_t seed) {
  return detail::timed_criterion(9, "parity-bus ancilla returns to |0>", 0.0,
                                 [&](std::string& det) {
    const CodeSpec& code = code_registry("three_bit");
    Circuit circ = build_parity_ancilla_cnot(code);
    double worst_purity = 1.0, worst_zero = 1.0;
    for (int iter = 0; iter < 20; ++iter) {
      Rng rng(Rng::derive(seed, 0xc9 * 100 + static_cast<std::uint64_t>(iter)));
      StateVector state = encode_blocks(circ.layout, code, detail::random_payloads(2, rng));
      run_circuit(circ, state);
      auto rho = reduced_density(state, {circ.layout.ancillas[0]});
      worst_purity = std::min(worst_purity, purity(rho));
      worst_zero = std::min(worst_zero, rho[0].real());
    }
    det = "20 payloads, min purity " + detail::fmt(worst_purity) + ", min <0|rho|0> " +
             detail::fmt(worst_zero);
    return worst_purity >= 1.0 - kFidelityTol && worst_zero >= 1.0 - kFidelityTol;
  });
}

}  // namespace eqsim
