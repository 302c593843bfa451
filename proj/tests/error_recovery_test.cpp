#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "eqsim/error_recovery.hpp"
#include "eqsim/logical_gates.hpp"

using namespace eqsim;

namespace {

std::vector<std::pair<cdouble, cdouble>> random_payloads(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<cdouble, cdouble>> out;
  for (int i = 0; i < n; ++i) {
    cdouble a(rng.next_gauss(), rng.next_gauss()), b(rng.next_gauss(), rng.next_gauss());
    double s = 1.0 / std::sqrt(std::norm(a) + std::norm(b));
    out.emplace_back(a * s, b * s);
  }
  return out;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST(Enumerate, CountsAndOrder) {
  const CodeSpec& seven = code_registry("seven_bit");
  Circuit big = build_transversal_cnot(seven);
  // 3 kinds x 14 data qubits x 8 positions.
  EXPECT_EQ(enumerate_fault_points(big, "XYZ").size(), 336u);

  const CodeSpec& three = code_registry("three_bit");
  Circuit small = build_transversal_cnot(three);
  EXPECT_EQ(enumerate_fault_points(small, "Z").size(), 24u);

  // Nesting order is kinds, then qubits, then positions.
  auto f = enumerate_fault_points(small, "XZ", std::vector<int>{1, 0}, std::vector<int>{0, 3});
  ASSERT_EQ(f.size(), 8u);
  EXPECT_EQ(fault_label(small.layout, f[0]), "X@T2@p0");
  EXPECT_EQ(fault_label(small.layout, f[1]), "X@T2@p3");
  EXPECT_EQ(fault_label(small.layout, f[2]), "X@T3@p0");
  EXPECT_EQ(fault_label(small.layout, f[4]), "Z@T2@p0");
  EXPECT_EQ(fault_label(small.layout, f[7]), "Z@T3@p3");
}

TEST(Enumerate, QubitLabels) {
  const CodeSpec& three = code_registry("three_bit");
  Circuit pa = build_parity_ancilla_cnot(three);
  EXPECT_EQ(qubit_label(pa.layout, 5), "C1");
  EXPECT_EQ(qubit_label(pa.layout, 3), "C3");
  EXPECT_EQ(qubit_label(pa.layout, 2), "T1");
  EXPECT_EQ(qubit_label(pa.layout, 6), "anc0");
  EXPECT_EQ(qubit_label(pa.layout, 9), "q9");
  EXPECT_EQ(fault_label(pa.layout, {4, 'Z', 3}), "Z@C2@p3");
}

TEST(FaultInjection, MatchesManualApplication) {
  const CodeSpec& code = code_registry("three_bit");
  Circuit circ = build_transversal_cnot(code);
  StateVector input = encode_blocks(circ.layout, code, random_payloads(2, 11));

  // Fault before the first op == apply the Pauli, then run.
  StateVector a = input;
  run_with_faults(circ, a, {{4, 'Y', 0}});
  StateVector b = input;
  apply_pauli(b, PauliString::single(6, 4, 'Y'));
  run_circuit(circ, b);
  EXPECT_NEAR(fidelity(a, b), 1.0, 1e-13);

  // Fault at position ops.size() == run, then apply.
  StateVector c = input;
  run_with_faults(circ, c, {{0, 'X', 3}});
  StateVector d = input;
  run_circuit(circ, d);
  apply_pauli(d, PauliString::single(6, 0, 'X'));
  EXPECT_NEAR(fidelity(c, d), 1.0, 1e-13);

  StateVector e = input;
  EXPECT_THROW(run_with_faults(circ, e, {{0, 'Z', 4}}), std::out_of_range);
  EXPECT_THROW(run_with_faults(circ, e, {{0, 'Z', -1}}), std::out_of_range);
}

TEST(RecoveryTable, TransversalPhaseTable) {
  const CodeSpec& code = code_registry("three_bit");
  Circuit circ = build_transversal_cnot(code);
  auto faults = enumerate_fault_points(circ, "Z");
  RecoveryTable table = build_recovery_table(circ, code, faults, 7);

  // Clean key, 3 control-side keys, 3 target-side keys, 3 matched pairs from
  // phase faults that back-propagate through their own CNOT.
  ASSERT_EQ(table.entries.size(), 10u);
  EXPECT_TRUE(table.entries.at("++|++").correction.is_identity());

  const TableEntry& c1 = table.entries.at("-+|++");
  EXPECT_EQ(c1.correction.paulis, (std::vector<std::pair<int, char>>{{5, 'Z'}}));
  EXPECT_TRUE(c1.correction.cz_blocks.empty());
  EXPECT_EQ(c1.correction.str(circ.layout), "Z@C1");
  EXPECT_EQ(c1.witness.qubit, 5);
  EXPECT_EQ(c1.witness.position, 0);

  EXPECT_EQ(table.entries.at("++|-+").correction.str(circ.layout), "Z@T1");
  EXPECT_EQ(table.entries.at("-+|-+").correction.str(circ.layout), "Z@C1+Z@T1");
  EXPECT_EQ(table.entries.at("--|--").correction.str(circ.layout), "Z@C2+Z@T2");
  EXPECT_EQ(table.entries.at("+-|+-").correction.str(circ.layout), "Z@C3+Z@T3");
  for (const auto& [key, entry] : table.entries) EXPECT_FALSE(entry.conditional_phase) << key;
}

TEST(RecoveryTable, BitFlipFaultsAreAmbiguous) {
  // Bit flips commute with the phase code's stabilizers, so they are logical
  // errors with a clean syndrome — table construction must refuse, loudly.
  const CodeSpec& code = code_registry("three_bit");
  Circuit circ = build_transversal_cnot(code);
  auto faults = enumerate_fault_points(circ, "X");
  try {
    build_recovery_table(circ, code, faults, 7);
    FAIL() << "expected ambiguity abort";
  } catch (const std::runtime_error& e) {
    EXPECT_TRUE(contains(e.what(), "ambiguous syndrome")) << e.what();
    EXPECT_TRUE(contains(e.what(), "fault-free run")) << e.what();
  }
}

TEST(RecoveryTable, ToffoliConditionalPhase) {
  const CodeSpec& code = code_registry("three_bit");
  Circuit circ = build_toffoli(code, VVariant::exact, ControlMode::ancilla, TargetSpan::top_qubit);
  const int t1 = circ.layout.block_qubits("T")[0];

  // Before the first controlled-V (ops 0..3) a phase fault on the target's
  // top qubit conjugates to Z plus a (-1) on the doubly-fired sector: the
  // correction needs the logical controlled-phase between the control blocks.
  std::vector<PauliError> pre, post;
  for (int p = 0; p <= 3; ++p) pre.push_back({t1, 'Z', p});
  for (int p = 24; p <= 27; ++p) post.push_back({t1, 'Z', p});

  RecoveryTable pre_table = build_recovery_table(circ, code, pre, 99);
  ASSERT_EQ(pre_table.entries.size(), 2u);
  const TableEntry& e = pre_table.entries.at("++|++|-+");
  EXPECT_TRUE(e.conditional_phase);
  EXPECT_EQ(e.correction.cz_blocks, (std::vector<std::pair<int, int>>{{0, 1}}));
  EXPECT_EQ(e.correction.str(circ.layout), "Z@T1+CZL(CI,CII)");

  // After the last controlled-V the same fault is a plain memory error.
  RecoveryTable post_table = build_recovery_table(circ, code, post, 99);
  const TableEntry& e2 = post_table.entries.at("++|++|-+");
  EXPECT_FALSE(e2.conditional_phase);
  EXPECT_EQ(e2.correction.str(circ.layout), "Z@T1");

  // Same syndrome, incompatible corrections: a table over both windows must
  // refuse rather than guess.
  std::vector<PauliError> both = pre;
  both.insert(both.end(), post.begin(), post.end());
  try {
    build_recovery_table(circ, code, both, 99);
    FAIL() << "expected ambiguity abort";
  } catch (const std::runtime_error& ex) {
    EXPECT_TRUE(contains(ex.what(), "ambiguous syndrome")) << ex.what();
  }
}

TEST(RecoveryTable, ParityBusBackPropagation) {
  // Through the shared bus, a pre-kick phase fault on the target's top qubit
  // lands as Z on that qubit *times a full logical phase on the control
  // block*. Direct state comparison first, then the loud refusal.
  const CodeSpec& code = code_registry("three_bit");
  Circuit pa = build_parity_ancilla_cnot(code);
  StateVector input = encode_blocks(pa.layout, code, random_payloads(2, 77));

  StateVector faulty = input;
  run_with_faults(pa, faulty, {{2, 'Z', 0}});
  StateVector manual = input;
  run_circuit(pa, manual);
  apply_pauli(manual, embed_pauli("ZZZ", pa.layout.block_qubits("C"), 7));
  apply_pauli(manual, PauliString::single(7, 2, 'Z'));
  EXPECT_NEAR(fidelity(faulty, manual), 1.0, 1e-12);

  try {
    build_recovery_table(pa, code, {{2, 'Z', 0}}, 5);
    FAIL() << "expected no-correction abort";
  } catch (const std::runtime_error& e) {
    EXPECT_TRUE(contains(e.what(), "no correction")) << e.what();
    EXPECT_TRUE(contains(e.what(), "Z@T1@p0")) << e.what();
  }
}

TEST(RecoveryTable, BusFaultAliasesMemoryError) {
  // With the parity collected on the bus, a phase fault there equals the
  // two-qubit phase Z@C1 Z@C2 — same syndrome as Z@C3 but a different error,
  // and nothing in the single-Pauli group fixes it.
  const CodeSpec& code = code_registry("three_bit");
  Circuit pa = build_parity_ancilla_cnot(code);
  auto faults = enumerate_fault_points(pa, "Z", std::vector<int>{pa.layout.ancillas[0]});
  try {
    build_recovery_table(pa, code, faults, 5);
    FAIL() << "expected no-correction abort";
  } catch (const std::runtime_error& e) {
    EXPECT_TRUE(contains(e.what(), "no correction")) << e.what();
    EXPECT_TRUE(contains(e.what(), "anc0")) << e.what();
  }
}

TEST(RecoveryTable, FoldModeLeavesControlUnprotected) {
  // Folding the parity onto the block's own top qubit takes that block out of
  // the code space mid-stage: a phase fault landing between the fold wires
  // unfolds into a two-qubit phase error, which no single-qubit correction
  // repairs. The table builder must abort rather than tabulate junk.
  const CodeSpec& code = code_registry("three_bit");
  Circuit fold = build_toffoli(code, VVariant::exact, ControlMode::fold, TargetSpan::transversal);
  std::vector<int> ctrl = fold.layout.block_qubits("CI");
  for (int q : fold.layout.block_qubits("CII")) ctrl.push_back(q);
  auto faults = enumerate_fault_points(fold, "Z", ctrl);
  try {
    build_recovery_table(fold, code, faults, 13);
    FAIL() << "expected abort";
  } catch (const std::runtime_error& e) {
    EXPECT_TRUE(contains(e.what(), "no correction")) << e.what();
    EXPECT_TRUE(contains(e.what(), "Z@CI1@p1")) << e.what();
  }
}

TEST(RecoveryTable, MidWindowFaultAbortsLoudly) {
  // Between the controlled square roots the fault operator is conjugated into
  // different Pauli types on different control sectors; no tabulated single
  // correction exists and construction must throw rather than tabulate junk.
  const CodeSpec& code = code_registry("three_bit");
  Circuit dual = build_dual_basis_toffoli(code, VVariant::exact);
  std::vector<PauliError> faults = {{2, 'Z', 13}};  // after the first inner CV on T1
  try {
    build_recovery_table(dual, code, faults, 3);
    FAIL() << "expected abort";
  } catch (const std::runtime_error& e) {
    EXPECT_TRUE(contains(e.what(), "recovery table")) << e.what();
  }
}

TEST(Recovery, UnknownSyndromeReported) {
  const CodeSpec& code = code_registry("three_bit");
  Circuit circ = build_transversal_cnot(code);
  auto faults = enumerate_fault_points(circ, "Z");
  RecoveryTable table = build_recovery_table(circ, code, faults, 7);

  // Basis payloads pin the residual-error overlaps exactly: a leftover
  // logical bit flip has zero overlap with |0>, a leftover phase averages out.
  StateVector input = encode_blocks(circ.layout, code, {{1.0, 0.0}, {0.0, 1.0}});
  StateVector ref = input;
  run_circuit(circ, ref);

  // Two simultaneous faults produce a key no single fault ever made.
  StateVector s = input;
  run_with_faults(circ, s, {{5, 'Z', 0}, {1, 'Z', 3}});
  RecoveryOutcome o = recover_joint(circ, code, table, s, 31, ref);
  EXPECT_EQ(o.key, "-+|--");
  EXPECT_FALSE(o.in_table);
  EXPECT_FALSE(o.recovered);
  EXPECT_TRUE(o.correction.is_identity());

  // A bit-flip component shares a tabulated key but the tabulated correction
  // does not restore: the residual is a logical flip on both blocks, so the
  // fidelity against the basis payload vanishes and recovered must be false.
  StateVector s2 = input;
  run_with_faults(circ, s2, {{4, 'Y', 0}});
  RecoveryOutcome o2 = recover_joint(circ, code, table, s2, 32, ref);
  EXPECT_TRUE(o2.in_table);
  EXPECT_FALSE(o2.recovered);
  EXPECT_LT(o2.fidelity, 1e-9);
}

TEST(Sweep, TransversalPhaseSweepRecovers) {
  const CodeSpec& code = code_registry("three_bit");
  Circuit circ = build_transversal_cnot(code);
  auto faults = enumerate_fault_points(circ, "Z");
  SweepReport rep = run_sweep(circ, code, faults, 2024);
  ASSERT_EQ(rep.rows.size(), 24u);
  EXPECT_TRUE(rep.all_recovered);
  for (const SweepRow& r : rep.rows) {
    EXPECT_TRUE(r.recovered) << r.fault_name;
    EXPECT_GE(r.fidelity, 1.0 - 1e-10) << r.fault_name;
  }

  std::string csv = sweep_to_csv(circ, rep);
  std::istringstream is(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(is, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 25u);
  EXPECT_EQ(lines[0],
            "circuit,code,fault_kind,fault_qubit,fault_position,syndrome,correction,fidelity,recovered");
  EXPECT_TRUE(contains(lines[1], "transversal_cnot,three_bit,Z,C1,0,-+|++,Z@C1,"));
  for (std::size_t i = 1; i < lines.size(); ++i) EXPECT_TRUE(contains(lines[i], ",true"));
}

TEST(Sweep, CsvQuotesCompositeCorrections) {
  const CodeSpec& code = code_registry("three_bit");
  Circuit circ = build_toffoli(code, VVariant::exact, ControlMode::ancilla, TargetSpan::top_qubit);
  std::vector<PauliError> pre;
  for (int p = 0; p <= 3; ++p) pre.push_back({2, 'Z', p});
  RecoveryTable table = build_recovery_table(circ, code, pre, 99);
  SweepReport rep = run_sweep(circ, code, pre, 99, table);
  EXPECT_TRUE(rep.all_recovered);
  std::string csv = sweep_to_csv(circ, rep);
  // The correction contains a comma, so the CSV field must be quoted.
  EXPECT_TRUE(contains(csv, "\"Z@T1+CZL(CI,CII)\"")) << csv;

  EXPECT_EQ(detail::csv_escape("plain"), "plain");
  EXPECT_EQ(detail::csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(detail::csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(LogicalCz, PhasePattern) {
  const CodeSpec& code = code_registry("three_bit");
  BlockLayout lay = make_layout(3, {"A", "B"});

  StateVector s11 = encode_logical_vector(lay, code, {0.0, 0.0, 0.0, 1.0});
  StateVector before = s11;
  apply_logical_cz(s11, lay.block_qubits("A"), lay.block_qubits("B"));
  EXPECT_NEAR(std::abs(inner_product(before, s11) - cdouble(-1.0)), 0.0, 1e-13);

  StateVector s01 = encode_logical_vector(lay, code, {0.0, 1.0, 0.0, 0.0});
  StateVector before01 = s01;
  apply_logical_cz(s01, lay.block_qubits("A"), lay.block_qubits("B"));
  EXPECT_NEAR(std::abs(inner_product(before01, s01) - cdouble(1.0)), 0.0, 1e-13);

  StateVector bad = zero_state(6);
  bad.amps[0] = 1.0;
  EXPECT_THROW(apply_logical_cz(bad, {0, 1}, {1, 2}), std::invalid_argument);
}
