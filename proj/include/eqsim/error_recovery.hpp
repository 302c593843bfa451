#pragma once

// Fault injection and recovery for the encoded-gate circuits: enumerate
// single-Pauli fault points, build a syndrome-keyed correction table by
// search over a restricted correction group, and sweep faults end-to-end.
//
// The correction group is: one single-qubit Pauli per block, optionally
// composed with one logical controlled-phase between a pair of blocks. Table
// construction is payload-blind — a candidate is accepted only if it restores
// every trial payload — and aborts loudly when two faults share a syndrome
// but need different corrections.

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eqsim/circuit.hpp"
#include "eqsim/codes.hpp"
#include "eqsim/statevec.hpp"

namespace eqsim {

// A single-qubit Pauli inserted before the op at `position` (position ==
// ops.size() means after the last op).
struct PauliError {
  int qubit = 0;
  char kind = 'Z';
  int position = 0;
};

// "Z@C2@p3": kind, block-relative qubit label, op position.
inline std::string qubit_label(const BlockLayout& layout, int qubit) {
  for (const auto& [name, qubits] : layout.blocks)
    for (std::size_t i = 0; i < qubits.size(); ++i)
      if (qubits[i] == qubit) return name + std::to_string(i + 1);
  for (std::size_t a = 0; a < layout.ancillas.size(); ++a)
    if (layout.ancillas[a] == qubit) return "anc" + std::to_string(a);
  return "q" + std::to_string(qubit);
}

inline std::string fault_label(const BlockLayout& layout, const PauliError& f) {
  return std::string(1, f.kind) + "@" + qubit_label(layout, f.qubit) + "@p" +
         std::to_string(f.position);
}

inline void run_with_faults(const Circuit& circuit, StateVector& state,
                            const std::vector<PauliError>& faults) {
  const int n_ops = static_cast<int>(circuit.ops.size());
  for (const PauliError& f : faults)
    if (f.position < 0 || f.position > n_ops) throw std::out_of_range("fault position out of range");
  for (int p = 0; p <= n_ops; ++p) {
    for (const PauliError& f : faults)
      if (f.position == p) apply_pauli(state, PauliString::single(state.num_qubits, f.qubit, f.kind));
    if (p < n_ops) apply_op(state, circuit.ops[static_cast<std::size_t>(p)]);
  }
}

// Cross product kinds x qubits x positions, in that nesting order. Defaults:
// every data-block qubit (ancillas only on request — an unprotected bus does
// not promise recoverability) and every position 0..ops.size().
inline std::vector<PauliError> enumerate_fault_points(
    const Circuit& circuit, std::string_view kinds,
    const std::optional<std::vector<int>>& qubits = std::nullopt,
    const std::optional<std::vector<int>>& positions = std::nullopt) {
  std::vector<int> qs = qubits ? *qubits : circuit.layout.data_qubits();
  std::vector<int> ps;
  if (positions) {
    ps = *positions;
  } else {
    for (int p = 0; p <= static_cast<int>(circuit.ops.size()); ++p) ps.push_back(p);
  }
  std::vector<PauliError> faults;
  faults.reserve(kinds.size() * qs.size() * ps.size());
  for (char k : kinds)
    for (int q : qs)
      for (int p : ps) faults.push_back({q, k, p});
  return faults;
}

// ---------------------------------------------------------------------------
struct Correction {
  std::vector<std::pair<int, char>> paulis;     // (global qubit, kind)
  std::vector<std::pair<int, int>> cz_blocks;   // logical CZ between block indices

  bool is_identity() const { return paulis.empty() && cz_blocks.empty(); }

  std::string str(const BlockLayout& layout) const {
    if (is_identity()) return "I";
    std::string s;
    for (const auto& [q, k] : paulis) {
      if (!s.empty()) s += '+';
      s += k;
      s += '@';
      s += qubit_label(layout, q);
    }
    for (const auto& [a, b] : cz_blocks) {
      if (!s.empty()) s += '+';
      s += "CZL(" + layout.blocks[static_cast<std::size_t>(a)].first + "," +
           layout.blocks[static_cast<std::size_t>(b)].first + ")";
    }
    return s;
  }
};

inline void apply_correction(StateVector& state, const BlockLayout& layout, const Correction& c) {
  for (const auto& [q, k] : c.paulis)
    apply_pauli(state, PauliString::single(state.num_qubits, q, k));
  for (const auto& [a, b] : c.cz_blocks)
    apply_logical_cz(state, layout.blocks[static_cast<std::size_t>(a)].second,
                     layout.blocks[static_cast<std::size_t>(b)].second);
}

struct TableEntry {
  Correction correction;
  PauliError witness;           // first fault that produced this syndrome
  bool conditional_phase = false;  // correction includes a logical CZ
};

struct RecoveryTable {
  std::map<std::string, TableEntry> entries;  // per-block syndromes joined with '|'
};

// Measures every block's stabilizers (block order, code order). Projective;
// sub-seeded deterministically per block.
inline std::vector<std::string> measure_block_syndromes(const BlockLayout& layout,
                                                        const CodeSpec& code, StateVector& state,
                                                        std::uint64_t rng_seed) {
  std::vector<std::string> out;
  out.reserve(layout.blocks.size());
  for (std::size_t b = 0; b < layout.blocks.size(); ++b)
    out.push_back(syndrome_key(
        extract_syndrome_on(code, state, layout.blocks[b].second, Rng::derive(rng_seed, b))));
  return out;
}

inline std::string join_syndromes(const std::vector<std::string>& parts) {
  std::string key;
  for (std::size_t i = 0; i < parts.size(); ++i) key += (i ? "|" : "") + parts[i];
  return key;
}

namespace detail {

// Random normalized per-block payloads; 4 gaussians -> (alpha, beta).
inline std::vector<std::pair<cdouble, cdouble>> random_payloads(int num_blocks, Rng& rng) {
  std::vector<std::pair<cdouble, cdouble>> out;
  out.reserve(static_cast<std::size_t>(num_blocks));
  for (int b = 0; b < num_blocks; ++b) {
    cdouble alpha, beta;
    double n2 = 0.0;
    do {
      alpha = cdouble(rng.next_gauss(), rng.next_gauss());
      beta = cdouble(rng.next_gauss(), rng.next_gauss());
      n2 = std::norm(alpha) + std::norm(beta);
    } while (n2 < 1e-12);
    double s = 1.0 / std::sqrt(n2);
    out.emplace_back(alpha * s, beta * s);
  }
  return out;
}

// Per-block candidate singles, keyed by the syndrome they produce.
inline std::map<std::string, std::vector<std::pair<int, char>>> candidate_singles(
    const CodeSpec& code) {
  std::map<std::string, std::vector<std::pair<int, char>>> cand;
  for (char kind : {'X', 'Y', 'Z'})
    for (int pos = 0; pos < code.block_size; ++pos) {
      std::string corr(static_cast<std::size_t>(code.block_size), 'I');
      corr[static_cast<std::size_t>(pos)] = kind;
      cand[pauli_syndrome(code, PauliString::parse(corr))].emplace_back(pos, kind);
    }
  return cand;
}

}  // namespace detail

// Builds the syndrome -> correction table over the given fault points.
// `seed` fixes the trial payloads and all measurement sub-seeds, so the whole
// construction is reproducible byte-for-byte.
inline RecoveryTable build_recovery_table(const Circuit& circuit, const CodeSpec& code,
                                          const std::vector<PauliError>& faults,
                                          std::uint64_t seed, int num_payloads = 3) {
  const BlockLayout& layout = circuit.layout;
  const int nb = layout.num_blocks();
  const std::string trivial_block = code.trivial_syndrome();

  RecoveryTable table;
  {
    std::vector<std::string> clean(static_cast<std::size_t>(nb), trivial_block);
    table.entries.emplace(join_syndromes(clean), TableEntry{{}, {-1, 'I', -1}, false});
  }

  // Trial payloads and fault-free references, shared across all faults.
  std::vector<StateVector> inputs, refs;
  for (int p = 0; p < num_payloads; ++p) {
    Rng rng(Rng::derive(seed, 0x9a10ad + static_cast<std::uint64_t>(p)));
    inputs.push_back(encode_blocks(layout, code, detail::random_payloads(nb, rng)));
    StateVector ref = inputs.back();
    run_circuit(circuit, ref);
    refs.push_back(std::move(ref));
  }

  const auto cand = detail::candidate_singles(code);
  std::vector<std::pair<int, int>> cz_options;
  for (int a = 0; a < nb; ++a)
    for (int b = a + 1; b < nb; ++b) cz_options.emplace_back(a, b);

  auto restores = [&](const Correction& corr, const std::vector<StateVector>& errs) {
    for (int p = 0; p < num_payloads; ++p) {
      StateVector s = errs[static_cast<std::size_t>(p)];
      apply_correction(s, layout, corr);
      if (fidelity(s, refs[static_cast<std::size_t>(p)]) < 1.0 - kFidelityTol) return false;
    }
    return true;
  };

  for (std::size_t fi = 0; fi < faults.size(); ++fi) {
    const PauliError& f = faults[fi];
    std::vector<StateVector> errs;
    std::vector<std::string> block_syn;
    for (int p = 0; p < num_payloads; ++p) {
      StateVector s = inputs[static_cast<std::size_t>(p)];
      run_with_faults(circuit, s, {f});
      std::uint64_t mseed = Rng::derive(seed, 0xfa017 + fi * 64 + static_cast<std::uint64_t>(p));
      auto syn = measure_block_syndromes(layout, code, s, mseed);
      if (p == 0) {
        block_syn = syn;
      } else if (syn != block_syn) {
        throw std::runtime_error("recovery table: syndrome of fault " + fault_label(layout, f) +
                                 " depends on the payload (" + join_syndromes(block_syn) + " vs " +
                                 join_syndromes(syn) + ")");
      }
      errs.push_back(std::move(s));
    }
    std::string key = join_syndromes(block_syn);

    if (auto it = table.entries.find(key); it != table.entries.end()) {
      if (!restores(it->second.correction, errs)) {
        const PauliError& w = it->second.witness;
        std::string prev = (w.position < 0) ? "the fault-free run" : "fault " + fault_label(layout, w);
        throw std::runtime_error("recovery table: ambiguous syndrome " + key + " — " + prev +
                                 " fixed by '" + it->second.correction.str(layout) +
                                 "', which does not recover fault " + fault_label(layout, f));
      }
      continue;
    }

    // Candidate lists per block: identity only when the block's syndrome is
    // trivial, plus every single-qubit Pauli with a matching syndrome.
    using Single = std::optional<std::pair<int, char>>;
    std::vector<std::vector<Single>> lists;
    for (int b = 0; b < nb; ++b) {
      std::vector<Single> list;
      if (block_syn[static_cast<std::size_t>(b)] == trivial_block) list.push_back(std::nullopt);
      if (auto ci = cand.find(block_syn[static_cast<std::size_t>(b)]); ci != cand.end())
        for (const auto& pc : ci->second) list.emplace_back(pc);
      if (list.empty())
        throw std::runtime_error("recovery table: no single-qubit candidates for block syndrome " +
                                 block_syn[static_cast<std::size_t>(b)] + " (fault " +
                                 fault_label(layout, f) + ")");
      lists.push_back(std::move(list));
    }

    bool found = false;
    for (int phase = 0; phase <= static_cast<int>(cz_options.size()) && !found; ++phase) {
      std::vector<std::size_t> pick(static_cast<std::size_t>(nb), 0);
      while (!found) {
        Correction corr;
        for (int b = 0; b < nb; ++b) {
          const Single& s = lists[static_cast<std::size_t>(b)][pick[static_cast<std::size_t>(b)]];
          if (s) corr.paulis.emplace_back(layout.blocks[static_cast<std::size_t>(b)].second[static_cast<std::size_t>(s->first)],
                                          s->second);
        }
        if (phase > 0) corr.cz_blocks.push_back(cz_options[static_cast<std::size_t>(phase - 1)]);
        if (restores(corr, errs)) {
          table.entries.emplace(key, TableEntry{corr, f, phase > 0});
          found = true;
          break;
        }
        int b = nb - 1;
        while (b >= 0 && ++pick[static_cast<std::size_t>(b)] == lists[static_cast<std::size_t>(b)].size()) {
          pick[static_cast<std::size_t>(b)] = 0;
          --b;
        }
        if (b < 0) break;
      }
    }
    if (!found)
      throw std::runtime_error("recovery table: no correction in the search group recovers fault " +
                               fault_label(layout, f) + " (syndrome " + key + ")");
  }
  return table;
}

// ---------------------------------------------------------------------------
struct RecoveryOutcome {
  std::vector<std::string> block_syndromes;
  std::string key;
  bool in_table = false;
  Correction correction;
  double fidelity = 0.0;
  bool recovered = false;
};

// Measure all block syndromes, look up and apply the tabulated correction,
// and score the result against the fault-free reference.
inline RecoveryOutcome recover_joint(const Circuit& circuit, const CodeSpec& code,
                                     const RecoveryTable& table, StateVector& state,
                                     std::uint64_t rng_seed, const StateVector& reference) {
  RecoveryOutcome out;
  out.block_syndromes = measure_block_syndromes(circuit.layout, code, state, rng_seed);
  out.key = join_syndromes(out.block_syndromes);
  auto it = table.entries.find(out.key);
  if (it != table.entries.end()) {
    out.in_table = true;
    out.correction = it->second.correction;
    apply_correction(state, circuit.layout, out.correction);
  }
  out.fidelity = fidelity(state, reference);
  out.recovered = out.in_table && out.fidelity >= 1.0 - kFidelityTol;
  return out;
}

// ---------------------------------------------------------------------------
struct SweepRow {
  PauliError fault;
  std::string fault_name;
  std::string syndrome;
  std::string correction;
  double fidelity = 0.0;
  bool recovered = false;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  bool all_recovered = true;
};

// One fixed random payload, one row per fault point. The table is built over
// the same fault list first, so every row's lookup is well defined.
inline SweepReport run_sweep(const Circuit& circuit, const CodeSpec& code,
                             const std::vector<PauliError>& faults, std::uint64_t seed,
                             const RecoveryTable& table) {
  SweepReport report;
  Rng rng(Rng::derive(seed, 0x0a71));
  StateVector input =
      encode_blocks(circuit.layout, code, detail::random_payloads(circuit.layout.num_blocks(), rng));
  StateVector ref = input;
  run_circuit(circuit, ref);
  for (std::size_t fi = 0; fi < faults.size(); ++fi) {
    StateVector s = input;
    run_with_faults(circuit, s, {faults[fi]});
    RecoveryOutcome o =
        recover_joint(circuit, code, table, s, Rng::derive(seed, 0x2000 + fi), ref);
    SweepRow row;
    row.fault = faults[fi];
    row.fault_name = fault_label(circuit.layout, faults[fi]);
    row.syndrome = o.key;
    row.correction = o.in_table ? o.correction.str(circuit.layout) : "-";
    row.fidelity = o.fidelity;
    row.recovered = o.recovered;
    report.all_recovered = report.all_recovered && row.recovered;
    report.rows.push_back(std::move(row));
  }
  return report;
}

inline SweepReport run_sweep(const Circuit& circuit, const CodeSpec& code,
                             const std::vector<PauliError>& faults, std::uint64_t seed) {
  RecoveryTable table = build_recovery_table(circuit, code, faults, Rng::derive(seed, 0x7ab1e));
  return run_sweep(circuit, code, faults, seed, table);
}

namespace detail {
inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}
}  // namespace detail

inline std::string sweep_to_csv(const Circuit& circuit, const SweepReport& report) {
  std::ostringstream os;
  os.precision(12);
  os << "circuit,code,fault_kind,fault_qubit,fault_position,syndrome,correction,fidelity,recovered\n";
  for (const SweepRow& r : report.rows) {
    os << circuit.name << ',' << circuit.code_name << ',' << r.fault.kind << ','
       << qubit_label(circuit.layout, r.fault.qubit) << ',' << r.fault.position << ','
       << r.syndrome << ',' << detail::csv_escape(r.correction) << ',' << r.fidelity << ','
       << (r.recovered ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace eqsim
