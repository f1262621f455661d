import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fuzzcorpus import malformed_corpus, valid_documents
from pathwalk.gates import build_draper_adder, cphase, hadamard, inverse, random_circuit, random_unitary
from pathwalk.pathsim import InitialCondition, sample
from pathwalk.qcio import (
    CircuitParseError,
    RunResult,
    format_result,
    load_circuit,
    parse_circuit,
    parse_complex,
    serialize_circuit,
)
from pathwalk.qcore import BasisState, Circuit, GateApplication, GateMatrix

CNOT_DEF = """qubits 2
defgate MYCNOT 2
1 0 0 0
0 1 0 0
0 0 0 1
0 0 1 0
endgate
gate MYCNOT 0 1
"""


class TestParse:
    def test_single_h(self):
        doc = parse_circuit("qubits 1\ngate H 0")
        assert doc.circuit.width == 1 and len(doc.circuit) == 1
        assert doc.circuit.gates[0].gate.allclose(hadamard())
        assert doc.input is None

    def test_cphase(self):
        app = parse_circuit("qubits 2\ngate CPHASE(1) 1 0").circuit.gates[0]
        assert app.operands == (1, 0)
        np.testing.assert_allclose(app.gate.matrix, np.diag([1, 1, 1, 1j]))

    def test_draper_file(self, circuits_dir):
        doc = load_circuit(circuits_dir / "draper2.qc")
        assert doc.input == BasisState.from_bitstring("0101")
        assert doc.circuit.equivalent(build_draper_adder(2))
        hist = sample(doc.circuit, InitialCondition.single(doc.input), 200, 1)
        assert dict(hist) == {BasisState.from_bitstring("0110"): 200}

    def test_defgate(self):
        doc = parse_circuit(CNOT_DEF)
        assert "MYCNOT" in doc.gates
        assert doc.circuit.gates[0].gate.is_trivial

    def test_case_insensitive_and_comments(self):
        doc = parse_circuit("# hi\nQUBITS 2 # two\n\nInput 10\nGate cnot 0 1\nGATE h 1\n")
        assert doc.input.bits == 0b10 and len(doc.circuit) == 2

    def test_complex_literals(self):
        assert parse_complex("0.5+0.5j") == 0.5 + 0.5j
        assert parse_complex("-1e-3-2j") == -1e-3 - 2j
        assert parse_complex("1") == 1
        assert parse_complex("-1j") == -1j
        for bad in ("nan", "inf", "1+", "(1+1j)", "j1", "1e400"):
            with pytest.raises(ValueError):
                parse_complex(bad)

    @pytest.mark.parametrize(
        "text,line,fragment",
        [
            ("gate H 0", 1, "first directive"),
            ("", 1, "missing 'qubits'"),
            ("qubits 2\nqubits 2", 2, "duplicate"),
            ("qubits 2\ninput 010", 2, "3 bits"),
            ("qubits 2\ngate FOO 0", 2, "unknown gate"),
            ("qubits 2\ngate CNOT 0", 2, "operand"),
            ("qubits 2\ngate CNOT 1 1", 2, "repeated"),
            ("qubits 2\ngate H 2", 2, "out of range"),
            ("qubits 2\ngate CPHASE 0 1", 2, "parameter"),
            ("qubits 2\ngate H(1) 0", 2, "no parameter"),
            ("qubits 1\ndefgate B 1\n1 1\n0 1\nendgate", 2, "not unitary"),
            ("qubits 1\ndefgate B 1\n1 0\nendgate", 2, "needs 2 rows"),
            ("qubits 1\ndefgate B 1\n1 0\n0 1", 2, "not closed"),
            ("qubits 1\ndefgate B 1\n1 0 0\n0 1\nendgate", 3, "expected 2 entries"),
            ("qubits 1\ndefgate H 1\n1 0\n0 1\nendgate", 2, "shadows"),
            ("qubits 1\nendgate", 2, "without"),
            ("qubits 1\nfrobnicate", 2, "unknown directive"),
            ("qubits 0", 1, "qubit count"),
            ("qubits 99999999999999999999999", 1, "too large"),
        ],
    )
    def test_diagnostics(self, text, line, fragment):
        with pytest.raises(CircuitParseError) as info:
            parse_circuit(text)
        assert info.value.line == line
        assert fragment in str(info.value)

    def test_fuzz_corpus_sample(self):
        for text in malformed_corpus(1500, seed=99):
            try:
                parse_circuit(text)
            except CircuitParseError as exc:
                assert exc.line >= 1

    @given(st.text(max_size=200))
    @settings(max_examples=300)
    def test_total_on_arbitrary_text(self, text):
        try:
            parse_circuit(text)
        except CircuitParseError:
            pass

    @given(st.lists(st.sampled_from(["qubits 3", "gate H 0", "gate CNOT 2 1", "gate CPHASE(2) 0 2",
                                     "input 011", "defgate A 1", "0 1", "1 0", "endgate", "gate A 1",
                                     "gate CCNOT 0 1 2", "# x", ""]), max_size=15))
    def test_total_on_shuffled_directives(self, lines):
        try:
            parse_circuit("\n".join(lines))
        except CircuitParseError:
            pass


class TestSerialize:
    def test_empty(self):
        assert serialize_circuit(Circuit(3)).strip() == "qubits 3"

    def test_draper_line_counts(self):
        text = serialize_circuit(build_draper_adder(2))
        lines = text.strip().splitlines()
        assert lines[0] == "qubits 4"
        assert sum(line.startswith("gate ") for line in lines) == 9
        assert sum(line.startswith("defgate ") for line in lines) == 1

    def test_round_trip_random(self, rng):
        for _ in range(30):
            c = random_circuit(rng)
            back = parse_circuit(serialize_circuit(c)).circuit
            assert back.equivalent(c)

    @pytest.mark.parametrize("doc", valid_documents(seed=5, n_random=10))
    def test_idempotent(self, doc):
        first = parse_circuit(doc)
        text = serialize_circuit(first.circuit, first.input)
        second = parse_circuit(text)
        assert second.circuit.equivalent(first.circuit)
        assert second.input == first.input
        assert serialize_circuit(second.circuit, second.input) == text

    def test_anonymous_rejected(self):
        g = GateMatrix("", random_unitary(1, np.random.default_rng(0)).matrix)
        with pytest.raises(ValueError):
            serialize_circuit(Circuit(1, (GateApplication(g, (0,)),)))

    def test_name_collisions_get_distinct_defgates(self, rng):
        a = random_unitary(1, rng, name="U")
        b = random_unitary(1, rng, name="U")
        c = Circuit(1, (GateApplication(a, (0,)), GateApplication(b, (0,)), GateApplication(a, (0,))))
        text = serialize_circuit(c)
        assert text.count("defgate") == 2
        assert parse_circuit(text).circuit.equivalent(c)

    def test_builtin_name_with_other_matrix_becomes_defgate(self):
        fake = GateMatrix("H", np.diag([1, 1j]))
        text = serialize_circuit(Circuit(1, (GateApplication(fake, (0,)),)))
        assert "defgate" in text
        assert parse_circuit(text).circuit.equivalent(Circuit(1, (GateApplication(fake, (0,)),)))

    def test_inverse_gate_round_trip(self):
        c = Circuit(2, (GateApplication(inverse(cphase(3)), (0, 1)),))
        assert parse_circuit(serialize_circuit(c)).circuit.equivalent(c)


class TestFormatResult:
    def test_text(self):
        r = RunResult("path", 1000, 7, {"0110": 1000})
        rows = format_result(r, "text").splitlines()
        assert rows[-1].split() == ["0110", "1000", "1.000000"]

    def test_text_ordering(self):
        r = RunResult("path", 10, 1, {"01": 3, "00": 3, "11": 4})
        rows = [line.split()[0] for line in format_result(r).splitlines() if not line.startswith("#")]
        assert rows == ["state", "11", "00", "01"]

    def test_json(self):
        r = RunResult("dense", 4, 2, {"1": 1, "0": 3}, {"calc_amp_calls": 0}, 1.5)
        obj = json.loads(format_result(r, "json"))
        assert set(obj) == {"engine", "shots", "seed", "histogram", "metrics", "elapsed_ms"}
        assert obj["histogram"] == {"0": 3, "1": 1}

    def test_requires_shots(self):
        with pytest.raises(ValueError):
            RunResult("path", 0, 1, {})
        with pytest.raises(ValueError):
            RunResult("path", 3, 1, {"0": 2})
