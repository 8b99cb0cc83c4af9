import math

import numpy as np
import pytest

from grovertrain import amplify as am
from grovertrain import boolcirc as bc
from grovertrain import datasets as ds
from grovertrain import statevec as sv


def basis_state(n_qubits, index):
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return sv.QuantumState(n_qubits, amps)


def decode_task():
    """Small two-output model plus dataset scored by digit decoding."""
    g = [bc.Gate("XOR", "o0", ("w0", "x0")),
         bc.Gate("AND", "o1", ("w1", "x1"))]
    model = bc.ModelCircuit(2, 2, g, ("o0", "o1"))
    samples = [ds.Sample((0, 0), (1, 0)),
               ds.Sample((1, 0), (1, 1)),
               ds.Sample((0, 1), (0, 1)),
               ds.Sample((1, 1), (0, 0))]
    data = ds.Dataset(samples, 2, 2, 3, predicate="tiny-mnist-decode")
    return model, data


class TestQuantumState:
    def test_qubit_cap(self):
        with pytest.raises(ValueError):
            sv.QuantumState(0)
        with pytest.raises(ValueError):
            sv.QuantumState(sv.MAX_QUBITS + 1)

    def test_initial_state_and_amp_validation(self):
        s = sv.QuantumState(3)
        assert s.amps[0] == 1.0 and np.count_nonzero(s.amps) == 1
        with pytest.raises(ValueError):
            sv.QuantumState(2, np.ones(3, dtype=np.complex128))

    def test_gates_act_like_classical_bit_flips(self):
        gates = [bc.RGate((), 2), bc.RGate((0,), 1), bc.RGate((0, 2), 3),
                 bc.RGate((1, 2, 3), 0)]
        for start in range(16):
            s = basis_state(4, start)
            bits = [(start >> q) & 1 for q in range(4)]
            for g in gates:
                s.apply_rgate(g)
                if all(bits[c] for c in g.controls):
                    bits[g.target] ^= 1
            want = sum(b << q for q, b in enumerate(bits))
            assert s.amps[want] == 1.0
            assert np.count_nonzero(s.amps) == 1

    def test_phase_flip_targets_exactly_matching_states(self):
        amps = np.full(8, 1 / math.sqrt(8), dtype=np.complex128)
        s = sv.QuantumState(3, amps.copy())
        s.apply_phase_flip((0, 2))
        for i in range(8):
            flipped = (i & 1) and (i >> 2) & 1
            assert s.amps[i] == (-amps[i] if flipped else amps[i])

    def test_marginal_orders_bits_low_first(self):
        s = basis_state(3, 0b010)
        assert np.array_equal(s.marginal([1]), [0.0, 1.0])
        assert np.array_equal(s.marginal([0, 1]), [0.0, 0.0, 1.0, 0.0])
        assert np.array_equal(s.marginal([1, 0]), [0.0, 1.0, 0.0, 0.0])

    def test_weight_marginal_matches_generic_marginal(self):
        rng = np.random.default_rng(0)
        amps = rng.normal(size=32) + 1j * rng.normal(size=32)
        amps /= np.linalg.norm(amps)
        s = sv.QuantumState(5, amps)
        assert np.allclose(s.weight_marginal(2), s.marginal([0, 1]),
                           atol=1e-15)

    def test_measurement_is_deterministic_on_basis_states(self):
        s = basis_state(3, 0b101)
        assert s.measure_register([0, 1, 2], np.random.default_rng(0)) == 5
        assert s.measure_register([2], np.random.default_rng(1)) == 1

    def test_gates_preserve_norm(self):
        rng = np.random.default_rng(1)
        amps = rng.normal(size=16) + 1j * rng.normal(size=16)
        amps /= np.linalg.norm(amps)
        s = sv.QuantumState(4, amps)
        s.apply_gates([bc.RGate((0,), 3), bc.RGate((1, 2), 0),
                       bc.RGate((), 2)])
        assert abs(s.norm() - 1.0) < 1e-12


class TestHandRolledSearch:
    def test_three_qubit_two_round_success_probability(self):
        # the textbook 8-state search: two rounds lift the marked state to
        # exactly 121/128
        n = 3
        marked = 5
        amps = np.full(8, 1 / math.sqrt(8), dtype=np.complex128)
        state = sv.QuantumState(n, amps.copy())
        psi0 = state.amps.copy()
        for _ in range(2):
            state.amps[marked] *= -1.0
            sv.apply_diffusion(state, psi0)
        p = np.abs(state.amps) ** 2
        assert p[marked] == pytest.approx(121 / 128, abs=1e-12)


class TestLayoutAndPreparation:
    def test_layout_geometry(self, toy_bundle):
        model = toy_bundle.model
        lay = sv.build_layout(model, k=2, n_aux=1, n_anc=2)
        assert lay.weight == (0,)
        c0, c1 = lay.copies
        assert c0.x == (1,) and c0.y == (2,) and c0.flag == 3
        assert c1.x == (4,) and c1.y == (5,) and c1.flag == 6
        assert c0.out == (7,) and c1.out == (8,)
        assert lay.anc == (9, 10)
        assert lay.n_qubits == 11

    def test_layout_without_padding_has_no_flag(self, toy_bundle):
        lay = sv.build_layout(toy_bundle.model, k=1, n_aux=0, n_anc=1)
        assert lay.copies[0].flag is None
        assert lay.n_qubits == 1 + 1 + 1 + 1 + 1

    def test_prepared_state_writes_predictions(self, toy_bundle):
        model, d = toy_bundle.model, toy_bundle.full
        state, lay = sv.prepare_initial(model, d, k=1)
        expected = np.zeros(1 << lay.n_qubits, dtype=np.complex128)
        for wi in (0, 1):
            w = bc.index_to_bits(wi, 1)
            for s in d.samples:
                yhat = bc.eval_circuit(model, w, s.x)
                idx = wi
                idx |= bc.bits_to_index(s.x) << lay.copies[0].x[0]
                idx |= bc.bits_to_index(s.y) << lay.copies[0].y[0]
                idx |= bc.bits_to_index(yhat) << lay.copies[0].out[0]
                expected[idx] = 0.5
        assert np.allclose(state.amps, expected, atol=1e-12)

    def test_prepared_state_with_padding(self, toy_bundle):
        model, d = toy_bundle.model, toy_bundle.full
        state, lay = sv.prepare_initial(model, d, k=1, n_aux=2)
        copy = lay.copies[0]
        amp = (1 / math.sqrt(2)) * (1 / math.sqrt(4))
        # padded basis states keep flag=0; the model still writes its
        # prediction for whatever x bits the pad happens to carry
        for wi in (0, 1):
            for p in (0, 1):
                x_bits = (p,)  # data-register bit 0 is the x wire
                yhat = bc.eval_circuit(model, (wi,), x_bits)
                idx = wi | (p << copy.x[0])
                idx |= bc.bits_to_index(yhat) << copy.out[0]
                assert state.amps[idx] == pytest.approx(amp, abs=1e-12)
        # real samples carry the flag
        s0 = d.samples[0]
        idx = 0
        idx |= bc.bits_to_index(s0.x) << copy.x[0]
        idx |= bc.bits_to_index(s0.y) << copy.y[0]
        idx |= 1 << copy.flag
        yhat = bc.eval_circuit(model, (0,), s0.x)
        idx |= bc.bits_to_index(yhat) << copy.out[0]
        assert state.amps[idx] == pytest.approx(amp, abs=1e-12)
        assert abs(state.norm() - 1.0) < 1e-12

    def test_preparation_validation(self, toy_bundle):
        model, d = toy_bundle.model, toy_bundle.full
        with pytest.raises(ValueError):
            sv.prepare_initial(model, d, k=0)
        one = ds.Dataset([d.samples[0]], d.d_x, d.d_y, d.class_count)
        with pytest.raises(ValueError):
            sv.prepare_initial(model, one, k=1, n_aux=0)
        with pytest.raises(ValueError):
            sv.prepare_initial(model, d, k=1, n_aux=5)  # 4 basis states only

    def test_qubit_budget_enforced(self):
        model = bc.tiny_mnist_model()
        d = ds.Dataset([ds.Sample((0,) * 9, (0, 0)),
                        ds.Sample((1,) * 9, (0, 1))], 9, 2, 3)
        with pytest.raises(ValueError):
            sv.prepare_initial(model, d, k=1)

    def test_min_anc_grows_pool(self, toy_bundle):
        model, d = toy_bundle.model, toy_bundle.full
        _, lay0 = sv.prepare_initial(model, d, k=1)
        _, lay3 = sv.prepare_initial(model, d, k=1, min_anc=3)
        assert len(lay3.anc) == max(len(lay0.anc), 3)


class TestOracles:
    def test_exact_match_phase_pattern(self, toy_bundle):
        model, d = toy_bundle.model, toy_bundle.full
        state, lay = sv.prepare_initial(model, d, k=1)
        before = state.amps.copy()
        sv.apply_oracle(state, lay, "exact-match")
        copy = lay.copies[0]
        for idx in np.flatnonzero(np.abs(before) > 1e-14):
            y = (idx >> copy.y[0]) & 1
            out = (idx >> copy.out[0]) & 1
            sign = -1.0 if y == out else 1.0
            assert state.amps[idx] == pytest.approx(sign * before[idx],
                                                    abs=1e-14)

    def test_padded_states_never_flip(self, toy_bundle):
        model, d = toy_bundle.model, toy_bundle.full
        state, lay = sv.prepare_initial(model, d, k=1, n_aux=2)
        before = state.amps.copy()
        sv.apply_oracle(state, lay, "exact-match")
        flag = lay.copies[0].flag
        for idx in np.flatnonzero(np.abs(before) > 1e-14):
            if not (idx >> flag) & 1:
                assert state.amps[idx] == before[idx]

    def test_oracle_applied_twice_is_identity(self, toy_bundle):
        model, d = toy_bundle.model, toy_bundle.full
        state, lay = sv.prepare_initial(model, d, k=2, n_aux=1)
        before = state.amps.copy()
        sv.apply_oracle(state, lay, "exact-match")
        sv.apply_oracle(state, lay, "exact-match")
        assert np.allclose(state.amps, before, atol=1e-13)

    def test_decode_phase_pattern(self):
        model, d = decode_task()
        state, lay = sv.prepare_initial(model, d, k=1, min_anc=1)
        before = state.amps.copy()
        sv.apply_oracle(state, lay, "tiny-mnist-decode")
        copy = lay.copies[0]
        for idx in np.flatnonzero(np.abs(before) > 1e-14):
            y = tuple((idx >> q) & 1 for q in copy.y)
            out = tuple((idx >> q) & 1 for q in copy.out)
            sign = -1.0 if ds.is_correct("tiny-mnist-decode", y, out) else 1.0
            assert state.amps[idx] == pytest.approx(sign * before[idx],
                                                    abs=1e-14)

    def test_decode_needs_ancillas(self):
        model, d = decode_task()
        state, lay = sv.prepare_initial(model, d, k=1)
        lay_no_anc = sv.SystemLayout(lay.weight, lay.copies, (),
                                     lay.n_qubits)
        with pytest.raises(ValueError):
            sv.apply_oracle(state, lay_no_anc, "tiny-mnist-decode")

    def test_unknown_predicate_rejected(self, toy_bundle):
        model, d = toy_bundle.model, toy_bundle.full
        state, lay = sv.prepare_initial(model, d, k=1)
        with pytest.raises(ValueError):
            sv.apply_oracle(state, lay, "fuzzy")


class TestDiffusionAndFullRuns:
    def test_diffusion_is_an_involution(self):
        rng = np.random.default_rng(4)
        psi0 = rng.normal(size=16) + 1j * rng.normal(size=16)
        psi0 /= np.linalg.norm(psi0)
        amps = rng.normal(size=16) + 1j * rng.normal(size=16)
        amps /= np.linalg.norm(amps)
        s = sv.QuantumState(4, amps.copy())
        sv.apply_diffusion(s, psi0)
        assert abs(s.norm() - 1.0) < 1e-12
        sv.apply_diffusion(s, psi0)
        assert np.allclose(s.amps, amps, atol=1e-12)

    def test_zero_rounds_keep_weights_uniform(self, toy_bundle):
        model, d = toy_bundle.model, toy_bundle.full
        marg = sv.grover_run(model, d, k=1, g=0)
        assert np.allclose(marg, 0.5, atol=1e-12)
        with pytest.raises(ValueError):
            sv.grover_run(model, d, k=1, g=-1)

    def test_matches_closed_form_toy_single_copy(self, toy_bundle, toy_table):
        model, d = toy_bundle.model, toy_bundle.full
        plan = am.make_plan(toy_table, 1)
        dist = am.evolve_distribution(toy_table, plan)
        marg = sv.grover_run(model, d, k=1, g=plan.g, n_aux=plan.n_aux)
        assert float(np.max(np.abs(marg - dist.p))) <= 1e-9

    def test_matches_closed_form_toy_two_copies(self, toy_bundle, toy_table):
        model, d = toy_bundle.model, toy_bundle.full
        plan = am.make_plan(toy_table, 2)
        assert plan.n_aux == 1 and plan.g == 1
        dist = am.evolve_distribution(toy_table, plan)
        marg = sv.grover_run(model, d, k=2, g=plan.g, n_aux=plan.n_aux)
        assert float(np.max(np.abs(marg - dist.p))) <= 1e-9

    def test_matches_closed_form_line_task(self, sed_bundle, sed_train_table):
        plan = am.make_plan(sed_train_table, 1)
        assert plan.n_aux == 400 and plan.residual == 1.0
        dist = am.evolve_distribution(sed_train_table, plan)
        marg = sv.grover_run(sed_bundle.model, sed_bundle.train, k=1,
                             g=plan.g, n_aux=plan.n_aux)
        assert float(np.max(np.abs(marg - dist.p))) <= 1e-9

    def test_matches_closed_form_decode_predicate(self):
        model, d = decode_task()
        table = am.accuracy_table(model, d)
        for k in (1, 2):
            plan = am.make_plan(table, k)
            dist = am.evolve_distribution(table, plan)
            marg = sv.grover_run(model, d, k=k, g=plan.g, n_aux=plan.n_aux)
            assert float(np.max(np.abs(marg - dist.p))) <= 1e-9

    def test_norm_survives_a_full_run(self, toy_bundle):
        model, d = toy_bundle.model, toy_bundle.full
        _, state, _ = sv.grover_run(model, d, k=2, g=3, n_aux=1,
                                    return_state=True)
        assert abs(state.norm() - 1.0) < 1e-10

    def test_lossless_run_measures_the_best_weight(self, toy_bundle,
                                                   toy_table):
        model, d = toy_bundle.model, toy_bundle.full
        plan = am.make_plan(toy_table, 1)
        marg, state, lay = sv.grover_run(model, d, k=1, g=plan.g,
                                         n_aux=plan.n_aux, return_state=True)
        assert marg[0] == pytest.approx(1.0, abs=1e-12)
        for seed in range(3):
            rng = np.random.default_rng(seed)
            assert state.measure_register(lay.weight, rng) == 0


class TestCsv:
    def test_statevector_layout(self):
        s = basis_state(1, 1)
        s.amps[0] = 0.5j
        assert sv.statevector_csv(s) == ("basis_index,re,im\n"
                                         "0,0,0.5\n"
                                         "1,1,0\n")
