"""Givens networks, window conversion, Toffoli ledger, end-to-end fidelity."""

import math

import numpy as np
import pytest

from fqlab.errors import (
    DecompositionFailure,
    OrderingViolation,
    ResidualPopulation,
    ValidationError,
)
from fqlab.states import slater_oracle
from fqlab.stateprep import (
    ConversionRegisters,
    GivensNetwork,
    GivensRotation,
    antisymmetrization_gate_estimate,
    counter_register_width,
    givens_decompose,
    prepare_slater,
    toffoli_count,
)

from conftest import random_orthonormal


class TestGivensDecompose:
    def test_reference_columns_give_empty_network(self):
        net = givens_decompose(np.eye(6)[:, :2])
        assert net.rotation_count() == 0

    def test_single_rotation_for_two_level_orbital(self):
        theta = 0.8
        coeffs = np.array([[math.cos(theta)], [math.sin(theta)]])
        net = givens_decompose(coeffs)
        assert net.rotation_count() == 1
        rot = net.layers[0][0]
        assert (rot.orbital_a, rot.orbital_b) == (0, 1)
        assert rot.theta == pytest.approx(theta)

    @pytest.mark.parametrize("n_orbitals,eta", [(6, 2), (8, 3), (5, 4), (4, 1)])
    def test_projector_reconstruction(self, n_orbitals, eta):
        coeffs = random_orthonormal(n_orbitals, eta, seed=n_orbitals * 10 + eta)
        net = givens_decompose(coeffs)
        u = net.single_particle_unitary()
        rebuilt = u[:, :eta]
        p_net = rebuilt @ rebuilt.conj().T
        p_ref = coeffs @ coeffs.conj().T
        assert np.linalg.norm(p_net - p_ref) < 1e-9

    def test_layer_window_locality_enforced(self):
        with pytest.raises(ValidationError):
            GivensNetwork(n_orbitals=6, eta=2,
                          layers=((GivensRotation(3, 4, 0.1, 0.0),),))

    def test_rejects_non_orthonormal(self):
        bad = np.ones((4, 2)) / 2.0
        with pytest.raises(ValidationError):
            givens_decompose(bad)


class TestConversion:
    def test_unoccupied_branch_untouched(self):
        regs = ConversionRegisters(n_orbitals=6, eta=2)
        # reference occupies orbitals 0 and 1; orbital 0 conversion moves
        # the one, after which slot 0 is empty for later orbitals
        before = regs.tensor.copy()
        regs.conversion_step(0, validate=True)
        assert regs.window_population(0) == pytest.approx(0.0, abs=1e-14)
        assert not np.array_equal(regs.tensor, before)

    def test_occupied_branch_writes_label_and_counter(self):
        regs = ConversionRegisters(n_orbitals=6, eta=2)
        regs.conversion_step(0, validate=True)
        regs.conversion_step(1, validate=True)
        # all occupancy consumed: counter = 2, registers hold (0, 1)
        idx = [0] * regs.window_slots + [2, 0, 1]
        assert abs(regs.tensor[tuple(idx)]) == pytest.approx(1.0)

    def test_hand_trace_ones_at_two_and_five(self):
        # drive the full pipeline for the determinant occupying {2, 5};
        # every intermediate is a basis branch, so the trace is exact
        coeffs = np.eye(8)[:, [2, 5]]
        net = givens_decompose(coeffs)
        regs = ConversionRegisters(n_orbitals=8, eta=2)
        for orbital in range(8):
            if orbital < 8 - 2:
                for rot in net.layers[orbital]:
                    regs.apply_window_rotation(rot)
            regs.conversion_step(orbital, validate=True)
            if orbital == 2:
                flat = np.abs(regs.tensor.reshape(-1))
                coords = np.unravel_index(int(np.argmax(flat)), regs.tensor.shape)
                assert coords[regs.window_slots] == 1      # counter
                assert coords[regs.window_slots + 1] == 2  # first register
        sorted_tensor = regs.finish()
        assert abs(sorted_tensor[2, 5]) == pytest.approx(1.0)
        assert regs.ledger.total == toffoli_count(8, 2, "improved")

    def test_norm_preserved_through_conversion(self):
        coeffs = random_orthonormal(6, 2, seed=3)
        net = givens_decompose(coeffs)
        regs = ConversionRegisters(n_orbitals=6, eta=2)
        for orbital in range(6):
            if orbital < 4:
                for rot in net.layers[orbital]:
                    regs.apply_window_rotation(rot)
            regs.conversion_step(orbital)
            assert np.linalg.norm(regs.tensor) == pytest.approx(1.0, abs=1e-12)

    def test_out_of_order_conversion_rejected(self):
        regs = ConversionRegisters(n_orbitals=6, eta=2)
        with pytest.raises(ValidationError):
            regs.conversion_step(1)

    def test_ordering_violation_detected(self):
        regs = ConversionRegisters(n_orbitals=6, eta=2)
        # craft an invalid branch: counter 0 but register 1 already written
        regs.tensor[:] = 0
        idx = [0] * regs.window_slots + [0, 3, 0]
        idx[0] = 1  # orbital-0 window slot occupied
        regs.tensor[tuple(idx)] = 1.0
        with pytest.raises(OrderingViolation):
            regs.conversion_step(0, validate=True)

    def test_residual_population_detected(self):
        regs = ConversionRegisters(n_orbitals=6, eta=2)
        for orbital in range(6):
            regs.conversion_step(orbital)
        # resurrect window population behind the conversion's back
        idx = [0] * regs.window_slots + [2, 0, 1]
        good = regs.tensor[tuple(idx)]
        bad_idx = list(idx)
        bad_idx[1] = 1
        regs.tensor[tuple(idx)] = 0
        regs.tensor[tuple(bad_idx)] = good
        with pytest.raises(ResidualPopulation):
            regs.finish()


class TestPrepareSlater:
    def test_reference_determinant(self):
        result = prepare_slater(np.eye(4)[:, :2])
        root2 = 1 / math.sqrt(2)
        assert result.state.tensor[0, 1] == pytest.approx(root2)
        assert result.state.tensor[1, 0] == pytest.approx(-root2)

    def test_single_particle(self, rng):
        phi = rng.normal(size=4) + 1j * rng.normal(size=4)
        phi /= np.linalg.norm(phi)
        result = prepare_slater(phi[:, None])
        oracle = slater_oracle([phi], n_orbitals=4)
        assert abs(result.state.overlap(oracle)) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("n_orbitals,eta", [(8, 2), (6, 3), (4, 3)])
    def test_matches_oracle(self, n_orbitals, eta):
        coeffs = random_orthonormal(n_orbitals, eta, seed=7 * n_orbitals + eta)
        result = prepare_slater(coeffs, validate=True)
        oracle = slater_oracle(coeffs, n_orbitals=n_orbitals)
        assert abs(result.state.overlap(oracle)) == pytest.approx(1.0, abs=1e-9)
        assert result.state.is_antisymmetric(tol=1e-10)

    def test_occupied_space_gauge_invariance(self, rng):
        coeffs = random_orthonormal(6, 2, seed=31)
        mixer = np.linalg.qr(rng.normal(size=(2, 2))
                             + 1j * rng.normal(size=(2, 2)))[0]
        a = prepare_slater(coeffs)
        b = prepare_slater(coeffs @ mixer)
        assert abs(a.state.overlap(b.state)) == pytest.approx(1.0, abs=1e-9)

    def test_ledger_matches_closed_form(self):
        for n_orbitals, eta in [(4, 2), (8, 2), (8, 3), (6, 5)]:
            coeffs = random_orthonormal(n_orbitals, eta, seed=eta)
            result = prepare_slater(coeffs)
            assert result.ledger.total == toffoli_count(n_orbitals, eta, "improved")
            assert result.ledger.total == sum(result.ledger.counts.values())


class TestToffoliCounts:
    def test_improved_known_value(self):
        assert toffoli_count(8, 2, "improved") == 48

    def test_basic_known_value(self):
        assert toffoli_count(8, 2, "basic") == 72

    def test_improved_never_worse_up_to_1024(self):
        for n_orbitals in range(3, 1025):
            for eta in range(1, n_orbitals - 1):
                assert (toffoli_count(n_orbitals, eta, "improved")
                        <= toffoli_count(n_orbitals, eta, "basic"))

    def test_counter_width(self):
        assert counter_register_width(1) == 1
        assert counter_register_width(3) == 2
        assert counter_register_width(4) == 3

    def test_antisymmetrization_estimate_scale(self):
        assert antisymmetrization_gate_estimate(16, 1) == 0
        assert antisymmetrization_gate_estimate(16, 4) == 4 * 2 * 4

    def test_bad_variant(self):
        with pytest.raises(ValidationError):
            toffoli_count(8, 2, "fancy")
