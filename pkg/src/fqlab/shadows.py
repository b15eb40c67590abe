"""Per-register Clifford classical shadows for k-RDM estimation.

Protocol: draw one uniform Clifford per particle register, apply the
tensor product, measure all registers jointly, and invert the single-
register measurement channel M(A) = (A + tr[A] I)/(2^n + 1) offline.
Estimates use a restricted register-index sum (one register per block)
with a median-of-means over sample groups.

The log in the sample-count formula is the natural log; the estimator
configuration records that convention explicitly.
"""

from dataclasses import dataclass
from itertools import product
import math

import numpy as np

from .cliffords import CliffordElement, clifford_table, sample_clifford
from .errors import (
    AssumptionViolated,
    EnumerationUnavailable,
    IndexOutOfRange,
    InsufficientSamples,
    ValidationError,
)
from .rng import derive_rng
from .states import FirstQuantizedState

LOG_CONVENTION = "natural"
_CHUNK = 4096


@dataclass(frozen=True)
class ShadowSample:
    """Clifford choices and measured labels, one entry per register."""

    cliffords: tuple          # eta CliffordElement
    outcomes: tuple           # eta ints in [0, 2**n)

    def __post_init__(self):
        if len(self.cliffords) != len(self.outcomes):
            raise ValidationError("clifford/outcome length mismatch")

    @property
    def eta(self) -> int:
        return len(self.cliffords)


@dataclass(frozen=True)
class RestrictedIndexSet:
    """k-tuples drawing one register from each consecutive block.

    Only eta_used = k * floor(eta / k) registers participate; each block
    has eta_used / k of them.
    """

    eta: int
    k: int

    def __post_init__(self):
        if self.k < 1 or self.k > self.eta:
            raise ValidationError("need 1 <= k <= eta")

    @property
    def eta_used(self) -> int:
        return self.k * (self.eta // self.k)

    @property
    def block_size(self) -> int:
        return self.eta_used // self.k

    def tuples(self):
        """All index tuples (1-based registers), (block_size)**k of them."""
        blocks = [range(b * self.block_size + 1, (b + 1) * self.block_size + 1)
                  for b in range(self.k)]
        return list(product(*blocks))


def required_samples(n_orbitals: int, k: int, eta: int, epsilon: float,
                     delta: float) -> int:
    """Measurement count 64 e^3 ln(N/delta) k (2k+2e)^k eta^k / eps^2."""
    if min(n_orbitals, k, eta) < 1 or epsilon <= 0 or not 0 < delta < 1:
        raise ValidationError("arguments must be positive with 0 < delta < 1")
    if epsilon > 1:
        raise ValidationError("epsilon must be <= 1")
    value = (64.0 * math.e ** 3 * math.log(n_orbitals / delta) * k
             * (2 * k + 2 * math.e) ** k * eta ** k / epsilon ** 2)
    return math.ceil(value)


def variance_bound(k: int, eta: int) -> float:
    """Single-shot variance bound e^3 eta^k (2k+2e)^k, valid for eta >= 2k."""
    if eta < 2 * k:
        raise AssumptionViolated(f"bound requires eta >= 2k, got eta={eta}, k={k}")
    return math.e ** 3 * eta ** k * (2 * k + 2 * math.e) ** k


@dataclass(frozen=True)
class EstimatorConfig:
    """Median-of-means configuration: K groups of b samples each."""

    k: int
    epsilon: float
    delta: float
    groups: int
    group_size: int
    log_convention: str = LOG_CONVENTION

    @staticmethod
    def auto(k: int, epsilon: float, delta: float, eta: int) -> "EstimatorConfig":
        """K = ceil(8 ln(1/delta)), b = ceil(4 VarBound / eps^2)."""
        groups = math.ceil(8 * math.log(1 / delta))
        group_size = math.ceil(4 * variance_bound(k, eta) / epsilon ** 2)
        return EstimatorConfig(k, epsilon, delta, groups, group_size)

    @staticmethod
    def from_sample_count(k: int, epsilon: float, delta: float,
                          m: int) -> "EstimatorConfig":
        """Fit b to an available sample count; the remainder is dropped."""
        groups = math.ceil(8 * math.log(1 / delta))
        group_size = m // groups
        if group_size < 1:
            raise InsufficientSamples(f"{m} samples cannot fill {groups} groups")
        return EstimatorConfig(k, epsilon, delta, groups, group_size)


def _collect_chunk(state, count, rng):
    n = state.qubits_per_register
    samples = []
    for _ in range(count):
        cliffords = tuple(sample_clifford(n, rng) for _ in range(state.eta))
        tensor = state.tensor
        for j, c in enumerate(cliffords):
            tensor = np.moveaxis(
                np.tensordot(c.unitary, tensor, axes=([1], [j])), 0, j)
        probs = np.abs(tensor.reshape(-1)) ** 2
        probs /= probs.sum()
        flat = rng.choice(probs.size, p=probs)
        outcome = tuple(int(v) for v in np.unravel_index(flat, tensor.shape))
        samples.append(ShadowSample(cliffords=cliffords, outcomes=outcome))
    return samples


def collect_shadows(state: FirstQuantizedState, m: int, seed: int,
                    threads: int = 1) -> list:
    """Collect m shadow samples.

    Samples are generated in fixed-size chunks, chunk c on the rng stream
    (seed, "shadows", c), and concatenated in chunk order, so the result
    is identical for any thread count.
    """
    if m < 0:
        raise ValidationError("sample count must be nonnegative")
    chunks = [(c, min(_CHUNK, m - c * _CHUNK))
              for c in range((m + _CHUNK - 1) // _CHUNK)]
    if threads > 1 and len(chunks) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda cc: _collect_chunk(state, cc[1], derive_rng(seed, "shadows", cc[0])),
                chunks))
    else:
        parts = [_collect_chunk(state, count, derive_rng(seed, "shadows", c))
                 for c, count in chunks]
    out = []
    for p in parts:
        out.extend(p)
    return out


def samples_from_keys(rows) -> list:
    """Rebuild ShadowSamples from (clifford-key strings, outcome ints) rows.

    Inverse of the CSV dump: each row is a pair (iterable of keys,
    iterable of outcomes). Clifford unitaries are reconstructed from
    their keys, caching repeats.
    """
    from .cliffords import clifford_from_key
    cache = {}
    out = []
    for keys, outcomes in rows:
        cliffords = []
        for key in keys:
            if key not in cache:
                cache[key] = clifford_from_key(key)
            cliffords.append(cache[key])
        out.append(ShadowSample(cliffords=tuple(cliffords),
                                outcomes=tuple(int(b) for b in outcomes)))
    return out


def snapshot_term_estimate(sample: ShadowSample, registers, bra_labels,
                           ket_labels) -> complex:
    """Factorized tr[M^{-1}(snapshot) O] for O = prod |i_l><j_l| on x_l.

    Registers not in ``registers`` contribute exactly 1 (the inverted
    single-register snapshot has unit trace), so the product runs over
    the k involved registers only.
    """
    value = 1.0 + 0.0j
    for x, i, j in zip(registers, bra_labels, ket_labels):
        if not 1 <= x <= sample.eta:
            raise IndexOutOfRange(f"register {x} out of range 1..{sample.eta}")
        c = sample.cliffords[x - 1]
        b = sample.outcomes[x - 1]
        if not (0 <= i < c.dim and 0 <= j < c.dim):
            raise IndexOutOfRange("orbital label outside register dimension")
        u = c.unitary
        value *= (c.dim + 1) * np.conj(u[b, j]) * u[b, i] - (1.0 if i == j else 0.0)
    return complex(value)


def krdm_coefficient(eta: int, k: int) -> float:
    """Prefactor relating the restricted register sum to the k-RDM element."""
    rset = RestrictedIndexSet(eta, k)
    return (k / rset.eta_used) ** k * math.factorial(eta) / math.factorial(eta - k)


def gather_outcome_rows(samples, registers) -> dict:
    """rows[x][s] = row of U_x selected by outcome b_x in sample s.

    Shared across elements: gathering once and passing the dict to
    single_shot_values avoids re-walking the sample list per element.
    """
    rows = {}
    for x in registers:
        rows[x] = np.stack([s.cliffords[x - 1].unitary[s.outcomes[x - 1], :]
                            for s in samples])
    return rows


def single_shot_values(samples, eta: int, k: int, bra_labels,
                       ket_labels, rows: dict | None = None) -> np.ndarray:
    """Per-sample estimator values (before grouping), vectorized."""
    rset = RestrictedIndexSet(eta, k)
    coeff = krdm_coefficient(eta, k)
    tuples = rset.tuples()
    m = len(samples)
    if m == 0:
        return np.zeros(0, dtype=complex)
    dim = samples[0].cliffords[0].dim
    regs_needed = sorted({x for tup in tuples for x in tup})
    if rows is None:
        rows = gather_outcome_rows(samples, regs_needed)
    values = np.zeros(m, dtype=complex)
    for tup in tuples:
        term = np.ones(m, dtype=complex)
        for x, i, j in zip(tup, bra_labels, ket_labels):
            r = rows[x][:m]
            term = term * ((dim + 1) * np.conj(r[:, j]) * r[:, i]
                           - (1.0 if i == j else 0.0))
        values += term
    return coeff * values


def _coordinatewise_median(values: np.ndarray) -> complex:
    """Median of complex values, real and imaginary parts separately.

    Ties (even counts) take the lower median.
    """
    re = np.sort(values.real)
    im = np.sort(values.imag)
    idx = (len(values) - 1) // 2
    return complex(re[idx] + 1j * im[idx])


def estimate_krdm_element(samples, config: EstimatorConfig, eta: int,
                          bra_labels, ket_labels,
                          rows: dict | None = None) -> complex:
    """Median of K group means of the restricted-sum estimator."""
    k = config.k
    needed = config.groups * config.group_size
    if len(samples) < needed:
        raise InsufficientSamples(
            f"need {needed} samples for K={config.groups}, b={config.group_size}")
    values = single_shot_values(samples[:needed], eta, k, bra_labels,
                                ket_labels, rows=rows)
    means = values.reshape(config.groups, config.group_size).mean(axis=1)
    return _coordinatewise_median(means)


# -- exhaustive-channel verification -----------------------------------------


def exhaustive_estimator_mean(state: FirstQuantizedState, k: int, bra_labels,
                              ket_labels) -> complex:
    """Exact estimator mean: average over all Clifford tuples and outcomes.

    Only available when the single-register group can be enumerated
    (n <= 2). Equals the exact k-RDM element; the identity
    M^{-1}(M(sigma)) = sigma register by register is what this exercises.
    """
    n = state.qubits_per_register
    table = clifford_table(n)
    eta = state.eta
    dim = 2 ** n
    coeff = krdm_coefficient(eta, k)
    tuples = RestrictedIndexSet(eta, k).tuples()
    total = 0.0 + 0.0j
    for combo in product(range(len(table)), repeat=eta):
        cliffords = tuple(
            CliffordElement(n=n, unitary=table[idx], key=f"t{n}:{idx}")
            for idx in combo)
        tensor = state.tensor
        for j, c in enumerate(cliffords):
            tensor = np.moveaxis(
                np.tensordot(c.unitary, tensor, axes=([1], [j])), 0, j)
        probs = np.abs(tensor) ** 2
        for outcome in product(range(dim), repeat=eta):
            p = probs[outcome]
            if p < 1e-300:
                continue
            sample = ShadowSample(cliffords=cliffords, outcomes=outcome)
            est = sum(
                snapshot_term_estimate(sample, tup, bra_labels, ket_labels)
                for tup in tuples)
            total += p * coeff * est
    return complex(total / len(table) ** eta)


def twirl_deviations(n: int, a: np.ndarray, b: np.ndarray,
                     c: np.ndarray) -> tuple:
    """Max deviations of the 2-fold and 3-fold twirl identities.

    2-fold:  E_U U†|x><x|U <x|U A U†|x>
               = (A + tr[A] I) / (2^n (2^n + 1))
    3-fold:  E_U U†|x><x|U <x|U B U†|x> <x|U C U†|x>
               = (I (tr[BC] + tr[B] tr[C]) + B tr[C] + C tr[B] + BC + CB)
                 / (2^n (2^n + 1) (2^n + 2))

    Both are checked for every computational basis outcome x by
    exhaustive average over the group table.
    """
    if n > 2:
        raise EnumerationUnavailable("twirl checks need the group table (n <= 2)")
    table = clifford_table(n)
    dim = 2 ** n
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    c = np.asarray(c, dtype=complex)
    rhs2 = (a + np.trace(a) * np.eye(dim)) / (dim * (dim + 1))
    rhs3 = (np.eye(dim) * (np.trace(b @ c) + np.trace(b) * np.trace(c))
            + b * np.trace(c) + c * np.trace(b) + b @ c + c @ b)
    rhs3 = rhs3 / (dim * (dim + 1) * (dim + 2))
    dev2 = 0.0
    dev3 = 0.0
    for x in range(dim):
        acc2 = np.zeros((dim, dim), dtype=complex)
        acc3 = np.zeros((dim, dim), dtype=complex)
        for u in table:
            ux = u.conj().T[:, x]          # U†|x>
            proj = np.outer(ux, ux.conj())  # U†|x><x|U
            amp_a = ux.conj() @ (a @ ux)    # <x|U A U†|x>
            amp_b = ux.conj() @ (b @ ux)
            amp_c = ux.conj() @ (c @ ux)
            acc2 += proj * amp_a
            acc3 += proj * amp_b * amp_c
        acc2 /= len(table)
        acc3 /= len(table)
        dev2 = max(dev2, float(np.max(np.abs(acc2 - rhs2))))
        dev3 = max(dev3, float(np.max(np.abs(acc3 - rhs3))))
    return dev2, dev3


def twirl_identity_check(n: int, a: np.ndarray, b: np.ndarray, c: np.ndarray,
                         tol: float = 1e-10) -> bool:
    dev2, dev3 = twirl_deviations(n, a, b, c)
    return dev2 < tol and dev3 < tol
