"""Clifford group elements: exhaustive tables and uniform sampling.

Elements are represented mod global phase. Two constructions are used:

* n = 1 (and on demand n = 2): an exhaustive table built by closing the
  generator set {H, S} (+ CZ for n = 2) under multiplication, with each
  product reduced to a canonical phase. Table order is deterministic.
* general n: a uniform canonical-form sampler. A symplectic basis of
  F_2^{2n} is drawn pair by pair (v_j uniform nonzero in the current
  symplectic complement, w_j uniform among vectors pairing to 1 with
  v_j), which is exactly uniform over Sp(2n, 2) by orbit counting, then
  2n uniform sign bits pick the Pauli factor. The dense unitary is
  synthesized from the stabilizer images.

Binary vectors use (x | z) coordinates: a = (x_1..x_n | z_1..z_n) maps
to the Pauli prod_i X_i^{x_i} Z_i^{z_i} with a fixed phase convention.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EnumerationUnavailable, ValidationError

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

GROUP_ORDER_MOD_PHASE = {1: 24, 2: 11520}


def _phase_canonical(u: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first nonzero entry is positive real."""
    flat = u.reshape(-1)
    idx = np.argmax(np.abs(flat) > 1e-9)
    return u * (abs(flat[idx]) / flat[idx])


def _matrix_key(u: np.ndarray) -> bytes:
    rounded = np.round(_phase_canonical(u), 9)
    return (rounded + (0.0 + 0.0j)).tobytes()  # normalize -0.0 bit patterns


@lru_cache(maxsize=None)
def clifford_table(n: int) -> tuple:
    """All Clifford unitaries on n qubits mod phase, deterministic order."""
    if n == 1:
        gens = [_H, _S]
    elif n == 2:
        cz = np.diag([1, 1, 1, -1]).astype(complex)
        gens = [np.kron(_H, np.eye(2)), np.kron(np.eye(2), _H),
                np.kron(_S, np.eye(2)), np.kron(np.eye(2), _S), cz]
    else:
        raise EnumerationUnavailable(f"no exhaustive table for n = {n}")
    seen = {}
    frontier = [np.eye(2 ** n, dtype=complex)]
    seen[_matrix_key(frontier[0])] = frontier[0]
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                cand = _phase_canonical(g @ u)
                key = _matrix_key(cand)
                if key not in seen:
                    seen[key] = cand
                    nxt.append(cand)
        frontier = nxt
    table = sorted(seen.values(), key=_matrix_key)
    if len(table) != GROUP_ORDER_MOD_PHASE[n]:
        raise AssertionError(
            f"enumeration produced {len(table)} elements, expected "
            f"{GROUP_ORDER_MOD_PHASE[n]}")
    return tuple(table)


# -- F_2 symplectic machinery ------------------------------------------------


def _symplectic_product(a: np.ndarray, b: np.ndarray, n: int) -> int:
    return int((a[:n] @ b[n:] + a[n:] @ b[:n]) % 2)


def _nullspace_basis(constraints: np.ndarray, width: int) -> np.ndarray:
    """Row basis of {u : constraints @ u = 0 over F_2}."""
    if constraints.size == 0:
        return np.eye(width, dtype=np.uint8)
    mat = constraints.copy() % 2
    rows, cols = mat.shape
    pivots = []
    r = 0
    for c in range(cols):
        pivot_rows = np.nonzero(mat[r:, c])[0]
        if pivot_rows.size == 0:
            continue
        pr = r + pivot_rows[0]
        mat[[r, pr]] = mat[[pr, r]]
        for other in range(rows):
            if other != r and mat[other, c]:
                mat[other] = (mat[other] + mat[r]) % 2
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for k, c in enumerate(free):
        basis[k, c] = 1
        for rr, pc in enumerate(pivots):
            if mat[rr, c]:
                basis[k, pc] = 1
    return basis


def sample_symplectic_basis(n: int, rng: np.random.Generator) -> list:
    """Uniform symplectic basis [(v_1, w_1), ..., (v_n, w_n)] of F_2^{2n}."""
    width = 2 * n
    pairs = []
    constraints = np.zeros((0, width), dtype=np.uint8)
    for _ in range(n):
        # Constraint rows are arranged so that constraints @ u computes the
        # symplectic pairing of u with each chosen vector.
        basis = _nullspace_basis(constraints, width)
        dim = basis.shape[0]
        while True:
            coeff = rng.integers(0, 2, size=dim).astype(np.uint8)
            if coeff.any():
                break
        v = (coeff @ basis) % 2
        u = (rng.integers(0, 2, size=dim).astype(np.uint8) @ basis) % 2
        if _symplectic_product(v, u, n) != 1:
            w0 = None
            for row in basis:
                if _symplectic_product(v, row, n) == 1:
                    w0 = row
                    break
            if w0 is None:
                raise AssertionError("no symplectic partner in complement")
            u = (u + w0) % 2
        pairs.append((v.astype(np.uint8), u.astype(np.uint8)))
        swapped_v = np.concatenate([v[n:], v[:n]])
        swapped_w = np.concatenate([u[n:], u[:n]])
        constraints = np.vstack([constraints, swapped_v, swapped_w]).astype(np.uint8)
    return pairs


@lru_cache(maxsize=None)
def _pauli_cached(n: int, packed: int) -> np.ndarray:
    op = np.array([[1.0 + 0j]])
    width = 2 * n
    for i in range(n):
        x = (packed >> (width - 1 - i)) & 1
        z = (packed >> (width - 1 - n - i)) & 1
        factor = np.eye(2, dtype=complex)
        if x:
            factor = factor @ _X
        if z:
            factor = factor @ _Z
        if x and z:
            factor = 1j * factor
        op = np.kron(op, factor)
    op.setflags(write=False)
    return op


def pauli_from_bits(bits: np.ndarray, n: int) -> np.ndarray:
    """Hermitian Pauli for (x|z) bits: prod_i (i^{x_i z_i}) X_i^{x_i} Z_i^{z_i}.

    The i^{xz} factor turns XZ into Y, so every output squares to the
    identity and stabilizer projectors (I + P)/2 are well defined.
    There are only 4^n of these, so they are built once and cached.
    """
    packed = 0
    for b in bits:
        packed = (packed << 1) | int(b)
    return _pauli_cached(n, packed)


def _unitary_from_images(n: int, pairs, x_signs, z_signs) -> np.ndarray:
    """Clifford with U X_j U† = (-1)^{x_signs_j} P(v_j), likewise for Z."""
    dim = 2 ** n
    x_imgs = [((-1) ** int(x_signs[j])) * pauli_from_bits(pairs[j][0], n)
              for j in range(n)]
    z_imgs = [((-1) ** int(z_signs[j])) * pauli_from_bits(pairs[j][1], n)
              for j in range(n)]
    # |psi_0> = joint +1 eigenvector of the Z images.
    proj = np.eye(dim, dtype=complex)
    for s in z_imgs:
        proj = proj @ (np.eye(dim) + s) / 2
    col = 0
    while col < dim and np.linalg.norm(proj[:, col]) < 1e-9:
        col += 1
    if col == dim:
        raise AssertionError("stabilizer projector is zero")
    psi0 = proj[:, col] / np.linalg.norm(proj[:, col])
    columns = np.empty((dim, dim), dtype=complex)
    for b in range(dim):
        vec = psi0
        for j in range(n):
            if (b >> (n - 1 - j)) & 1:
                vec = x_imgs[j] @ vec
        columns[:, b] = vec
    return _phase_canonical(columns)


@dataclass(frozen=True)
class CliffordElement:
    """One sampled Clifford: dense unitary plus a replayable key."""

    n: int
    unitary: np.ndarray
    key: str

    @property
    def dim(self) -> int:
        return 2 ** self.n

    def maps_paulis_to_paulis(self, tol: float = 1e-10) -> bool:
        """Check U P U† is a (phase times) Pauli for the generator Paulis."""
        for bits in np.eye(2 * self.n, dtype=np.uint8):
            p = pauli_from_bits(bits, self.n)
            img = self.unitary @ p @ self.unitary.conj().T
            if not _is_signed_pauli(img, self.n, tol):
                return False
        return True


def _is_signed_pauli(mat: np.ndarray, n: int, tol: float) -> bool:
    for bits in _all_bit_vectors(2 * n):
        p = pauli_from_bits(bits, n)
        overlap = np.trace(p.conj().T @ mat) / (2 ** n)
        if abs(abs(overlap) - 1.0) <= tol and np.max(np.abs(mat - overlap * p)) <= tol:
            return True
    return False


def _all_bit_vectors(width: int):
    for val in range(2 ** width):
        yield np.array([(val >> (width - 1 - b)) & 1 for b in range(width)],
                       dtype=np.uint8)


def sample_clifford(n: int, rng: np.random.Generator) -> CliffordElement:
    """Uniform Clifford element mod phase, deterministic given the stream."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if n == 1:
        table = clifford_table(1)
        idx = int(rng.integers(0, len(table)))
        return CliffordElement(n=1, unitary=table[idx], key=f"t1:{idx}")
    pairs = sample_symplectic_basis(n, rng)
    x_signs = rng.integers(0, 2, size=n)
    z_signs = rng.integers(0, 2, size=n)
    unitary = _unitary_from_images(n, pairs, x_signs, z_signs)
    key = _encode_key(n, pairs, x_signs, z_signs)
    return CliffordElement(n=n, unitary=unitary, key=key)


def _encode_key(n, pairs, x_signs, z_signs) -> str:
    def bits_to_int(bits):
        out = 0
        for b in bits:
            out = (out << 1) | int(b)
        return out
    fields = []
    for v, w in pairs:
        fields.append(str(bits_to_int(v)))
        fields.append(str(bits_to_int(w)))
    fields.append(str(bits_to_int(x_signs)))
    fields.append(str(bits_to_int(z_signs)))
    return f"c{n}:" + ".".join(fields)


def clifford_from_key(key: str) -> CliffordElement:
    """Rebuild the element named by a sample key (CSV replay path)."""
    head, _, payload = key.partition(":")
    if head == "t1":
        table = clifford_table(1)
        return CliffordElement(n=1, unitary=table[int(payload)], key=key)
    if not head.startswith("c"):
        raise ValidationError(f"bad clifford key {key!r}")
    n = int(head[1:])
    parts = [int(p) for p in payload.split(".")]
    if len(parts) != 2 * n + 2:
        raise ValidationError(f"bad clifford key {key!r}")

    def int_to_bits(val, width):
        return np.array([(val >> (width - 1 - b)) & 1 for b in range(width)],
                        dtype=np.uint8)

    pairs = [(int_to_bits(parts[2 * j], 2 * n), int_to_bits(parts[2 * j + 1], 2 * n))
             for j in range(n)]
    x_signs = int_to_bits(parts[-2], n)
    z_signs = int_to_bits(parts[-1], n)
    unitary = _unitary_from_images(n, pairs, x_signs, z_signs)
    return CliffordElement(n=n, unitary=unitary, key=key)
