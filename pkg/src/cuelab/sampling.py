"""Haar sampling on U(N), SU(N), and rotated-determinant measures.

The central construction is the complex-reflection decomposition

    U = R(x_N) · diag(R(x_{N-1}), 1) · ... · diag(R(x_1), I_{N-1}),

where ``x_j`` is uniform on the unit sphere of C^j and ``R(x)`` is the
unique unitary that maps the last basis vector ``e_j`` to ``x`` and acts as
the identity on the orthogonal complement of span(e_j - x).  Sampling the
chain (x_1, ..., x_N) independently yields Haar measure on U(N); fixing
``x_1`` as a function of the later vectors pins the determinant and yields
Haar measure on the coset {det U = e^{iN theta}} of SU(N).

An independent QR-based sampler (`haar_unitary_qr_oracle`) is provided
purely as a statistical cross-check for the reflection construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidArgumentError,
    InvalidDimensionError,
    NumericalFailureError,
)
from .rng import RngStream

__all__ = [
    "UnitaryMatrix",
    "ReflectionChain",
    "sample_unit_sphere",
    "reflection_matrix",
    "reflection_determinant",
    "chain_to_matrix",
    "haar_reflection_chain",
    "haar_unitary",
    "haar_special_unitary",
    "coupled_chain_pair",
    "coupled_pair",
    "haar_unitary_qr_oracle",
]

# Tolerances for the UnitaryMatrix invariants.  The unitarity defect of the
# reflection product grows (slowly) with N, hence the dimension factor.
_UNITARITY_TOL = 1e-10
_DET_TOL = 1e-8


def _generator(rng) -> np.random.Generator:
    """Accept either an RngStream or a live numpy Generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise InvalidArgumentError(f"rng must be an RngStream or numpy Generator, got {type(rng)!r}")


@dataclass
class UnitaryMatrix:
    """A dense N x N unitary matrix.

    The constructor only validates the shape; the (more expensive) unitary
    invariants are checked by :meth:`check`, which unit tests apply to every
    sampled matrix but hot Monte Carlo loops do not re-run per sample.
    """

    entries: np.ndarray
    dim: int = 0

    def __post_init__(self):
        self.entries = np.ascontiguousarray(self.entries, dtype=np.complex128)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise InvalidDimensionError(f"entries must be square, got shape {self.entries.shape}")
        n = self.entries.shape[0]
        if n < 1:
            raise InvalidDimensionError("dimension must be >= 1")
        if self.dim == 0:
            self.dim = n
        elif self.dim != n:
            raise InvalidDimensionError(f"dim={self.dim} does not match shape {self.entries.shape}")

    def unitarity_defect(self) -> float:
        """Max-norm of U^dagger U - I."""
        g = self.entries.conj().T @ self.entries
        g[np.diag_indices_from(g)] -= 1.0
        return float(np.max(np.abs(g)))

    def det(self) -> complex:
        return complex(np.linalg.det(self.entries))

    def check(self) -> "UnitaryMatrix":
        """Verify the unitary invariants, returning self for chaining."""
        defect = self.unitarity_defect()
        if defect > _UNITARITY_TOL * self.dim:
            raise NumericalFailureError(
                f"unitarity defect {defect:.3e} exceeds {_UNITARITY_TOL * self.dim:.3e}"
            )
        dmod = abs(self.det())
        if abs(dmod - 1.0) > _DET_TOL:
            raise NumericalFailureError(f"|det| = {dmod!r} is not 1 within {_DET_TOL}")
        return self


@dataclass
class ReflectionChain:
    """The vectors (x_1, ..., x_N) of a reflection decomposition.

    ``vectors[j-1]`` is the length-j unit vector x_j; ``x_1`` is stored as a
     1-vector whose single entry has unit modulus.
    """

    vectors: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def last_components(self) -> np.ndarray:
        """The inner products <x_j, e_j> (the last component of each x_j)."""
        return np.array([x[-1] for x in self.vectors], dtype=np.complex128)

    def check(self, tol: float = 1e-12) -> "ReflectionChain":
        for j, x in enumerate(self.vectors, start=1):
            if len(x) != j:
                raise InvalidDimensionError(f"vector {j} has length {len(x)}, expected {j}")
            err = abs(np.linalg.norm(x) - 1.0)
            if err > tol:
                raise NumericalFailureError(f"vector {j} norm off by {err:.3e}")
        return self


def sample_unit_sphere(j: int, rng) -> np.ndarray:
    """Draw a uniform point on the unit sphere of C^j.

    Normalizing a standard complex Gaussian vector gives exact rotation
    invariance; for j = 1 this reduces to a uniform phase on the circle.
    """
    if not isinstance(j, (int, np.integer)) or j < 1:
        raise InvalidDimensionError(f"sphere dimension must be a positive integer, got {j!r}")
    gen = _generator(rng)
    raw = gen.standard_normal(2 * j)
    z = raw[0::2] + 1j * raw[1::2]
    return z / np.linalg.norm(z)


def _reflection_gamma(x: np.ndarray) -> complex:
    """gamma = 1 - conj(<x, e_j>), the pivot of the rank-one update."""
    return 1.0 - np.conj(x[-1])


def reflection_matrix(x: np.ndarray) -> UnitaryMatrix:
    """The unique unitary sending e_j to x and fixing span(e_j - x)^perp.

    Built as the rank-one (Householder-type) update
    ``R = I - u u^dagger / gamma`` with ``u = e_j - x`` and
    ``gamma = 1 - conj(x_j)``; the degenerate input x = e_j returns the
    identity exactly.
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or len(x) < 1:
        raise InvalidDimensionError(f"x must be a nonempty vector, got shape {x.shape}")
    if abs(np.linalg.norm(x) - 1.0) > 1e-8:
        raise InvalidArgumentError("reflection input must be a unit vector")
    j = len(x)
    eye = np.eye(j, dtype=np.complex128)
    gamma = _reflection_gamma(x)
    if gamma == 0:
        return UnitaryMatrix(eye, j)
    u = -x.copy()
    u[-1] += 1.0
    return UnitaryMatrix(eye - np.outer(u, u.conj()) / gamma, j)


def reflection_determinant(x: np.ndarray) -> complex:
    """det R(x), a unit-modulus number: -conj(gamma)/gamma, or 1 if x = e_j.

    Only the last component of x enters.  This is the closed form of the
    determinant of the rank-one update; it is unit-tested against dense
    determinants of `reflection_matrix`.
    """
    x = np.asarray(x, dtype=np.complex128)
    gamma = _reflection_gamma(x)
    if gamma == 0:
        return 1.0 + 0.0j
    return complex(-np.conj(gamma) / gamma)


def _apply_chain(vectors: list) -> np.ndarray:
    """Multiply out R(x_N) diag(R(x_{N-1}),1) ... via in-place rank-one updates."""
    n = len(vectors)
    u_mat = np.zeros((n, n), dtype=np.complex128)
    for j, x in enumerate(vectors, start=1):
        u_mat[j - 1, j - 1] = 1.0
        gamma = _reflection_gamma(x)
        if gamma == 0:
            continue
        u = -x.copy()
        u[-1] += 1.0
        block = u_mat[:j, :j]
        block -= np.outer(u, (u.conj() @ block) / gamma)
    return u_mat


def chain_to_matrix(chain: ReflectionChain) -> UnitaryMatrix:
    """Evaluate the reflection product of a chain as a dense matrix."""
    if chain.dim < 1:
        raise InvalidDimensionError("chain must contain at least one vector")
    return UnitaryMatrix(_apply_chain(chain.vectors), chain.dim)


def _gaussian_block(gen: np.random.Generator, sizes) -> list:
    """Draw normalized sphere vectors of the given sizes from one flat block.

    A single standard_normal call keeps the draw sequence (and therefore the
    per-stream determinism) independent of how the vectors are consumed.
    """
    total = int(sum(sizes))
    raw = gen.standard_normal(2 * total)
    z = raw[0::2] + 1j * raw[1::2]
    out = []
    offset = 0
    for size in sizes:
        v = z[offset : offset + size]
        offset += size
        out.append(v / np.linalg.norm(v))
    return out


def haar_reflection_chain(N: int, rng) -> ReflectionChain:
    """Sample the reflection chain of a Haar unitary without assembling it.

    Building the chain costs O(N^2) draws versus O(N^3) work for the dense
    matrix, so spectrum-free statistics (anything derived from log Z(0))
    stay cheap at large N.
    """
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise InvalidDimensionError(f"N must be a positive integer, got {N!r}")
    gen = _generator(rng)
    return ReflectionChain(_gaussian_block(gen, range(1, N + 1)))


def haar_unitary(N: int, rng) -> tuple[UnitaryMatrix, ReflectionChain]:
    """Sample Haar measure on U(N) by the reflection decomposition."""
    chain = haar_reflection_chain(N, rng)
    return chain_to_matrix(chain), chain


def _forced_first_vector(vectors: list, N: int, theta: float) -> np.ndarray:
    """The x_1 that pins det U = e^{iN theta} given x_2..x_N.

    det U = x_1 * prod_{j>=2} det R(x_j), and every factor has unit modulus,
    so x_1 = e^{iN theta} * prod conj(det R(x_j)).
    """
    phase = complex(np.exp(1j * N * theta))
    for x in vectors:
        phase *= np.conj(reflection_determinant(x))
    # Guard against drift in long products; the result must be unimodular.
    return np.array([phase / abs(phase)], dtype=np.complex128)


def haar_special_unitary(N: int, theta: float, rng) -> tuple[UnitaryMatrix, ReflectionChain]:
    """Sample the Haar-type measure on {U : det U = e^{iN theta}}.

    x_2..x_N are independent uniform sphere vectors and x_1 is the
    determinant-forced phase; theta = 0 gives Haar measure on SU(N).
    """
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise InvalidDimensionError(f"N must be a positive integer, got {N!r}")
    gen = _generator(rng)
    tail = _gaussian_block(gen, range(2, N + 1))
    first = _forced_first_vector(tail, N, float(theta))
    chain = ReflectionChain([first] + tail)
    return chain_to_matrix(chain), chain


def coupled_chain_pair(N: int, theta: float, rng) -> tuple[ReflectionChain, ReflectionChain]:
    """Chains of a coupled (rotated-SU(N), U(N)) pair sharing x_2..x_N.

    The first chain takes the determinant-forced x_1 (law P_{SU(N),theta});
    the second replaces it with an independent uniform phase, which makes
    the pair marginally (rotated-SU(N), Haar-U(N)) while every later
    reflection coincides.
    """
    if not isinstance(N, (int, np.integer)) or N < 2:
        raise InvalidDimensionError(f"coupling requires N >= 2, got {N!r}")
    gen = _generator(rng)
    tail = _gaussian_block(gen, range(2, N + 1))
    forced = _forced_first_vector(tail, N, float(theta))
    free = np.array([np.exp(2j * np.pi * gen.random())], dtype=np.complex128)
    return ReflectionChain([forced] + tail), ReflectionChain([free] + tail)


def coupled_pair(N: int, theta: float, rng) -> tuple[UnitaryMatrix, UnitaryMatrix]:
    """Matrices of the coupled pair: (U ~ P_{SU(N),theta}, U' ~ Haar U(N)).

    Because the chains share x_2..x_N, Im log det(I - U) and
    Im log det(I - U') differ only through the first reflection, which
    bounds the difference by pi (each term lies in (-pi/2, pi/2)).
    """
    chain_su, chain_u = coupled_chain_pair(N, theta, rng)
    return chain_to_matrix(chain_su), chain_to_matrix(chain_u)


def haar_unitary_qr_oracle(N: int, rng) -> UnitaryMatrix:
    """Independent Haar sampler: QR of a complex Ginibre matrix.

    The Q factor of a standard complex Gaussian matrix, with each column
    rephased by the sign of the corresponding diagonal entry of R, is Haar
    distributed (the phase fix removes the convention-dependence of QR).
    Used only to cross-validate the reflection sampler.
    """
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise InvalidDimensionError(f"N must be a positive integer, got {N!r}")
    gen = _generator(rng)
    a = gen.standard_normal((N, N)) + 1j * gen.standard_normal((N, N))
    q, r = np.linalg.qr(a)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return UnitaryMatrix(q, N)
