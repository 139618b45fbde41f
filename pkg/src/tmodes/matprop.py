"""2x2 propagators for the coupled-mode interaction.

Matrices are plain ``(2, 2)`` complex numpy arrays.  :class:`Unitary2`
wraps one and checks unitarity when it is built, so anything typed as a
``Unitary2`` is known to satisfy ``U^dagger U = I`` to ``UNITARY_TOL``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

UNITARY_TOL = 1e-12
HERMITIAN_TOL = 1e-9

IDENTITY = np.eye(2, dtype=complex)


def _as_matrix(m):
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise DomainError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has non-finite entries")
    return m


def unitarity_defect(m):
    """Largest entry of ``|U^dagger U - I|``."""
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - IDENTITY)))


@dataclass(frozen=True, eq=False)
class Unitary2:
    matrix: np.ndarray

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        defect = unitarity_defect(m)
        if defect > UNITARY_TOL:
            raise DomainError(f"matrix is not unitary (defect {defect:.3e})")
        if abs(abs(np.linalg.det(m)) - 1.0) > UNITARY_TOL:
            raise DomainError("|det U| differs from 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dagger(self):
        return self.matrix.conj().T

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __matmul__(self, other):
        return compose(self, other)


def propagator(g0, phi, dt):
    """Constant-phase evolution over a segment of length ``dt``.

    Returns ``[[cos(g0 dt), e^{i phi} sin(g0 dt)], [-e^{-i phi} sin(g0 dt), cos(g0 dt)]]``
    in the interaction picture (free-mode frequencies are not applied).
    """
    if dt < 0:
        raise DomainError(f"dt must be >= 0, got {dt}")
    if g0 < 0:
        raise DomainError(f"g0 must be >= 0, got {g0}")
    c = np.cos(g0 * dt)
    s = np.sin(g0 * dt)
    e = np.exp(1j * phi)
    return Unitary2(np.array([[c, e * s], [-np.conj(e) * s, c]], dtype=complex))


def compose(later, earlier):
    """Product ``later @ earlier``: ``earlier`` acts first."""
    return Unitary2(np.asarray(later) @ np.asarray(earlier))


def compose_all(factors):
    """Compose propagators given in chronological order (earliest first)."""
    total = Unitary2(IDENTITY)
    for u in factors:
        total = compose(u, total)
    return total


def conjugate_density(u, rho):
    """Return ``U rho U^dagger``.

    ``rho`` may be normalised to unit trace or to a total occupation; the
    trace is carried through unchanged either way.
    """
    rho = _as_matrix(rho)
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise DomainError("density matrix is not Hermitian")
    m = np.asarray(u)
    return m @ rho @ m.conj().T
