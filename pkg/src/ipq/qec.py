"""Parity detection, win-win-measurement recovery, Knill-Laflamme checks and the binomial code.

States are dense vectors on a truncated Fock space built by :mod:`ipq.fock`. The ancilla
qubit of the WWM protocol is appended as the most significant index, so an extended
vector is ``[phi_0; phi_1]`` with ``phi_q`` the system part for ancilla state ``|q>``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, SingularInverseError, SyndromeError
from .fock import IPQModes, dag, destroy, parity_operator, quadrature

log = logging.getLogger(__name__)

ORTHO_TOL = 1e-12
KL_TOL = 1e-10
PARITY_TOL = 1e-10
EIGEN_FLOOR = 1e-12


@dataclass(frozen=True)
class CodeSpace:
    codewords: tuple
    label: str = ""

    def __post_init__(self):
        words = tuple(np.asarray(w, dtype=complex) for w in self.codewords)
        if not words:
            raise ValueError("code space needs at least one codeword")
        dim = words[0].shape
        if any(w.shape != dim or w.ndim != 1 for w in words):
            raise DimensionError("codewords must be vectors of one dimension")
        gram = np.array([[np.vdot(a, b) for b in words] for a in words])
        if np.max(np.abs(gram - np.eye(len(words)))) > ORTHO_TOL:
            raise ValueError("codewords are not orthonormal")
        object.__setattr__(self, "codewords", words)

    @property
    def dim(self) -> int:
        return self.codewords[0].shape[0]

    @property
    def basis(self) -> np.ndarray:
        """Columns are the codewords."""
        return np.column_stack(self.codewords)

    def projector(self) -> np.ndarray:
        B = self.basis
        return B @ dag(B)

    def encode(self, amplitudes: Sequence[complex]) -> np.ndarray:
        return self.basis @ np.asarray(amplitudes, dtype=complex)


@dataclass(frozen=True)
class ErrorSet:
    operators: tuple
    labels: tuple = ()

    def __post_init__(self):
        ops = tuple(np.asarray(o, dtype=complex) for o in self.operators)
        if not ops:
            raise ValueError("error set is empty")
        shape = ops[0].shape
        if len(shape) != 2 or shape[0] != shape[1] or any(o.shape != shape for o in ops):
            raise DimensionError("error operators must be square and of one size")
        labels = tuple(self.labels) or tuple(f"E{k}" for k in range(len(ops)))
        if len(labels) != len(ops):
            raise ValueError("one label per error operator")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]


@dataclass(frozen=True)
class KLResult:
    """``C[l, k]`` from the first codeword, the full tensor ``T[l, k, i, j]`` and the verdict."""

    C: np.ndarray
    tensor: np.ndarray
    satisfied: bool
    residual: float


def kl_matrix(code: CodeSpace, errors: ErrorSet, tol: float = KL_TOL) -> KLResult:
    """Evaluate every ``<W_i|E_l^dag E_k|W_j>`` and check the Knill-Laflamme condition.

    The residual is the largest of the off-diagonal logical elements and the spread of the
    diagonal ones across logical indices.
    """
    if code.dim != errors.dim:
        raise DimensionError(f"code dimension {code.dim} != error dimension {errors.dim}")
    W = code.basis
    EW = np.stack([E @ W for E in errors.operators])  # (k, dim, i)
    T = np.einsum("ldi,kdj->lkij", EW.conj(), EW)
    n = W.shape[1]
    off = T * (1 - np.eye(n))[None, None]
    diag = np.einsum("lkii->lki", T)
    spread = diag - diag[..., :1]
    residual = float(max(np.max(np.abs(off)), np.max(np.abs(spread))))
    return KLResult(diag[..., 0], T, residual <= tol, residual)


# ---------------------------------------------------------------- codes


def ipq_code(modes: IPQModes) -> CodeSpace:
    b = modes.logical
    return CodeSpace((b.ket0, b.ket1), "ipq")


def dipole_error(modes: IPQModes) -> np.ndarray:
    """``x = x_0 + x_1`` with ``x_i = (c_i + c_i^dag)/sqrt2``."""
    return quadrature(modes.c0) + quadrature(modes.c1)


def ipq_errors(modes: IPQModes, second_order: bool = False) -> ErrorSet:
    """``{I, x}``; ``second_order`` adds the products ``x_i x_j`` generated by three-operator terms."""
    eye = np.eye(modes.spec.dim, dtype=complex)
    ops = [eye, dipole_error(modes)]
    labels = ["I", "x"]
    if second_order:
        x0, x1 = quadrature(modes.c0), quadrature(modes.c1)
        ops += [x0 @ x0, x0 @ x1, x1 @ x1]
        labels += ["x0x0", "x0x1", "x1x1"]
    return ErrorSet(tuple(ops), tuple(labels))


def binomial_code(cutoff: int = 4) -> CodeSpace:
    if cutoff < 4:
        raise ValueError("binomial code needs Fock level 4")
    d = cutoff + 1
    w0 = np.zeros(d, dtype=complex)
    w0[0] = w0[4] = np.sqrt(0.5)
    w1 = np.zeros(d, dtype=complex)
    w1[2] = 1.0
    return CodeSpace((w0, w1), "binomial")


def binomial_errors(cutoff: int = 4) -> ErrorSet:
    return ErrorSet((np.eye(cutoff + 1, dtype=complex), destroy(cutoff)), ("I", "a"))


# ---------------------------------------------------------------- parity


def _parity(modes: IPQModes) -> np.ndarray:
    return np.real(np.diag(parity_operator(modes.c0, modes.c1)))


def parity_syndrome(state, modes: IPQModes, tol: float = PARITY_TOL) -> int:
    """Eigenvalue of ``(-1)^(n0+n1+1)``; +1 means no error. Mixed parity raises."""
    psi = np.asarray(state, dtype=complex)
    if psi.shape != (modes.spec.dim,):
        raise DimensionError("state does not live on the two-mode space")
    p = _parity(modes)
    w = np.abs(psi) ** 2
    total = w.sum()
    if total == 0:
        raise ValueError("zero state")
    odd = w[p > 0].sum() / total
    if odd >= 1 - tol:
        return 1
    if odd <= tol:
        return -1
    raise SyndromeError(f"ambiguous syndrome: odd-parity weight {odd:.3e}")


@dataclass(frozen=True)
class ParityBranch:
    outcome: int
    probability: float
    post_state: Optional[np.ndarray]


def parity_measure(state, modes: IPQModes) -> tuple:
    """Projective parity measurement; one branch per outcome with Born probabilities."""
    psi = np.asarray(state, dtype=complex)
    p = _parity(modes)
    norm2 = np.vdot(psi, psi).real
    out = []
    for outcome in (1, -1):
        proj = np.where(p == outcome, psi, 0)
        prob = np.vdot(proj, proj).real / norm2
        post = proj / np.sqrt(prob * norm2) if prob > 0 else None
        out.append(ParityBranch(outcome, float(prob), post))
    return tuple(out)


# ---------------------------------------------------------------- WWM


@dataclass(frozen=True)
class WwmOutcome:
    outcome: int
    probability: float
    post_state: Optional[np.ndarray]
    fidelity_to_input: float


@dataclass
class WwmDiagnostics:
    method: str
    unitarity_defect: float
    support_eigenvalues: np.ndarray
    non_unitary: bool
    min_epsilon: float
    notes: list = field(default_factory=list)


def _psd_sqrt(M: np.ndarray) -> np.ndarray:
    lam, V = np.linalg.eigh(0.5 * (M + dag(M)))
    return (V * np.sqrt(np.clip(lam, 0, None))) @ dag(V)


def support_spectrum(x_op: np.ndarray, state: np.ndarray, tol: float = 1e-12):
    """Eigenvalues and eigenvectors of ``x_op`` carrying weight of ``state``."""
    lam, V = np.linalg.eigh(x_op)
    w = np.abs(dag(V) @ state) ** 2
    keep = w > tol * max(w.sum(), 1e-300)
    return lam, V, keep


def spectral_unitary(x_op: np.ndarray, epsilon: float, state: np.ndarray):
    """Ancilla-extended ``U`` built eigenvalue by eigenvalue from ``x_op``.

    Each supported eigenvalue ``xi`` gets the block ``[[1/(eps xi), -s], [s, 1/(eps xi)]]`` with
    ``s = sqrt(1 - 1/(eps xi)^2)``; unsupported eigenvectors get the identity block.
    """
    lam, V, keep = support_spectrum(x_op, state)
    if np.any(np.abs(lam[keep]) < EIGEN_FLOOR):
        raise SingularInverseError("error state has weight on a zero eigenvalue of x")
    inv = np.ones_like(lam, dtype=complex)
    s = np.zeros_like(lam, dtype=complex)
    inv[keep] = 1.0 / (epsilon * lam[keep])
    rest = 1 - np.real(inv[keep]) ** 2
    # at eps exactly on threshold rounding leaves rest ~ -1e-16; only a real shortfall goes complex
    rest = np.where(rest > -1e-12, np.clip(rest, 0, None), rest)
    s[keep] = np.sqrt(rest + 0j)
    D0 = (V * inv) @ dag(V)
    S = (V * s) @ dag(V)
    U = np.block([[D0, -S], [S, D0]])
    return U, lam[keep]


def code_unitary(x_op: np.ndarray, epsilon: float, code: CodeSpace):
    """Unitary dilation of ``R = pinv(eps x P_code)``.

    ``U = [[R, sqrt(I - R R^dag)], [sqrt(I - R^dag R), -R^dag]]`` is unitary whenever
    ``||R|| <= 1``, i.e. ``eps`` at least the inverse smallest singular value of ``x`` on the code.
    """
    P = code.projector()
    R = np.linalg.pinv(epsilon * x_op @ P, rcond=1e-10)
    eye = np.eye(R.shape[0])
    U = np.block([[R, _psd_sqrt(eye - R @ dag(R))], [_psd_sqrt(eye - dag(R) @ R), -dag(R)]])
    sing = np.linalg.svd(x_op @ code.basis, compute_uv=False)
    return U, sing


def code_epsilon_threshold(x_op: np.ndarray, code: CodeSpace) -> float:
    sing = np.linalg.svd(x_op @ code.basis, compute_uv=False)
    if sing.min() < EIGEN_FLOOR:
        raise SingularInverseError("x annihilates part of the code space")
    return float(1 / sing.min())


def spectral_epsilon_threshold(x_op: np.ndarray, code: CodeSpace) -> float:
    """Smallest ``eps`` with ``eps^2 xi^2 >= 1`` on every eigenvalue reached from the code."""
    lam, V = np.linalg.eigh(x_op)
    w = np.sum(np.abs(dag(V) @ x_op @ code.basis) ** 2, axis=1)
    reach = lam[w > 1e-12]
    if reach.size == 0:
        raise SingularInverseError("x maps the code to zero")
    return float(1 / np.min(np.abs(reach)))


def _fidelity(a: Optional[np.ndarray], b: np.ndarray) -> float:
    if a is None:
        return 0.0
    return float(min(1.0, abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real)))


def wwm_recover(err_state, epsilon: float, x_op, reference=None, method: str = "code", code: Optional[CodeSpace] = None):
    """Apply the WWM unitary to ``err_state (x) |0_q>`` and project the ancilla.

    ``err_state`` is the unnormalized ``eps x|psi>``; ``reference`` (default: the code
    projection of ``x^+ err_state / eps``) is the pre-error state used for fidelities.
    Returns ``(outcome0, outcome1, diagnostics)``.
    """
    x_op = np.asarray(x_op, dtype=complex)
    phi = np.asarray(err_state, dtype=complex)
    if x_op.shape != (phi.size, phi.size):
        raise DimensionError("x operator and state dimensions differ")
    if not np.allclose(x_op, dag(x_op), atol=1e-12):
        raise ValueError("x operator must be Hermitian")
    norm = np.linalg.norm(phi)
    if norm == 0:
        raise ValueError("zero error state")
    phi_n = phi / norm
    lam, V, keep = support_spectrum(x_op, phi_n)
    notes = []
    if method == "spectral":
        U, support = spectral_unitary(x_op, epsilon, phi_n)
        min_eps = float(1 / np.min(np.abs(support)))
    elif method == "code":
        if code is None:
            raise ValueError("code recovery needs the code space")
        U, sing = code_unitary(x_op, epsilon, code)
        support = lam[keep]
        min_eps = float(1 / sing.min())
    else:
        raise ValueError("method must be 'code' or 'spectral'")
    defect = float(np.max(np.abs(dag(U) @ U - np.eye(U.shape[0]))))
    non_unitary = epsilon < min_eps * (1 - 1e-12)
    if non_unitary:
        notes.append(f"eps={epsilon:.4g} below unitarity threshold {min_eps:.4g}")
        log.warning("WWM unitary outside its valid regime: %s", notes[-1])
    if reference is None:
        reference = np.linalg.pinv(x_op) @ phi / epsilon
        if code is not None:
            reference = code.projector() @ reference
    out = U @ np.concatenate([phi_n, np.zeros_like(phi_n)])
    n = phi.size
    results = []
    for q in (0, 1):
        part = out[q * n:(q + 1) * n]
        prob = float(np.vdot(part, part).real)
        post = part / np.sqrt(prob) if prob > 1e-300 else None
        results.append(WwmOutcome(q, prob, post, _fidelity(post, reference)))
    diag = WwmDiagnostics(method, defect, support, non_unitary, min_eps, notes)
    return results[0], results[1], diag


def random_one_particle(modes: IPQModes, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    z /= np.linalg.norm(z)
    return modes.ket(z[0], z[1])


@dataclass
class WwmTrial:
    fidelity0: float
    fidelity1: float
    probability0: float
    probability1: float
    unitarity_defect: float
    syndrome_before: int
    syndrome_after: int


def wwm_trials(trials: int, epsilon: Optional[float] = None, cutoff: int = 4, seed: int = 0, method: str = "code") -> tuple:
    """Random one-particle states through kick, parity check and recovery.

    Without ``epsilon`` the smallest value valid for both the code and the spectral
    construction is used. Returns ``(epsilon, list of WwmTrial)``.
    """
    modes = IPQModes.build(cutoff)
    x = dipole_error(modes)
    code = ipq_code(modes)
    if epsilon is None:
        epsilon = max(code_epsilon_threshold(x, code), spectral_epsilon_threshold(x, code))
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        psi = random_one_particle(modes, rng)
        s0 = parity_syndrome(psi, modes)
        err = epsilon * x @ psi
        s1 = parity_syndrome(err, modes)
        o0, o1, d = wwm_recover(err, epsilon, x, psi, method, code)
        out.append(WwmTrial(o0.fidelity_to_input, o1.fidelity_to_input, o0.probability, o1.probability, d.unitarity_defect, s0, s1))
    return epsilon, out


# ---------------------------------------------------------------- binomial recovery


def binomial_recovery_unitary(cutoff: int = 4) -> np.ndarray:
    """Unitary sending ``|3> -> |W0>`` and ``|1> -> |W1> = |2>``.

    The remaining inputs are mapped onto the orthogonal complement of those images so
    the operator is unitary on levels ``0..cutoff``; levels above 4 are left alone.
    """
    d = cutoff + 1
    code = binomial_code(cutoff)
    w0, w1 = code.codewords
    e = np.eye(d, dtype=complex)
    minus = np.zeros(d, dtype=complex)
    minus[0], minus[4] = np.sqrt(0.5), -np.sqrt(0.5)
    U = np.zeros((d, d), dtype=complex)
    U[:, 3] = w0
    U[:, 1] = w1
    U[:, 2] = e[1]
    U[:, 0] = e[3]
    U[:, 4] = minus
    for k in range(5, d):
        U[:, k] = e[k]
    return U


def binomial_recovery(state, cutoff: int = 4, tol: float = 1e-10) -> np.ndarray:
    """Correct a post-loss state; the input must live on ``{|1>, |3>}``."""
    psi = np.asarray(state, dtype=complex)
    if psi.shape != (cutoff + 1,):
        raise DimensionError("state does not match the cutoff")
    mask = np.ones(cutoff + 1, dtype=bool)
    mask[[1, 3]] = False
    if np.sum(np.abs(psi[mask]) ** 2) > tol * np.sum(np.abs(psi) ** 2):
        raise ValueError("state has support outside the odd error subspace {|1>, |3>}")
    out = binomial_recovery_unitary(cutoff) @ psi
    return out / np.linalg.norm(out)


def fidelity(a, b) -> float:
    """``|<a|b>|^2`` for (not necessarily normalized) pure states."""
    return _fidelity(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def qec_report(trials: int = 100, epsilon: Optional[float] = None, cutoff: int = 4, seed: int = 0) -> dict:
    """Summary used by the CLI: WWM statistics plus KL residuals for both codes."""
    eps, runs = wwm_trials(trials, epsilon, cutoff, seed)
    modes = IPQModes.build(cutoff)
    x = dipole_error(modes)
    kl_bin = kl_matrix(binomial_code(max(cutoff, 4)), binomial_errors(max(cutoff, 4)))
    kl_ipq = kl_matrix(ipq_code(modes), ipq_errors(modes))
    f0 = np.array([r.fidelity0 for r in runs])
    f1 = np.array([r.fidelity1 for r in runs])
    psum = np.array([r.probability0 + r.probability1 for r in runs])
    return {
        "epsilon": eps,
        "cutoff": cutoff,
        "trials": trials,
        "seed": seed,
        "code_epsilon_threshold": code_epsilon_threshold(x, ipq_code(modes)),
        "spectral_epsilon_threshold": spectral_epsilon_threshold(x, ipq_code(modes)),
        "outcome0_fidelity_min": float(f0.min()),
        "outcome1_fidelity_mean": float(f1.mean()),
        "outcome1_fidelity_min": float(f1.min()),
        "probability0_mean": float(np.mean([r.probability0 for r in runs])),
        "probability_sum_error": float(np.max(np.abs(psum - 1))),
        "unitarity_defect": float(max(r.unitarity_defect for r in runs)),
        "syndromes_before": sorted({r.syndrome_before for r in runs}),
        "syndromes_after": sorted({r.syndrome_after for r in runs}),
        "kl_binomial": {"satisfied": kl_bin.satisfied, "residual": kl_bin.residual},
        "kl_ipq": {"satisfied": kl_ipq.satisfied, "residual": kl_ipq.residual},
    }
