"""Energy beamforming under per-transmitter power limits.

Solves ``max Tr(A S)  s.t.  S >= 0, S_kk <= p_max`` with ``A = sum_k mu_k h_k^H h_k``.
Its dual is ``min p_max * sum(lam)  s.t.  Diag(lam) - A >= 0``.

For two transmitters the optimum is a single beam in closed form.  For more
transmitters there are two routes which certify each other:

* :func:`weighted_energy_beamforming` - dual ellipsoid with minimum-eigenvalue cuts,
  null-space primal recovery, then local ascent (one instance at a time).
* :func:`batch_energy_beamforming` - block-coordinate ascent on a factor ``S = V V^H``
  over a whole stack of instances, each certified by a dual point built from KKT.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..model import RANK_TOL, EnergyCovariance
from .ellipsoid import ellipsoid_minimize

log = logging.getLogger(__name__)


@dataclass
class SdpSolution:
    s_e: EnergyCovariance
    dual: np.ndarray
    primal_value: float
    dual_value: float

    @property
    def gap(self) -> float:
        """Relative duality gap."""
        return (self.dual_value - self.primal_value) / max(abs(self.dual_value), 1e-300)


class SdpConvergenceError(RuntimeError):
    def __init__(self, message, solution: SdpSolution):
        super().__init__(message)
        self.solution = solution


def weight_matrix(H, mu) -> np.ndarray:
    """``A = sum_k mu_k h_k^H h_k`` for channel rows ``h_k = H[..., k, :]``."""
    H = np.asarray(H, dtype=complex)
    mu = np.asarray(mu, dtype=float)
    return np.einsum("...k,...ki,...kj->...ij", np.broadcast_to(mu, H.shape[:-1]), H.conj(), H)


# --- two transmitters: closed form ----------------------------------------------------------


def _cross_term(H, w):
    # h~_1^H h~_2 = sum_k w_k conj(h_k1) h_k2
    return np.sum(w * H[..., :, 0].conj() * H[..., :, 1], axis=-1)


def two_user_ebf_batch(H, weights, p_max):
    """Closed-form optimum for a stack of 2x2 channels.

    Returns ``(S, value, alpha)`` with ``S = p_max [[1, alpha], [conj(alpha), 1]]``
    and ``value = p_max (||h~_1||^2 + ||h~_2||^2 + 2 |h~_1^H h~_2|)``.
    When the cross term vanishes any unit phase is optimal and ``alpha = 1``.
    """
    H = np.asarray(H, dtype=complex)
    w = np.broadcast_to(np.asarray(weights, dtype=float), H.shape[:-1])
    c = _cross_term(H, w)
    mag = np.abs(c)
    alpha = np.where(mag > 0, c / np.where(mag > 0, mag, 1.0), 1.0 + 0j)
    S = np.empty(H.shape[:-2] + (2, 2), dtype=complex)
    S[..., 0, 0] = p_max
    S[..., 1, 1] = p_max
    S[..., 0, 1] = p_max * alpha
    S[..., 1, 0] = p_max * alpha.conj()
    norms = np.sum(w[..., :, None] * np.abs(H) ** 2, axis=-2)
    value = p_max * (norms[..., 0] + norms[..., 1] + 2 * mag)
    return S, value, alpha


def closed_form_two_user_ebf(h_rows, mu, p_max) -> EnergyCovariance:
    """Optimal single energy beam for two transmitters, ``S = p_max v v^H`` with ``v = [1, 1/alpha]``."""
    H = np.asarray(h_rows, dtype=complex)
    if H.shape != (2, 2):
        raise ValueError("closed form needs exactly two channel rows of length 2")
    S, _, _ = two_user_ebf_batch(H, mu, p_max)
    return EnergyCovariance(S, check=False)


def closed_form_dual(h_rows, mu):
    """Closed-form dual optimum ``lam_k = ||h~_k||^2 + |h~_1^H h~_2|`` of the two-transmitter problem."""
    H = np.asarray(h_rows, dtype=complex)
    w = np.broadcast_to(np.asarray(mu, dtype=float), H.shape[:-1])
    c = np.abs(_cross_term(H, w))
    norms = np.sum(w[..., :, None] * np.abs(H) ** 2, axis=-2)
    return norms + c[..., None]


# --- dual certificates ------------------------------------------------------------------------


def dual_certificate(A, S, p_max):
    """Feasible dual point from a primal ``S`` with saturated diagonals.

    Complementary slackness suggests ``lam_i = Re(A S)_ii / S_ii``; the vector is then
    shifted up by the most negative eigenvalue of ``Diag(lam) - A`` so it is dual
    feasible.  Returns ``(lam, dual_value)``; works on stacks.
    """
    A = np.asarray(A)
    K = A.shape[-1]
    AS = np.einsum("...ij,...ji->...i", A, S).real
    diag = np.maximum(np.diagonal(S, axis1=-2, axis2=-1).real, 1e-300)
    lam = AS / diag
    M = lam[..., :, None] * np.eye(K) - A
    shift = np.maximum(0.0, -np.linalg.eigvalsh(M)[..., 0])
    lam = lam + shift[..., None]
    return lam, p_max * lam.sum(axis=-1)


def solve_sdp_dual(A, p_max, tol=None, rel_tol=1e-12, max_iter=None):
    """Ellipsoid method on the dual with minimum-eigenvalue cuts.

    Returns ``(lam, status)``; ``lam`` is dual feasible to within eigensolver accuracy.
    """
    A = np.asarray(A, dtype=complex)
    K = A.shape[0]
    scale = np.abs(A).sum(axis=1).max()
    if scale == 0:
        return np.zeros(K), None
    upper = 1.05 * np.abs(A).sum(axis=1).max() * np.ones(K)

    def objective(lam):
        return p_max * lam.sum(), p_max * np.ones(K)

    def psd_cut(lam):
        w, U = np.linalg.eigh(np.diag(lam) - A)
        # c(lam) = -lambda_min(Diag(lam) - A) <= 0, subgradient -|x_i|^2
        return -w[0], -np.abs(U[:, 0]) ** 2

    lam, status = ellipsoid_minimize(objective, np.zeros(K), upper, tol=tol or 0.0, rel_tol=rel_tol, max_iter=max_iter, constraint=psd_cut)
    return lam, status


def _recover_primal(A, lam, p_max, null_tol=1e-6):
    """Primal ``S`` supported on the (numerical) null space of ``Diag(lam) - A``."""
    K = A.shape[0]
    w, U = np.linalg.eigh(np.diag(lam) - A)
    ref = max(abs(w[-1]), np.abs(A).max(), 1e-300)
    r = max(1, int(np.sum(w <= null_tol * ref)))
    V = U[:, :r]
    if r == 1:
        v = V[:, 0]
        mag = np.abs(v)
        phase = np.where(mag > 1e-12, v / np.where(mag > 1e-12, mag, 1.0), 1.0)
        return p_max * np.outer(phase, phase.conj())
    # Hermitian M (r x r) with diag(V M V^H) = p_max; linear least squares in M's entries
    basis = []
    for i in range(r):
        for j in range(i, r):
            E = np.zeros((r, r), dtype=complex)
            E[i, j] = E[j, i] = 1.0
            basis.append(E)
            if i != j:
                E = np.zeros((r, r), dtype=complex)
                E[i, j], E[j, i] = 1j, -1j
                basis.append(E)
    cols = [np.einsum("ki,ij,kj->k", V, E, V.conj()).real for E in basis]
    coef, *_ = np.linalg.lstsq(np.stack(cols, axis=1), np.full(K, p_max), rcond=None)
    M = sum(c * E for c, E in zip(coef, basis))
    wm, Um = np.linalg.eigh(M)
    M = (Um * np.maximum(wm, 0)) @ Um.conj().T
    S = V @ M @ V.conj().T
    d = np.diag(S).real
    if np.any(d <= 0):
        return p_max * np.eye(K, dtype=complex)
    scale = np.sqrt(p_max / d)
    return scale[:, None] * S * scale[None, :]


def _factor(S, r=None):
    """``L`` with ``L L^H = S``; eigenvalues below ``RANK_TOL`` times the largest are dropped."""
    w, U = np.linalg.eigh(S)
    w, U = w[..., ::-1], U[..., ::-1]
    if r is not None:
        w, U = w[..., :r], U[..., :r]
    w = np.where(w > RANK_TOL * np.maximum(w[..., :1], 0), w, 0.0)
    return U * np.sqrt(w)[..., None, :]


def _normalize_rows(V, p_max):
    K, r = V.shape[-2:]
    nrm = np.linalg.norm(V, axis=-1, keepdims=True)
    fallback = np.eye(K, r, dtype=complex)
    fallback[r:, 0] = 1.0
    fallback = np.broadcast_to(fallback, V.shape)
    return np.where(nrm > 0, np.sqrt(p_max) * V / np.where(nrm > 0, nrm, 1.0), np.sqrt(p_max) * fallback)


def _coordinate_sweep(A, V, p_max):
    """One pass of exact row updates: each row becomes the normalized gradient direction."""
    K = A.shape[-1]
    for i in range(K):
        g = np.einsum("nj,njr->nr", A[:, i, :], V) - A[:, i, i][:, None] * V[:, i, :]
        nrm = np.linalg.norm(g, axis=-1, keepdims=True)
        V[:, i, :] = np.where(nrm > 0, np.sqrt(p_max) * g / np.where(nrm > 0, nrm, 1.0), V[:, i, :])
    return V


def batch_energy_beamforming(A, p_max, V0=None, gap_tol=1e-7, max_sweeps=2000, check_every=5, rank=None):
    """Solve a stack of energy-beamforming SDPs by block-coordinate ascent.

    Parameters
    ----------
    A : ndarray, shape (N, K, K)
        Hermitian PSD weight matrices.
    V0 : ndarray, shape (N, K, r), optional
        Warm start factor; defaults to the scaled top eigenvectors of ``A``.
    gap_tol : float
        Per-instance target for the certified relative duality gap.
    rank : int, optional
        Number of columns of the factor (``1`` restricts to a single beam).

    Returns
    -------
    S, V, primal, dual : ndarrays
        Covariances, factors, objective values and certified dual bounds.
    """
    A = np.asarray(A, dtype=complex)
    N, K, _ = A.shape
    r = K if rank is None else rank
    V = _normalize_rows(_factor(A, r) if V0 is None else np.array(V0, dtype=complex), p_max)
    active = np.arange(N)
    for it in range(max_sweeps):
        if active.size == 0:
            break
        Va = _coordinate_sweep(A[active], V[active], p_max)
        V[active] = Va
        if it % check_every == check_every - 1:
            Sa = Va @ np.swapaxes(Va.conj(), -1, -2)
            primal = np.einsum("nij,nji->n", A[active], Sa).real
            _, dual = dual_certificate(A[active], Sa, p_max)
            active = active[dual - primal > gap_tol * np.maximum(dual, 1e-300)]
    S = V @ np.swapaxes(V.conj(), -1, -2)
    primal = np.einsum("nij,nji->n", A, S).real
    _, dual = dual_certificate(A, S, p_max)
    return S, V, primal, np.maximum(dual, primal)


def weighted_energy_beamforming(h_rows, mu, p_max, tol=1e-6, max_iter=None) -> SdpSolution:
    """Maximize ``sum_k mu_k h_k S h_k^H`` subject to ``S >= 0`` and ``S_kk <= p_max``.

    Two transmitters use the closed form.  Otherwise the dual is solved by the ellipsoid
    method, a primal point is recovered from the null space of ``Diag(lam) - A`` and
    refined by coordinate ascent until the relative gap is at most ``tol``.

    Raises
    ------
    SdpConvergenceError
        If the certified gap is still above ``tol``; carries the best pair found.
    """
    H = np.asarray(h_rows, dtype=complex)
    mu = np.asarray(mu, dtype=float)
    if H.ndim != 2 or H.shape[0] < 2 or H.shape[0] != mu.size:
        raise ValueError("need K >= 2 channel rows and one weight per row")
    if np.any(mu < 0) or not np.any(mu > 0):
        raise ValueError("weights must be non-negative and not all zero")
    A = weight_matrix(H, mu)
    K = A.shape[0]
    if K == 2 and H.shape[1] == 2:
        S = closed_form_two_user_ebf(H, mu, p_max)
        lam = closed_form_dual(H, mu)
        primal = float(np.real(np.trace(A @ S.matrix)))
        return SdpSolution(S, lam, primal, float(p_max * lam.sum()))

    off = A - np.diag(np.diag(A))
    if np.max(np.abs(off)) <= 1e-15 * np.abs(A).max():
        lam = np.diag(A).real.copy()
        S = p_max * np.eye(K, dtype=complex)
        return SdpSolution(EnergyCovariance(S, check=False), lam, float(p_max * lam.sum()), float(p_max * lam.sum()))

    lam_ell, _ = solve_sdp_dual(A, p_max, rel_tol=1e-10, max_iter=max_iter)
    lam_ell = lam_ell + max(0.0, -np.linalg.eigvalsh(np.diag(lam_ell) - A)[0])
    S0 = _recover_primal(A, lam_ell, p_max)
    S, _, primal, dual = batch_energy_beamforming(A[None], p_max, V0=_factor(S0)[None], gap_tol=0.1 * tol)
    S, primal = S[0], float(primal[0])
    lam_kkt, _ = dual_certificate(A, S, p_max)
    if p_max * lam_kkt.sum() <= p_max * lam_ell.sum():
        lam = lam_kkt
    else:
        lam = lam_ell
    sol = SdpSolution(EnergyCovariance(S, check=False), lam, primal, float(p_max * lam.sum()))
    if sol.gap > tol:
        raise SdpConvergenceError(f"relative duality gap {sol.gap:.3g} exceeds {tol:g}", sol)
    return sol


# --- single-beam randomization ------------------------------------------------------------------


def _draws(K, n_draws, seed):
    rng = np.random.default_rng(seed)
    return (rng.standard_normal((K, n_draws)) + 1j * rng.standard_normal((K, n_draws))) / np.sqrt(2.0)


def randomize_rank_one_batch(S, A, p_max, n_draws=1000, seed=0):
    """Best single beam from Gaussian draws with covariance ``S`` for each instance.

    Each draw ``xi ~ CN(0, S)`` is scaled so its largest entry has power ``p_max``; the
    dominant eigenvector of ``S`` is always among the candidates.  Returns ``(v, value)``
    with ``v`` of shape (N, K).
    """
    S = np.asarray(S, dtype=complex)
    A = np.asarray(A, dtype=complex)
    K = S.shape[-1]
    L = _factor(S)
    xi = np.concatenate([L[..., :, :1], L @ _draws(K, n_draws, seed)], axis=-1)  # (N, K, 1 + n)
    peak = np.abs(xi).max(axis=-2, keepdims=True)
    v = np.where(peak > 0, np.sqrt(p_max) * xi / np.where(peak > 0, peak, 1.0), 0.0)
    values = np.einsum("nkd,nkj,njd->nd", v.conj(), A, v).real
    best = np.argmax(values, axis=-1)
    idx = np.arange(S.shape[0])
    return v[idx, :, best], values[idx, best]


def randomize_rank_one(s_opt, A, p_max, n_draws=1000, seed=0) -> EnergyCovariance:
    """Single-beam covariance extracted from a (possibly higher-rank) optimum ``s_opt``."""
    S = s_opt.matrix if isinstance(s_opt, EnergyCovariance) else np.asarray(s_opt, dtype=complex)
    v, _ = randomize_rank_one_batch(S[None], np.asarray(A)[None], p_max, n_draws, seed)
    return EnergyCovariance.from_beam(v[0])


def covariance_rank(S, rank_tol=RANK_TOL) -> int:
    return EnergyCovariance(S, check=False).rank(rank_tol)
