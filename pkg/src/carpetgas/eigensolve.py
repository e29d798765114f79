"""Full and partial eigensolvers for sparse symmetric matrices.

Dense path: LAPACK symmetric eigensolver with post-hoc verification
(residual spot checks on small orders, trace + Sylvester-inertia
cross-checks on large ones).  Partial path: recursive bisection on inertia
counts with shift-invert Lanczos per slice, each slice verified against the
inertia difference.  Extremal path: hand-rolled Lanczos with full
reorthogonalization and subspace-doubling restarts.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CapExceededError, ConvergenceError
from .ldlt import LDLTFactorizer, inertia_count

DENSE_CAP = 10_000
# Downstream log-periodic extraction is sensitive to spectral noise; keep
# these in one place.
EIG_RTOL = 1e-10
RESIDUAL_RTOL = 1e-8


@dataclass
class Spectrum:
    """Sorted eigenvalues plus the provenance needed to cache and rescale."""

    eigenvalues: np.ndarray
    bc: str = "neumann"
    level: int = 0
    spec_hash: str = ""
    complete: bool = True
    method: str = "dense"
    interval: tuple[float, float] | None = None
    zero_tol: float = 1e-8

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=np.float64)
        if ev.ndim != 1:
            raise ValueError("eigenvalues must be a 1-d array")
        if np.any(np.diff(ev) < 0):
            ev = np.sort(ev)
        self.eigenvalues = ev

    @property
    def n(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def lambda_max(self) -> float:
        if self.n == 0:
            raise ValueError("empty spectrum")
        return float(self.eigenvalues[-1])

    @property
    def lambda1(self) -> float:
        """First eigenvalue above the zero threshold."""
        ev = self.eigenvalues
        above = ev[ev > self.zero_tol]
        if above.size == 0:
            raise ValueError("no nonzero eigenvalue in spectrum")
        return float(above[0])

    @property
    def num_zero_modes(self) -> int:
        return int(np.count_nonzero(self.eigenvalues <= self.zero_tol))

    def rescaled(self, factor: float) -> "Spectrum":
        """Spectrum with every eigenvalue multiplied by ``factor``."""
        return replace(self, eigenvalues=self.eigenvalues * factor)


def gershgorin_interval(matrix: sp.spmatrix) -> tuple[float, float]:
    """Closed interval containing all eigenvalues (Gershgorin discs)."""
    A = sp.csr_matrix(matrix)
    d = A.diagonal()
    radii = np.asarray(np.abs(A).sum(axis=1)).ravel() - np.abs(d)
    return float(np.min(d - radii)), float(np.max(d + radii))


def _residual_spot_check(dense: np.ndarray, w: np.ndarray) -> None:
    # Re-solve a few eigenpairs with vectors and verify both the true
    # residual and agreement with the vector-free solve.
    n = dense.shape[0]
    norm = max(np.max(np.abs(dense)), 1.0) * n
    blocks = [(0, min(2, n - 1))]
    if n > 3:
        blocks.append((n - 2, n - 1))
    if n > 8:
        mid = n // 2
        blocks.append((mid, mid + 1))
    for lo, hi in blocks:
        vals, vecs = scipy.linalg.eigh(dense, subset_by_index=(lo, hi))
        for j, idx in enumerate(range(lo, hi + 1)):
            v = vecs[:, j]
            res = np.linalg.norm(dense @ v - vals[j] * v)
            if res > RESIDUAL_RTOL * norm:
                raise ConvergenceError(
                    f"eigenpair residual {res:.3e} at index {idx} exceeds "
                    f"{RESIDUAL_RTOL:.1e}*scale"
                )
            if abs(vals[j] - w[idx]) > EIG_RTOL * norm:
                raise ConvergenceError(
                    f"eigenvalue mismatch at index {idx}: {vals[j]!r} vs {w[idx]!r}"
                )


def _inertia_spot_check(matrix: sp.spmatrix, w: np.ndarray) -> None:
    # Generic shifts at the widest gaps; the strict-below count there must
    # match the index exactly.
    gaps = np.diff(w)
    order = np.argsort(gaps)[::-1]
    fac = LDLTFactorizer(sp.csr_matrix(matrix))
    checked = 0
    for idx in order:
        if gaps[idx] <= 1e-8:
            break
        sigma = 0.5 * (w[idx] + w[idx + 1])
        if fac.inertia(sigma) != idx + 1:
            raise ConvergenceError(
                f"inertia cross-check failed at sigma={sigma!r}"
            )
        checked += 1
        if checked >= 3:
            break
    if checked == 0:
        raise ConvergenceError("no spectral gap wide enough for inertia check")


def dense_eigenvalues(matrix: sp.spmatrix, cap: int = DENSE_CAP,
                      verify: bool = True) -> Spectrum:
    """All eigenvalues of a symmetric matrix, verified, as a Spectrum.

    Orders above ``cap`` are refused (cubic cost); use slice_spectrum.
    """
    n = matrix.shape[0]
    if n != matrix.shape[1]:
        raise ValueError("matrix must be square")
    if n > cap:
        raise CapExceededError(f"order {n} exceeds dense cap {cap}")
    dense = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, float)
    w = np.linalg.eigvalsh(dense)
    if verify:
        tr = float(np.trace(dense))
        s = float(np.sum(w))
        if abs(s - tr) > RESIDUAL_RTOL * max(abs(tr), 1.0):
            raise ConvergenceError(f"trace identity violated: {s!r} vs {tr!r}")
        if n <= 2000:
            _residual_spot_check(dense, w)
        elif n > 2:
            _inertia_spot_check(matrix if sp.issparse(matrix) else sp.csr_matrix(dense), w)
    return Spectrum(eigenvalues=w, method="dense")


def counting_function(spectrum: Spectrum, s: float,
                      normalized: bool = False) -> int:
    """N(s): number of eigenvalues strictly below s (or below s*lambda1)."""
    if spectrum.n == 0:
        raise ValueError("empty spectrum")
    thresh = s * spectrum.lambda1 if normalized else s
    return int(np.searchsorted(spectrum.eigenvalues, thresh, side="left"))


def _solve_slice(matrix, fac, lo, hi, count, rng):
    """Eigenvalues of ``matrix`` in [lo, hi), known to number ``count``."""
    n = matrix.shape[0]
    if n <= 128 or count > n - 3:
        w = np.linalg.eigvalsh(matrix.toarray())
        return w[(w >= lo) & (w < hi)]
    center = 0.5 * (lo + hi)
    buffer = min(8, n - 2 - count)
    k = count + max(buffer, 0)
    for attempt in range(3):
        try:
            vals = spla.eigsh(matrix, k=k, sigma=center, which="LM",
                              return_eigenvectors=False,
                              v0=rng.standard_normal(n))
        except RuntimeError:
            # singular shift: nudge off the eigenvalue
            center += (1e-8 + attempt * 1e-6) * max(1.0, abs(center))
            continue
        inside = np.sort(vals[(vals >= lo) & (vals < hi)])
        if inside.size == count:
            return inside
        # buffer too small to see the whole slice; widen once
        if k < n - 2:
            k = min(n - 2, k + count + 8)
            continue
        break
    return None


def slice_spectrum(matrix: sp.spmatrix, interval: tuple[float, float],
                   budget: int = 200, max_slice: int = 64,
                   seed: int = 1234) -> Spectrum:
    """All eigenvalues in [a, b) by inertia bisection + shift-invert slices.

    Each slice's eigenvalue count is verified against the inertia
    difference; on mismatch the slice is bisected further.  When ``budget``
    (number of slice solves + bisection refinements) runs out, the result
    carries what was resolved and is flagged incomplete.
    """
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError("need a < b")
    A = sp.csr_matrix(matrix)
    n = A.shape[0]
    fac = LDLTFactorizer(A)
    rng = np.random.default_rng(seed)
    scale = max(abs(a), abs(b), 1.0)
    width_floor = 1e-12 * scale

    c_a, c_b = fac.inertia(a), fac.inertia(b)
    work = [(a, b, c_a, c_b)]
    found: list[np.ndarray] = []
    spent = 0
    complete = True
    while work:
        lo, hi, clo, chi = work.pop()
        count = chi - clo
        if count == 0:
            continue
        if spent >= budget:
            complete = False
            continue
        if hi - lo <= width_floor:
            # numerically a single (multiple) eigenvalue
            found.append(np.full(count, 0.5 * (lo + hi)))
            continue
        if count <= max_slice:
            spent += 1
            got = _solve_slice(A, fac, lo, hi, count, rng)
            if got is not None:
                found.append(got)
                continue
        # bisect
        spent += 1
        mid = 0.5 * (lo + hi)
        cmid = fac.inertia(mid)
        work.append((lo, mid, clo, cmid))
        work.append((mid, hi, cmid, chi))

    ev = np.sort(np.concatenate(found)) if found else np.zeros(0)
    return Spectrum(eigenvalues=ev, method="sliced", complete=complete,
                    interval=(a, b))


def _lanczos_tridiag(matvec, n, m, rng, breakdown_tol):
    """m-step Lanczos with full reorthogonalization.

    Returns (alpha, offdiag, b_last, used): tridiagonal entries, the norm of
    the residual vector after the last step (0.0 on invariant-subspace
    breakdown), and the number of steps taken.
    """
    Q = np.zeros((m, n))
    alpha = np.zeros(m)
    offdiag = np.zeros(m - 1 if m > 1 else 0)
    q = rng.standard_normal(n)
    q /= np.linalg.norm(q)
    b_last = 0.0
    used = 0
    for j in range(m):
        Q[j] = q
        used = j + 1
        w = matvec(q)
        alpha[j] = q @ w
        w = w - alpha[j] * q
        if j > 0:
            w = w - offdiag[j - 1] * Q[j - 1]
        for _ in range(2):
            w -= Q[:used].T @ (Q[:used] @ w)
        b = float(np.linalg.norm(w))
        b_last = b
        if b < breakdown_tol:
            b_last = 0.0
            break
        if j < m - 1:
            offdiag[j] = b
            q = w / b
    return alpha[:used], offdiag[: used - 1], b_last, used


def lanczos_extremal(matrix: sp.spmatrix, k: int, which: str = "smallest",
                     tol: float = 1e-10, seed: int = 99) -> np.ndarray:
    """k extremal eigenvalues via Lanczos with full reorthogonalization.

    Restarts with a doubled subspace on stagnation or on a missed
    multiplicity (detected by an inertia count), then falls back to a dense
    solve when the matrix order permits.
    """
    if which not in ("smallest", "largest"):
        raise ValueError("which must be 'smallest' or 'largest'")
    A = sp.csr_matrix(matrix) if sp.issparse(matrix) else sp.csr_matrix(
        np.asarray(matrix, dtype=np.float64))
    n = A.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}")
    if n <= 64 or k >= n - 1:
        w = np.linalg.eigvalsh(A.toarray())
        return w[:k] if which == "smallest" else w[::-1][:k].copy()
    lo_g, hi_g = gershgorin_interval(A)
    scale = max(abs(lo_g), abs(hi_g), 1.0)
    rng = np.random.default_rng(seed)
    fac = None
    m = min(n, max(2 * k + 20, 40))
    m_cap = min(n, 1024)
    while True:
        alpha, offdiag, b_last, used = _lanczos_tridiag(
            lambda v: A @ v, n, m, rng, 1e-13 * scale)
        theta, S = scipy.linalg.eigh_tridiagonal(alpha, offdiag)
        converged = False
        if used >= k:
            if which == "smallest":
                idx = np.arange(k)
                vals = theta[:k]
            else:
                idx = np.arange(used - 1, used - 1 - k, -1)
                vals = theta[::-1][:k]
            res = np.abs(b_last * S[-1, idx])
            converged = bool(np.all(res <= tol * scale))
        if converged:
            # Guard against silently dropped copies of a degenerate
            # eigenvalue: the strict count at a generic cut just outside the
            # returned set must equal k.
            if which == "smallest":
                gap = theta[k] - theta[k - 1] if used > k else tol * scale * 10
                sigma = theta[k - 1] + 0.5 * gap
                expect = k
            else:
                gap = theta[used - k] - theta[used - k - 1] if used > k else tol * scale * 10
                sigma = theta[used - k] - 0.5 * gap
                expect = n - k
            if gap <= 10 * tol * scale:
                return np.sort(vals) if which == "smallest" else np.sort(vals)[::-1]
            if fac is None:
                fac = LDLTFactorizer(A)
            if fac.inertia(sigma) == expect:
                return np.sort(vals) if which == "smallest" else np.sort(vals)[::-1]
        if m >= m_cap:
            if n <= DENSE_CAP:
                w = np.linalg.eigvalsh(A.toarray())
                return w[:k] if which == "smallest" else w[::-1][:k].copy()
            raise ConvergenceError(
                f"lanczos_extremal stagnated at subspace {m} (k={k}, n={n})"
            )
        m = min(m_cap, 2 * m)


def compute_spectrum(graph, bc: str = "neumann", method: str = "auto",
                     cap: int = DENSE_CAP, budget: int = 400) -> Spectrum:
    """Spectrum of the level-graph Laplacian with provenance attached."""
    from .graph import laplacian

    L = laplacian(graph, bc)
    n = L.shape[0]
    if method == "auto":
        method = "dense" if n <= cap else "sliced"
    if method == "dense":
        spec = dense_eigenvalues(L, cap=cap)
    elif method == "sliced":
        lo, hi = gershgorin_interval(L)
        spec = slice_spectrum(L, (min(lo, 0.0) - 1e-9, hi + 1.0), budget=budget)
    else:
        raise ValueError(f"unknown method {method!r}")
    spec.bc = bc
    spec.level = graph.level
    spec.spec_hash = graph.spec.spec_hash()
    return spec


def save_spectrum(spectrum: Spectrum, path: str) -> None:
    """JSON cache file: header + eigenvalue list (shortest round-trip reprs)."""
    header = {
        "spec_hash": spectrum.spec_hash,
        "level": spectrum.level,
        "bc": spectrum.bc,
        "method": spectrum.method,
        "complete": spectrum.complete,
        "interval": list(spectrum.interval) if spectrum.interval else None,
        "n": spectrum.n,
    }
    payload = {"header": header, "eigenvalues": [float(x) for x in spectrum.eigenvalues]}
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh)
    os.replace(tmp, path)


def load_spectrum(path: str) -> Spectrum:
    with open(path) as fh:
        payload = json.load(fh)
    h = payload["header"]
    return Spectrum(
        eigenvalues=np.asarray(payload["eigenvalues"], dtype=np.float64),
        bc=h.get("bc", "neumann"),
        level=int(h.get("level", 0)),
        spec_hash=h.get("spec_hash", ""),
        complete=bool(h.get("complete", True)),
        method=h.get("method", "dense"),
        interval=tuple(h["interval"]) if h.get("interval") else None,
    )
