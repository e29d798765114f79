"""Sparse LDL^T factorization and Sylvester inertia counts.

Up-looking factorization over the elimination tree (no pivoting, 1x1 pivots
only), on a fill-reducing symmetric permutation.  A shift sigma landing on an
eigenvalue of a leading principal submatrix produces a (near-)zero pivot.
Near-zero pivots are substituted by +-pivot_floor so the kernel stays finite,
but a substituted factorization is not trusted for inertia counts (cascaded
substitutions are not backward stable); ``inertia`` retries with the shift
moved slightly below sigma, escalating the step until the factorization is
clean.  Moving down preserves the strict #{lambda < sigma} count when sigma
sits exactly on an eigenvalue, the common case for integer spectra.

The numeric kernel is JIT-compiled when numba is importable and falls back
to the same pure-Python code otherwise.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .errors import FactorizationError

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba present in normal installs
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


@njit(cache=True)
def _symbolic(n, Ap, Ai, parent, lnz, flag):
    for j in range(n):
        parent[j] = -1
        flag[j] = j
        lnz[j] = 0
    for j in range(n):
        for p in range(Ap[j], Ap[j + 1]):
            i = Ai[p]
            while i < j and flag[i] != j:
                if parent[i] == -1:
                    parent[i] = j
                lnz[i] += 1
                flag[i] = j
                i = parent[i]


@njit(cache=True)
def _numeric(n, Ap, Ai, Ax, parent, Lp, lcount, Li, Lx, D, Y, pattern, flag, pivot_floor):
    subs = 0
    for i in range(n):
        Y[i] = 0.0
        flag[i] = -1
    for k in range(n):
        top = n
        flag[k] = k
        for p in range(Ap[k], Ap[k + 1]):
            i = Ai[p]
            if i > k:
                continue
            Y[i] += Ax[p]
            plen = 0
            while flag[i] != k:
                pattern[plen] = i
                plen += 1
                flag[i] = k
                i = parent[i]
            while plen > 0:
                plen -= 1
                top -= 1
                pattern[top] = pattern[plen]
        D[k] = Y[k]
        Y[k] = 0.0
        for t in range(top, n):
            i = pattern[t]
            yi = Y[i]
            Y[i] = 0.0
            p2 = Lp[i] + lcount[i]
            for p in range(Lp[i], p2):
                Y[Li[p]] -= Lx[p] * yi
            lki = yi / D[i]
            D[k] -= lki * yi
            Li[p2] = k
            Lx[p2] = lki
            lcount[i] += 1
        if abs(D[k]) <= pivot_floor:
            # Substitute a tiny pivot (Sturm-count style); shifts eigenvalues
            # of the factored matrix by at most pivot_floor.
            D[k] = -pivot_floor if D[k] <= 0.0 else pivot_floor
            subs += 1
    return subs


class LDLTFactorizer:
    """Reusable factorization context for one sparse symmetric matrix.

    The permutation (reverse Cuthill-McKee) and the symbolic analysis are
    computed once; ``inertia(sigma)`` refactors A - sigma*I numerically.
    """

    def __init__(self, matrix: sp.spmatrix, pivot_floor: float = 1e-20):
        A = sp.csr_matrix(matrix)
        if A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square")
        self.n = A.shape[0]
        perm = reverse_cuthill_mckee(A, symmetric_mode=True)
        Aperm = A[perm][:, perm]
        upper = sp.triu(Aperm, format="csc")
        upper.sort_indices()
        self._Ap = upper.indptr.astype(np.int64)
        self._Ai = upper.indices.astype(np.int64)
        self._Ax = upper.data.astype(np.float64)
        self._scale = float(np.max(np.abs(self._Ax))) if self._Ax.size else 1.0
        self._pivot_floor = pivot_floor
        # Positions of the diagonal inside the CSC arrays (diagonal must exist
        # in the pattern for shifted factorizations; add explicit zeros).
        diag_missing = [
            j
            for j in range(self.n)
            if not (
                self._Ap[j] < self._Ap[j + 1] and self._Ai[self._Ap[j + 1] - 1] == j
            )
        ]
        if diag_missing:
            upper = (upper + sp.diags(np.zeros(self.n))).tocsc()
            upper.sort_indices()
            upper.eliminate_zeros = lambda: None  # keep explicit zeros
            self._Ap = upper.indptr.astype(np.int64)
            self._Ai = upper.indices.astype(np.int64)
            self._Ax = upper.data.astype(np.float64)
        self._diag_pos = np.array(
            [self._Ap[j + 1] - 1 for j in range(self.n)], dtype=np.int64
        )
        if not np.all(self._Ai[self._diag_pos] == np.arange(self.n)):
            raise FactorizationError("diagonal entries missing from pattern")

        self._parent = np.empty(self.n, dtype=np.int64)
        self._lnz = np.empty(self.n, dtype=np.int64)
        flag = np.empty(self.n, dtype=np.int64)
        _symbolic(self.n, self._Ap, self._Ai, self._parent, self._lnz, flag)
        self._Lp = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self._lnz, out=self._Lp[1:])
        nnz_l = int(self._Lp[-1])
        self._Li = np.empty(nnz_l, dtype=np.int64)
        self._Lx = np.empty(nnz_l, dtype=np.float64)
        self._D = np.empty(self.n, dtype=np.float64)
        self._Y = np.zeros(self.n, dtype=np.float64)
        self._pattern = np.empty(self.n, dtype=np.int64)
        self._flag = flag
        self.last_substitutions = 0

    def factor_diagonal(
        self, sigma: float, allow_substitution: bool = False
    ) -> np.ndarray:
        """D of the LDL^T factorization of A - sigma*I, or raise on breakdown.

        Near-zero pivots are substituted by +-floor (floor relative to the
        matrix scale); ``last_substitutions`` records how many.  Unless
        ``allow_substitution`` a substituted factorization raises, because
        its inertia is unreliable.
        """
        Ax = self._Ax.copy()
        Ax[self._diag_pos] -= sigma
        lcount = np.zeros(self.n, dtype=np.int64)
        floor = max(self._pivot_floor, 1e-300) * max(self._scale, abs(sigma), 1.0)
        self.last_substitutions = _numeric(
            self.n,
            self._Ap,
            self._Ai,
            Ax,
            self._parent,
            self._Lp,
            lcount,
            self._Li,
            self._Lx,
            self._D,
            self._Y,
            self._pattern,
            self._flag,
            floor,
        )
        if not np.all(np.isfinite(self._D)):
            raise FactorizationError(f"non-finite pivot cascade for sigma={sigma!r}")
        if self.last_substitutions and not allow_substitution:
            raise FactorizationError(
                f"{self.last_substitutions} near-zero pivots for sigma={sigma!r}"
            )
        return self._D

    def inertia(self, sigma: float, retries: int = 3) -> int:
        """Number of eigenvalues strictly below sigma (Sylvester's law).

        On factorization breakdown the shift is lowered by relative steps
        1e-12, 1e-9, 1e-6, ... (at most ``retries`` of them).  Lowering keeps
        the strict count exact when sigma lands on an eigenvalue; it can only
        miss eigenvalues inside (sigma - step, sigma), which generic shifts
        do not have.
        """
        scale = max(1.0, abs(sigma), self._scale)
        last = None
        for attempt in range(retries + 1):
            shift = 0.0 if attempt == 0 else 1e-12 * scale * 1000.0 ** (attempt - 1)
            try:
                d = self.factor_diagonal(sigma - shift)
                return int(np.count_nonzero(d < 0.0))
            except FactorizationError as exc:
                last = exc
        raise FactorizationError(
            f"LDL^T breakdown persisted after {retries} shifted retries: {last}"
        )


def inertia_count(matrix: sp.spmatrix, sigma: float) -> int:
    """One-shot count of eigenvalues of ``matrix`` strictly below ``sigma``."""
    return LDLTFactorizer(matrix).inertia(sigma)
