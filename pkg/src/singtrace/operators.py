"""Dense/diagonal/sparse complex operator core.

Everything downstream (ideal diagnostics, trace estimators, spectral-triple
models) works with the :class:`Operator` wrapper defined here.  An operator
stores its matrix in one of three backends:

* ``diag``   -- 1-d array of diagonal entries (fast path, scales to 1e6),
* ``dense``  -- 2-d complex ndarray,
* ``sparse`` -- scipy CSR (used by the truncated triple realizations).

All three behave identically under the algebraic operations; the backend is
an optimisation detail, never a semantic one.  Spectra are computed with
LAPACK, after an exact permutation split of the matrix into connected
components of its nonzero pattern (a similarity transform, so eigenvalues
are preserved exactly).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

__all__ = [
    "Operator",
    "Spectrum",
    "SingularSequence",
    "OperatorError",
    "FactorizationError",
    "ContractViolation",
    "DomainError",
    "eigenvalues",
    "singular_values",
    "spectral_projection",
    "counting_function",
    "hermitian_calculus",
    "phase_modulus",
    "commutator",
    "anticommutator",
    "trace",
    "canonical_order",
    "identity",
    "zeros",
    "save_operator",
    "load_operator",
    "operator_to_csv",
    "operator_from_csv",
]

HERMITIAN_RTOL = 1e-12
# below this dimension a pattern split costs more than it saves
_SPLIT_MIN_DIM = 64


class OperatorError(Exception):
    """Base class for operator-level failures."""


class FactorizationError(OperatorError):
    """An eigen/Schur factorization did not converge.

    Carries the operator label and a crude condition estimate so failed
    experiments are diagnosable from logs alone.
    """

    def __init__(self, label, condition_estimate, message=""):
        self.label = label
        self.condition_estimate = condition_estimate
        super().__init__(
            f"factorization failed for operator {label!r} "
            f"(condition estimate {condition_estimate:.3e}) {message}"
        )


class ContractViolation(OperatorError, ValueError):
    """An input violated a documented precondition (hermitian, psd, dims)."""


class DomainError(OperatorError, ValueError):
    """A scalar function was evaluated outside its domain."""


def canonical_order(values):
    """Sort eigenvalues by non-increasing modulus.

    Ties (exactly equal moduli) are broken by descending real part, then
    descending imaginary part, so the output is a deterministic total order.
    """
    values = np.asarray(values)
    order = np.lexsort((-values.imag, -values.real, -np.abs(values)))
    return values[order]


@dataclass(frozen=True)
class Spectrum:
    """All eigenvalues of an operator, in canonical order."""

    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", values)
        moduli = np.abs(values)
        if moduli.size and np.any(moduli[:-1] < moduli[1:] - 1e-30):
            raise ValueError("spectrum not ordered by non-increasing modulus")

    def __len__(self):
        return self.values.size

    @property
    def moduli(self):
        return np.abs(self.values)


@dataclass(frozen=True)
class SingularSequence:
    """Non-increasing sequence of singular values mu(k)."""

    mu: np.ndarray
    label: str = ""

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        object.__setattr__(self, "mu", mu)
        if mu.size:
            if mu.min() < -1e-13 * (1.0 + mu.max()):
                raise ValueError("negative singular value")
            if np.any(mu[:-1] < mu[1:] - 1e-13 * (1.0 + mu.max())):
                raise ValueError("singular values not non-increasing")

    def __len__(self):
        return self.mu.size


class Operator:
    """Immutable complex square operator with structural flags.

    Parameters
    ----------
    data : array_like or scipy sparse matrix
        1-d array (interpreted as a diagonal), 2-d square array, or sparse
        matrix.
    label : str
        Human-readable tag used in error messages and reports.
    hermitian, unitary : bool or None
        Structural flags.  ``None`` means auto-detect (hermitian detection is
        cheap; unitarity is never auto-detected).
    """

    __slots__ = ("_kind", "_data", "label", "hermitian", "unitary")

    def __init__(self, data, label="", hermitian=None, unitary=None):
        if sp.issparse(data):
            mat = data.tocsr().astype(complex)
            mat.eliminate_zeros()
            if mat.shape[0] != mat.shape[1]:
                raise ContractViolation(f"operator {label!r} is not square")
            diag = mat.diagonal()
            if mat.nnz == np.count_nonzero(diag):
                self._kind, self._data = "diag", diag
            else:
                self._kind, self._data = "sparse", mat
        else:
            arr = np.asarray(data)
            if arr.ndim == 1:
                self._kind, self._data = "diag", arr.astype(complex)
            elif arr.ndim == 2:
                if arr.shape[0] != arr.shape[1]:
                    raise ContractViolation(f"operator {label!r} is not square")
                arr = arr.astype(complex)
                if self._dense_is_diagonal(arr):
                    self._kind, self._data = "diag", np.diag(arr).copy()
                else:
                    self._kind, self._data = "dense", arr
            else:
                raise ContractViolation("operator data must be 1-d or 2-d")
        self.label = label
        if hermitian is None:
            hermitian = self._detect_hermitian()
        elif hermitian and not self._detect_hermitian():
            raise ContractViolation(
                f"operator {label!r} flagged hermitian but is not (to 1e-12 relative)"
            )
        self.hermitian = bool(hermitian)
        self.unitary = bool(unitary) if unitary is not None else False

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _dense_is_diagonal(arr):
        if arr.shape[0] > 1:
            off = arr.copy()
            np.fill_diagonal(off, 0.0)
            return not np.any(off)
        return True

    def _detect_hermitian(self):
        if self._kind == "diag":
            d = self._data
            scale = 1.0 + (np.abs(d).max() if d.size else 0.0)
            return bool(np.abs(d.imag).max(initial=0.0) <= HERMITIAN_RTOL * scale)
        if self._kind == "dense":
            a = self._data
            scale = 1.0 + (np.abs(a).max() if a.size else 0.0)
            return bool(np.abs(a - a.conj().T).max(initial=0.0) <= HERMITIAN_RTOL * scale)
        a = self._data
        gap = a - a.conj().T
        scale = 1.0 + (np.abs(a.data).max() if a.nnz else 0.0)
        top = np.abs(gap.data).max() if gap.nnz else 0.0
        return bool(top <= HERMITIAN_RTOL * scale)

    # -- basic interface -------------------------------------------------------

    @property
    def dim(self):
        return self._data.shape[0] if self._kind != "diag" else self._data.size

    @property
    def kind(self):
        return self._kind

    @property
    def diagonal_flag(self):
        return self._kind == "diag"

    def diag(self):
        """Diagonal entries (the full data for diagonal operators)."""
        if self._kind == "diag":
            return self._data
        if self._kind == "dense":
            return np.diag(self._data)
        return self._data.diagonal()

    def matrix(self):
        """Materialize as a dense ndarray.  Guarded against huge diagonals."""
        if self._kind == "dense":
            return self._data
        if self._kind == "sparse":
            return self._data.toarray()
        if self.dim > 46341:  # dense would exceed 32 GB
            raise OperatorError(
                f"refusing to densify diagonal operator of dim {self.dim}"
            )
        return np.diag(self._data)

    def sparse(self):
        if self._kind == "sparse":
            return self._data
        if self._kind == "diag":
            return sp.diags(self._data, format="csr", dtype=complex)
        return sp.csr_matrix(self._data)

    def norm_bound(self):
        """Cheap upper bound on the operator 2-norm."""
        if self._kind == "diag":
            return float(np.abs(self._data).max(initial=0.0))
        if self._kind == "dense":
            a = np.abs(self._data)
            return float(np.sqrt(a.sum(axis=0).max(initial=0.0) * a.sum(axis=1).max(initial=0.0)))
        a = self._data
        absa = sp.csr_matrix((np.abs(a.data), a.indices, a.indptr), shape=a.shape)
        one = absa.sum(axis=0).max() if a.nnz else 0.0
        inf = absa.sum(axis=1).max() if a.nnz else 0.0
        return float(np.sqrt(one * inf))

    def norm2(self):
        """Operator 2-norm (largest singular value)."""
        if self._kind == "diag":
            return float(np.abs(self._data).max(initial=0.0))
        if self._kind == "dense":
            return float(np.linalg.norm(self._data, 2)) if self.dim else 0.0
        if self.dim <= 4096:
            return float(np.linalg.norm(self._data.toarray(), 2)) if self.dim else 0.0
        from scipy.sparse.linalg import svds

        if self._data.nnz == 0:
            return 0.0
        try:
            s = svds(self._data, k=1, return_singular_vectors=False)
            return float(s[0])
        except Exception:
            return self.norm_bound()

    def adjoint(self):
        if self._kind == "diag":
            return Operator(self._data.conj(), label=f"{self.label}*",
                            hermitian=self.hermitian, unitary=self.unitary)
        if self._kind == "dense":
            return Operator(self._data.conj().T, label=f"{self.label}*",
                            hermitian=self.hermitian, unitary=self.unitary)
        return Operator(self._data.conj().T.tocsr(), label=f"{self.label}*",
                        hermitian=self.hermitian, unitary=self.unitary)

    def relabel(self, label):
        out = Operator.__new__(Operator)
        out._kind, out._data = self._kind, self._data
        out.label, out.hermitian, out.unitary = label, self.hermitian, self.unitary
        return out

    def restrict(self, indices):
        """Compression P T P* onto the given basis indices (in order)."""
        indices = np.asarray(indices)
        if self._kind == "diag":
            return Operator(self._data[indices], label=self.label)
        if self._kind == "dense":
            return Operator(self._data[np.ix_(indices, indices)], label=self.label)
        return Operator(self._data[indices][:, indices], label=self.label)

    # -- arithmetic ------------------------------------------------------------

    def _check_dims(self, other):
        if self.dim != other.dim:
            raise ContractViolation(
                f"dimension mismatch: {self.label!r} is {self.dim}, "
                f"{other.label!r} is {other.dim}"
            )

    def __matmul__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        self._check_dims(other)
        a, b = self, other
        if a._kind == "diag" and b._kind == "diag":
            return Operator(a._data * b._data)
        if a._kind == "diag":
            if b._kind == "dense":
                return Operator(a._data[:, None] * b._data)
            return Operator(sp.csr_matrix(b._data.multiply(a._data[:, None])))
        if b._kind == "diag":
            if a._kind == "dense":
                return Operator(a._data * b._data[None, :])
            return Operator(sp.csr_matrix(a._data.multiply(b._data[None, :])))
        if a._kind == "sparse" and b._kind == "sparse":
            return Operator(a._data @ b._data)
        if a._kind == "sparse":
            return Operator(a._data @ b._data)
        if b._kind == "sparse":
            return Operator((b._data.T @ a._data.T).T)
        return Operator(a._data @ b._data)

    def __add__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        self._check_dims(other)
        a, b = self, other
        if a._kind == "diag" and b._kind == "diag":
            return Operator(a._data + b._data)
        if "dense" in (a._kind, b._kind):
            return Operator(a._as_dense_like() + b._as_dense_like())
        return Operator(a.sparse() + b.sparse())

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar):
        return Operator(self._data * scalar, label=self.label)

    def __mul__(self, scalar):
        return Operator(self._data * scalar, label=self.label)

    def __neg__(self):
        return (-1.0) * self

    def _as_dense_like(self):
        if self._kind == "dense":
            return self._data
        if self._kind == "diag":
            return np.diag(self._data)
        return self._data.toarray()

    def __repr__(self):
        flags = [self._kind]
        if self.hermitian:
            flags.append("hermitian")
        if self.unitary:
            flags.append("unitary")
        return f"Operator({self.label!r}, dim={self.dim}, {'/'.join(flags)})"


def identity(dim, label="1"):
    return Operator(np.ones(dim, dtype=complex), label=label, unitary=True)


def zeros(dim, label="0"):
    return Operator(np.zeros(dim, dtype=complex), label=label)


# -- block-split eigen engine --------------------------------------------------


def _pattern(T):
    """Boolean CSR nonzero pattern of T + T^H (symmetrized)."""
    a = T.sparse() if T.kind != "sparse" else T._data
    pat = sp.csr_matrix(
        (np.ones(a.nnz, dtype=np.int8), a.indices.copy(), a.indptr.copy()),
        shape=a.shape,
    )
    return pat + pat.T


def _component_indices(T):
    """Index sets of the connected components of T's nonzero pattern."""
    ncomp, labels = connected_components(_pattern(T), directed=False)
    if ncomp == 1:
        return [np.arange(T.dim)]
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    cuts = np.flatnonzero(np.diff(sorted_labels)) + 1
    return np.split(order, cuts)


def _dense_block(T, idx):
    if T.kind == "dense":
        return T._data[np.ix_(idx, idx)]
    return T._data[idx][:, idx].toarray()


def _batched_eig(blocks, herm):
    """Eigenvalues of equally-sized dense blocks via stacked LAPACK calls."""
    stack = np.stack(blocks)
    return np.linalg.eigvalsh(stack) if herm else np.linalg.eigvals(stack)


def _eig_all(T, herm):
    """All eigenvalues of T (unordered), using the component split."""
    if T.kind == "diag":
        return T._data.real.astype(complex) if herm else T._data.copy()
    try:
        if T.dim < _SPLIT_MIN_DIM:
            comps = [np.arange(T.dim)]
        else:
            comps = _component_indices(T)
        if len(comps) == 1:
            block = T._data if T.kind == "dense" else T._data.toarray()
            return np.linalg.eigvalsh(block) if herm else np.linalg.eigvals(block)
        values = []
        by_size = {}
        for idx in comps:
            by_size.setdefault(idx.size, []).append(idx)
        for size, groups in by_size.items():
            if size == 1:
                flat = np.concatenate(groups)
                diag = T.diag()[flat]
                values.append(diag.real.astype(complex) if herm else diag)
            else:
                blocks = [_dense_block(T, idx) for idx in groups]
                values.append(_batched_eig(blocks, herm).ravel())
        return np.concatenate(values) if values else np.empty(0, dtype=complex)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(T.label, _condition_estimate(T), str(exc)) from exc


def _condition_estimate(T):
    top = T.norm_bound()
    if top == 0.0:
        return 0.0
    d = np.abs(T.diag())
    bottom = d[d > 0].min() if np.any(d > 0) else 0.0
    return float(top / bottom) if bottom else np.inf


# -- spectral operations -------------------------------------------------------


def eigenvalues(T):
    """All eigenvalues of ``T`` with algebraic multiplicity, canonical order.

    For a hermitian operator the imaginary parts are exactly zero (the
    hermitian LAPACK path is used).
    """
    vals = _eig_all(T, herm=T.hermitian)
    return Spectrum(canonical_order(vals), label=T.label)


def singular_values(T):
    """Singular values mu(k,T): eigenvalues of |T| in non-increasing order."""
    if T.kind == "diag":
        mu = np.sort(np.abs(T._data))[::-1]
        return SingularSequence(mu, label=T.label)
    try:
        if T.dim >= _SPLIT_MIN_DIM:
            comps = _component_indices(T)
        else:
            comps = [np.arange(T.dim)]
        if len(comps) == 1:
            block = T._data if T.kind == "dense" else T._data.toarray()
            mu = np.linalg.svd(block, compute_uv=False)
        else:
            parts = []
            by_size = {}
            for idx in comps:
                by_size.setdefault(idx.size, []).append(idx)
            for size, groups in by_size.items():
                if size == 1:
                    flat = np.concatenate(groups)
                    parts.append(np.abs(T.diag()[flat]))
                else:
                    stack = np.stack([_dense_block(T, idx) for idx in groups])
                    parts.append(np.linalg.svd(stack, compute_uv=False).ravel())
            mu = np.concatenate(parts) if parts else np.empty(0)
        return SingularSequence(np.sort(mu)[::-1], label=T.label)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(T.label, _condition_estimate(T), str(exc)) from exc


def _require_hermitian(T, who):
    if not T.hermitian:
        raise ContractViolation(f"{who} requires a hermitian operator, got {T.label!r}")


def _hermitian_eig(T):
    """Eigen decomposition of a hermitian operator, componentwise.

    Returns a list of (indices, eigenvalues, eigenvectors) triples; for the
    diagonal backend the eigenvector factor is ``None``.
    """
    if T.kind == "diag":
        return [(np.arange(T.dim), T._data.real, None)]
    if T.dim < _SPLIT_MIN_DIM:
        comps = [np.arange(T.dim)]
    else:
        comps = _component_indices(T)
    out = []
    try:
        for idx in comps:
            if idx.size == 1:
                out.append((idx, T.diag()[idx].real, None))
            else:
                w, v = np.linalg.eigh(_dense_block(T, idx))
                out.append((idx, w, v))
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(T.label, _condition_estimate(T), str(exc)) from exc
    return out


def _assemble(T, pieces):
    """Rebuild an operator from per-component dense/diagonal pieces."""
    if T.kind == "diag":
        (_, vals), = pieces
        return vals
    n = T.dim
    if T.kind == "dense":
        out = np.zeros((n, n), dtype=complex)
        for idx, block in pieces:
            if block.ndim == 1:
                out[idx, idx] = block
            else:
                out[np.ix_(idx, idx)] = block
        return out
    rows, cols, data = [], [], []
    for idx, block in pieces:
        if block.ndim == 1:
            rows.append(idx)
            cols.append(idx)
            data.append(block)
        else:
            r, c = np.nonzero(block)
            rows.append(idx[r])
            cols.append(idx[c])
            data.append(block[r, c])
    mat = sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    return mat


def _apply_scalar_function(f, w, label):
    # out-of-domain points surface as non-finite values, checked below
    with np.errstate(divide="ignore", invalid="ignore"):
        try:
            fw = np.asarray(f(w), dtype=complex)
            if fw.shape != w.shape:
                raise TypeError
        except (TypeError, ValueError):
            fw = np.array([complex(f(x)) for x in w])
        except ZeroDivisionError as exc:
            raise DomainError(
                f"function undefined on the spectrum of {label!r}: {exc}"
            ) from exc
    bad = ~np.isfinite(fw)
    if np.any(bad):
        culprit = w[np.argmax(bad)]
        raise DomainError(
            f"function undefined at eigenvalue {culprit!r} of operator {label!r}"
        )
    return fw


def hermitian_calculus(T, f, label=None):
    """Apply a scalar function to a hermitian operator through its spectrum.

    Eigenvectors are preserved; eigenvalues are mapped through ``f``.
    Diagonal operators take an O(N) path.
    """
    _require_hermitian(T, "hermitian_calculus")
    label = label if label is not None else f"f({T.label})"
    pieces = []
    for idx, w, v in _hermitian_eig(T):
        fw = _apply_scalar_function(f, w, T.label)
        if v is None:
            pieces.append((idx, fw))
        else:
            pieces.append((idx, (v * fw[None, :]) @ v.conj().T))
    data = _assemble(T, pieces)
    return Operator(data, label=label)


def spectral_projection(T, lo, hi, closed_ends=(True, True)):
    """Orthogonal projection onto eigenvectors with eigenvalue in [lo, hi].

    ``closed_ends`` selects closed (True) or open (False) interval ends;
    infinite ends are allowed.
    """
    _require_hermitian(T, "spectral_projection")
    closed_lo, closed_hi = closed_ends
    pieces = []
    for idx, w, v in _hermitian_eig(T):
        inside_lo = (w >= lo) if closed_lo else (w > lo)
        inside_hi = (w <= hi) if closed_hi else (w < hi)
        mask = inside_lo & inside_hi
        if v is None:
            pieces.append((idx, mask.astype(complex)))
        else:
            vs = v[:, mask]
            pieces.append((idx, vs @ vs.conj().T))
    data = _assemble(T, pieces)
    return Operator(data, label=f"E_{T.label}[{lo},{hi}]", hermitian=True)


def counting_function(T, t):
    """n_T(t): number of eigenvalues of a psd operator strictly above t > 0."""
    _require_hermitian(T, "counting_function")
    if t <= 0:
        raise ContractViolation("counting_function requires t > 0")
    count = 0
    floor = 0.0
    for _, w, _v in _hermitian_eig(T):
        floor = min(floor, float(w.min(initial=0.0)))
        count += int(np.count_nonzero(w > t))
    scale = 1.0 + T.norm_bound()
    if floor < -1e-10 * scale:
        raise ContractViolation(
            f"counting_function requires a psd operator; {T.label!r} has "
            f"eigenvalue {floor:.3e}"
        )
    return count


def phase_modulus(D):
    """Polar data (F, |D|) of a hermitian operator, with sign(0) := +1.

    F = E_D([0, inf)) - E_D((-inf, 0)) is a self-adjoint unitary with F^2 = 1
    and F |D| = D; kernel vectors of D receive +1.
    """
    _require_hermitian(D, "phase_modulus")
    sign_pieces, abs_pieces = [], []
    for idx, w, v in _hermitian_eig(D):
        s = np.where(w >= 0.0, 1.0, -1.0)
        if v is None:
            sign_pieces.append((idx, s.astype(complex)))
            abs_pieces.append((idx, np.abs(w).astype(complex)))
        else:
            sign_pieces.append((idx, (v * s[None, :]) @ v.conj().T))
            abs_pieces.append((idx, (v * np.abs(w)[None, :]) @ v.conj().T))
    F = Operator(_assemble(D, sign_pieces), label=f"phase({D.label})",
                 hermitian=True, unitary=True)
    absD = Operator(_assemble(D, abs_pieces), label=f"|{D.label}|", hermitian=True)
    return F, absD


def commutator(A, B):
    """[A, B] = AB - BA."""
    return (A @ B) - (B @ A)


def anticommutator(A, B):
    """{A, B} = AB + BA."""
    return (A @ B) + (B @ A)


def trace(T):
    """Standard trace: sum of diagonal entries."""
    return complex(T.diag().sum())


# -- serialization ---------------------------------------------------------------

_MAGIC = b"STO1"
_KIND_CODE = {"dense": 0, "diag": 1}


def save_operator(T, path):
    """Binary container: magic, kind byte, dim header, row-major complex doubles."""
    kind = T.kind
    if kind == "sparse":
        if T.dim > 4096:
            raise OperatorError("binary container stores dense data; operator too large")
        data, kind = T.matrix(), "dense"
    else:
        data = T._data
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<B", _KIND_CODE[kind]))
        fh.write(struct.pack("<Q", T.dim))
        fh.write(np.ascontiguousarray(data, dtype=np.complex128).tobytes())


def load_operator(path, label=""):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise OperatorError(f"bad magic {magic!r} in {path}")
        (code,) = struct.unpack("<B", fh.read(1))
        (dim,) = struct.unpack("<Q", fh.read(8))
        payload = fh.read()
        if len(payload) % 16:
            raise OperatorError(f"truncated payload in {path}")
        raw = np.frombuffer(payload, dtype=np.complex128)
    if code == _KIND_CODE["diag"]:
        if raw.size != dim:
            raise OperatorError("truncated diagonal payload")
        return Operator(raw.copy(), label=label)
    if raw.size != dim * dim:
        raise OperatorError("truncated dense payload")
    return Operator(raw.reshape(dim, dim).copy(), label=label)


def operator_to_csv(T, path):
    """Debug CSV dump: interleaved re/im columns (small matrices only)."""
    if T.dim > 512:
        raise OperatorError("CSV dump is for small matrices (dim <= 512)")
    m = T.matrix()
    flat = np.empty((T.dim, 2 * T.dim))
    flat[:, 0::2] = m.real
    flat[:, 1::2] = m.imag
    np.savetxt(path, flat, delimiter=",")


def operator_from_csv(path, label=""):
    flat = np.atleast_2d(np.loadtxt(path, delimiter=","))
    m = flat[:, 0::2] + 1j * flat[:, 1::2]
    return Operator(m, label=label)
