"""Finite-truncation spectral triple models.

Three concrete models are provided:

* ``circle``    -- Fourier modes k in [-(N+B), N+B], D = diag(k), algebra
                   generated by the bilateral shift u; p = 1, odd.
* ``nc_torus``  -- Z^2 modes with a 2-dimensional spinor factor, algebra
                   generated by the twisted shifts U, V with VU = lam UV,
                   lam = exp(2 pi i theta); p = 2, even, Gamma = diag(1,-1).
* ``toy``       -- one-sided diagonal model D = diag((k+1)^{1/p}) with a
                   commutative diagonal algebra, so every derivation [D, a]
                   vanishes; degenerate cross-check for any p.

Algebra elements are kept symbolic: finitely supported combinations of
lattice words, with twist phases tracked as exact integer powers of lam.
Realization maps a word to a (sparse) shift matrix on the working dimension
N + B per axis; spectral statistics are read only from the compressed
interior (modes up to N), which keeps shift-truncation artifacts out of the
asymptotics.
"""

from __future__ import annotations

import json
import math

import numpy as np
import scipy.sparse as sp

from .ideals import decay_exponent, ideal_diagnostics, quasi_norm_pinf
from .operators import (
    ContractViolation,
    Operator,
    commutator,
    hermitian_calculus,
    identity,
    phase_modulus,
    singular_values,
)

__all__ = [
    "AlgebraElement",
    "SpectralTripleModel",
    "build_circle",
    "build_nc_torus",
    "build_diagonal_toy",
    "build_model",
    "realize",
    "partial_d",
    "delta",
    "f_comm",
    "qc_seminorm",
    "invertible_double",
    "summability_report",
    "resolvent_weight",
]

DEFAULT_THETA = math.sqrt(0.5)  # 1/sqrt(2) mod 1, irrational at double precision


class AlgebraElement:
    """Finitely supported word combination: sum of coeff * lam^m * w(exponents).

    ``terms`` maps (word, lam_power) -> complex coefficient, where ``word``
    is a tuple of lattice exponents and ``lam_power`` an exact integer power
    of the model twist.  All products are symbolic; nothing here touches
    floating-point phase evaluation until :meth:`realize`.
    """

    __slots__ = ("model", "terms")

    def __init__(self, model, terms):
        self.model = model
        clean = {}
        for key, coeff in terms.items():
            if coeff != 0:
                clean[key] = clean.get(key, 0j) + coeff
        self.terms = {k: v for k, v in clean.items() if v != 0}

    @property
    def model_id(self):
        return self.model.model_id

    @property
    def band_width(self):
        if not self.terms:
            return 0
        return max(self.model.word_band(word) for word, _ in self.terms)

    def is_zero(self):
        return not self.terms

    def _check(self, other):
        if self.model is not other.model:
            raise ContractViolation("algebra elements from different models")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            out[key] = out.get(key, 0j) + coeff
        return AlgebraElement(self.model, out)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar):
        return AlgebraElement(
            self.model, {k: scalar * v for k, v in self.terms.items()}
        )

    def __mul__(self, other):
        if not isinstance(other, AlgebraElement):
            return AlgebraElement(
                self.model, {k: other * v for k, v in self.terms.items()}
            )
        self._check(other)
        out = {}
        for (w1, m1), c1 in self.terms.items():
            for (w2, m2), c2 in other.terms.items():
                word, dm = self.model.mul_words(w1, w2)
                key = (word, m1 + m2 + dm)
                out[key] = out.get(key, 0j) + c1 * c2
        return AlgebraElement(self.model, out)

    def adjoint(self):
        out = {}
        for (word, m), coeff in self.terms.items():
            new_word, dm = self.model.adjoint_word(word)
            key = (new_word, -m + dm)
            out[key] = out.get(key, 0j) + np.conj(coeff)
        return AlgebraElement(self.model, out)

    def __eq__(self, other):
        return (isinstance(other, AlgebraElement)
                and self.model is other.model
                and self.terms == other.terms)

    def __hash__(self):
        return hash((id(self.model), tuple(sorted(self.terms.items()))))

    def __repr__(self):
        if not self.terms:
            return "AlgebraElement(0)"
        bits = []
        for (word, m), coeff in sorted(self.terms.items()):
            lam = f"*lam^{m}" if m else ""
            bits.append(f"{coeff:.3g}{lam}*{self.model.word_label(word)}")
        return "AlgebraElement(" + " + ".join(bits) + ")"


class SpectralTripleModel:
    """A truncated spectral triple: basis geometry, D, F, |D|, grading."""

    def __init__(self, name, N, B, p, parity, theta=0.0):
        self.name = name
        self.N = int(N)
        self.B = int(B)
        self.p = int(p)
        self.parity = parity
        self.theta = float(theta)
        self.metadata = {}
        self._word_cache = {}
        self.D = None
        self.F = None
        self.absD = None
        self.Gamma = None
        self.dim = 0
        self.interior = None
        self.reliable_count = 0

    # -- word algebra hooks (overridden per geometry) -------------------------

    def mul_words(self, w1, w2):
        raise NotImplementedError

    def adjoint_word(self, word):
        raise NotImplementedError

    def word_label(self, word):
        raise NotImplementedError

    def word_band(self, word):
        """Lattice bandwidth of the realized word (0 for diagonal words)."""
        return max((abs(e) for e in word), default=0)

    def _realize_word(self, word):
        raise NotImplementedError

    @property
    def model_id(self):
        return f"{self.name}(N={self.N},B={self.B},theta={self.theta!r})"

    @property
    def interior_dim(self):
        return int(self.interior.size)

    def eval_phase(self, m):
        if m == 0:
            return 1.0 + 0.0j
        return np.exp(2j * np.pi * self.theta * m)

    def monomial(self, word, coeff=1.0, lam_power=0):
        word = tuple(int(e) for e in word)
        return AlgebraElement(self, {(word, int(lam_power)): complex(coeff)})

    def one(self):
        return self.monomial((0,) * self.word_rank)

    def generators(self):
        raise NotImplementedError

    def word_inverse(self, word, lam_power=0):
        """Inverse of a unitary monomial coeff=1: lam^-m * w^-1 with twist fix."""
        inv_word, dm = self.adjoint_word(word)
        return (inv_word, -lam_power + dm)

    # -- realization ------------------------------------------------------------

    def realize_word(self, word):
        word = tuple(int(e) for e in word)
        if self.word_band(word) > self.B:
            raise ContractViolation(
                f"word {self.word_label(word)} exceeds buffer B={self.B}"
            )
        cached = self._word_cache.get(word)
        if cached is None:
            cached = self._realize_word(word)
            self._word_cache[word] = cached
        return cached

    def realize(self, a):
        """Realize an algebra element as a (sparse) working-dimension Operator."""
        if a.is_zero():
            mat = sp.csr_matrix((self.dim, self.dim), dtype=complex)
            return Operator(mat, label="0")
        acc = None
        for (word, m), coeff in sorted(a.terms.items()):
            piece = self.realize_word(word) * (coeff * self.eval_phase(m))
            acc = piece if acc is None else acc + piece
        return Operator(sp.csr_matrix(acc), label=repr(a)[:60])

    def compress(self, op):
        """Restrict to the interior modes (|mode| <= N on every axis)."""
        return op.restrict(self.interior)

    def interior_norm(self, op):
        comp = self.compress(op)
        if comp.dim <= 2048:
            return comp.norm2()
        return comp.norm_bound()

    def fit_window(self):
        """Index window for partial-sum fits on this model's interior spectra.

        Lower edge sqrt(M); upper edge capped at ``reliable_count``, the
        number of eigenvalues unaffected by the shape of the mode cutoff.
        """
        M = self.interior_dim
        root = int(math.ceil(math.sqrt(M)))
        hi = min(self.reliable_count, M - root - 1)
        return root, max(hi, root + 8)

    def descriptor(self):
        return {
            "name": self.name,
            "N": self.N,
            "B": self.B,
            "p": self.p,
            "parity": self.parity,
            "theta": self.theta,
            "working_dim": self.dim,
            "interior_dim": self.interior_dim,
            "reliable_count": self.reliable_count,
            "conventions": dict(self.metadata),
        }

    def descriptor_json(self):
        return json.dumps(self.descriptor(), indent=2, sort_keys=True)

    def __repr__(self):
        return (f"SpectralTripleModel({self.name!r}, N={self.N}, B={self.B}, "
                f"p={self.p}, {self.parity}, dim={self.dim})")


class _CircleModel(SpectralTripleModel):
    word_rank = 1

    def mul_words(self, w1, w2):
        return ((w1[0] + w2[0],), 0)

    def adjoint_word(self, word):
        return ((-word[0],), 0)

    def word_label(self, word):
        return f"u^{word[0]}"

    def generators(self):
        return {"u": self.monomial((1,))}

    def _realize_word(self, word):
        k = word[0]
        M = self.dim
        if abs(k) >= M:
            return sp.csr_matrix((M, M), dtype=complex)
        return sp.diags(np.ones(M - abs(k), dtype=complex), offsets=-k,
                        shape=(M, M), format="csr")


class _ToyModel(SpectralTripleModel):
    word_rank = 1

    def mul_words(self, w1, w2):
        return ((w1[0] + w2[0],), 0)

    def adjoint_word(self, word):
        return ((-word[0],), 0)

    def word_label(self, word):
        return f"w^{word[0]}"

    def word_band(self, word):
        return 0  # every toy word is diagonal

    def generators(self):
        return {"w": self.monomial((1,))}

    def _realize_word(self, word):
        j = word[0]
        k = np.arange(self.dim)
        return sp.diags(np.exp(2j * np.pi * j * k / self.dim), format="csr")


class _TorusModel(SpectralTripleModel):
    word_rank = 2

    def mul_words(self, w1, w2):
        a1, b1 = w1
        a2, b2 = w2
        return ((a1 + a2, b1 + b2), b1 * a2)

    def adjoint_word(self, word):
        a, b = word
        return ((-a, -b), a * b)

    def word_label(self, word):
        return f"U^{word[0]}V^{word[1]}"

    def generators(self):
        return {"U": self.monomial((1, 0)), "V": self.monomial((0, 1))}

    def _lattice_shift(self, a, b):
        """U^a V^b on the lattice factor: e_n -> exp(2 pi i theta b n1) e_{n+(a,b)}."""
        R = self.N + self.B
        L = 2 * R + 1
        n1 = np.arange(max(-R, -R - a), min(R, R - a) + 1)
        n2 = np.arange(max(-R, -R - b), min(R, R - b) + 1)
        if n1.size == 0 or n2.size == 0:
            return sp.csr_matrix((L * L, L * L), dtype=complex)
        src1, src2 = np.meshgrid(n1, n2, indexing="ij")
        src = (src1 + R) * L + (src2 + R)
        dst = (src1 + a + R) * L + (src2 + b + R)
        phase = np.exp(2j * np.pi * self.theta * b * src1)
        return sp.csr_matrix(
            (phase.ravel(), (dst.ravel(), src.ravel())),
            shape=(L * L, L * L),
        )

    def _realize_word(self, word):
        a, b = word
        lat = self._lattice_shift(a, b)
        return sp.kron(sp.identity(2, dtype=complex, format="csr"), lat,
                       format="csr")


def build_circle(N, buffer=None):
    """Circle model: D = diag(k) over Fourier modes, shift algebra, p=1 odd."""
    if N < 8:
        raise ContractViolation("build_circle requires N >= 8")
    B = int(buffer) if buffer is not None else 8
    model = _CircleModel("circle", N, B, p=1, parity="odd")
    R = N + B
    modes = np.arange(-R, R + 1)
    model.dim = modes.size
    model.modes = modes
    model.D = Operator(modes.astype(complex), label="D", hermitian=True)
    model.F, model.absD = phase_modulus(model.D)
    model.Gamma = None
    model.interior = np.flatnonzero(np.abs(modes) <= N)
    model.reliable_count = model.interior.size
    model.metadata = {"sign0": "+1", "basis": "fourier modes -R..R"}
    return model


def build_nc_torus(N, theta=None, buffer=None):
    """Noncommutative-torus model: twisted Z^2 shifts, spinor-doubled, p=2 even."""
    if N < 8:
        raise ContractViolation("build_nc_torus requires N >= 8")
    theta = DEFAULT_THETA if theta is None else float(theta)
    B = int(buffer) if buffer is not None else 4
    model = _TorusModel("nc_torus", N, B, p=2, parity="even", theta=theta)
    R = N + B
    L = 2 * R + 1
    n1 = np.repeat(np.arange(-R, R + 1), L)
    n2 = np.tile(np.arange(-R, R + 1), L)
    model.dim = 2 * L * L
    model.lattice = (n1, n2)
    w = 1j * n1 - n2  # upper spinor block of D: d1 + i*d2 with d_j = diag(i n_j)
    W = sp.diags(w.astype(complex), format="csr")
    D = sp.bmat([[None, W], [W.conj().T, None]], format="csr")
    model.D = Operator(D, label="D", hermitian=True)
    F, model.absD = phase_modulus(model.D)
    # On ker D the polar phase is unconstrained by F|D| = D; the graded
    # (spinor-swap) block keeps {Gamma, F} = 0 exact, which the character
    # identities need.  The sign(0)=+1 default would inject a rank-2 defect.
    kernel = np.flatnonzero(np.abs(w) == 0)
    fmat = F.sparse().tolil()
    for k in kernel:
        up, dn = k, k + L * L
        fmat[up, up] = 0.0
        fmat[dn, dn] = 0.0
        fmat[up, dn] = 1.0
        fmat[dn, up] = 1.0
    model.F = Operator(fmat.tocsr(), label="F", hermitian=True, unitary=True)
    gamma = np.concatenate([np.ones(L * L), -np.ones(L * L)]).astype(complex)
    model.Gamma = Operator(gamma, label="Gamma", hermitian=True, unitary=True)
    inside = (np.abs(n1) <= N) & (np.abs(n2) <= N)
    model.interior = np.flatnonzero(np.concatenate([inside, inside]))
    model.reliable_count = 2 * int(np.count_nonzero(n1 ** 2 + n2 ** 2 <= N * N))
    model.metadata = {
        "sign0": "+1",
        "spinor_block": "upper = d1 + i*d2",
        "tau": "i",
        "twist": "V U = exp(2 pi i theta) U V",
    }
    return model


def build_diagonal_toy(N, decay_exponent=1):
    """Diagonal toy model: D = diag((k+1)^{1/p}), commutative diagonal algebra."""
    p = int(decay_exponent)
    if p < 1:
        raise ContractViolation("build_diagonal_toy requires p >= 1")
    model = _ToyModel("toy", N, 0, p=p, parity="odd")
    model.dim = int(N)
    k = np.arange(N, dtype=float)
    model.D = Operator(((k + 1.0) ** (1.0 / p)).astype(complex), label="D",
                       hermitian=True)
    model.F, model.absD = phase_modulus(model.D)
    model.Gamma = None
    model.interior = np.arange(N)
    model.reliable_count = int(N)
    model.metadata = {"sign0": "+1", "decay_exponent": p}
    return model


def build_model(name, N, theta=None, p=None, buffer=None):
    """Build a model from its registry name."""
    if name == "circle":
        return build_circle(N, buffer=buffer)
    if name == "nc_torus":
        return build_nc_torus(N, theta=theta, buffer=buffer)
    if name == "toy":
        return build_diagonal_toy(N, decay_exponent=p or 1)
    raise ContractViolation(f"unknown model {name!r}")


def realize(a, model=None):
    model = model or a.model
    return model.realize(a)


def partial_d(a, model=None):
    """The derivation [D, a] on the working dimension."""
    model = model or a.model
    return commutator(model.D, model.realize(a))


def delta(a, model=None):
    """The derivation [|D|, a] on the working dimension."""
    model = model or a.model
    return commutator(model.absD, model.realize(a))


def f_comm(a, model=None):
    """The phase commutator [F, a] on the working dimension."""
    model = model or a.model
    return commutator(model.F, model.realize(a))


def qc_seminorm(a, model=None, n=1, max_order=3):
    """Seminorm q_n(a): sum over k <= n of ||delta^k(a)|| + ||delta^k([D,a])||.

    Norms are taken on the compressed interior; n is capped by ``max_order``.
    """
    model = model or a.model
    if n > max_order:
        raise ContractViolation(f"qc_seminorm order {n} exceeds max {max_order}")
    total = 0.0
    x = model.realize(a)
    y = partial_d(a, model)
    for _ in range(n + 1):
        total += model.interior_norm(x) + model.interior_norm(y)
        x = commutator(model.absD, x)
        y = commutator(model.absD, y)
    return float(total)


def invertible_double(model):
    """Replace D by the invertible D0 = F (1 + D^2)^{1/2}; returns (model', D1).

    D1 = D0 - D equals F (|D| + (1+|D|^2)^{1/2})^{-1} (checked to 1e-10) and
    lies in L_{p,inf}; the new triple shares the algebra, phase F and grading.
    On an even model the grading anticommutation acquires a defect supported
    on ker D (the sign(0)=+1 convention), which is finite rank and harmless
    for partial-sum checks.
    """
    one_plus_sq = (model.D @ model.D) + identity(model.dim)
    root = hermitian_calculus(one_plus_sq, np.sqrt, label="(1+D^2)^{1/2}")
    D0 = model.F @ root
    D1 = D0 - model.D
    closed = model.F @ hermitian_calculus(
        model.absD, lambda x: 1.0 / (x + np.sqrt(1.0 + x * x)),
        label="(|D|+(1+|D|^2)^{1/2})^{-1}")
    gap = (D1 - closed).norm_bound()
    scale = 1.0 + D1.norm_bound()
    if gap > 1e-10 * scale:
        raise ContractViolation(
            f"invertible double closed form violated: residual {gap:.3e}")
    double = model.__class__(model.name + "+double", model.N, model.B,
                             model.p, model.parity, model.theta)
    for attr in ("modes", "lattice"):
        if hasattr(model, attr):
            setattr(double, attr, getattr(model, attr))
    double.dim = model.dim
    double.interior = model.interior
    double.reliable_count = model.reliable_count
    double._word_cache = model._word_cache
    double.D = D0.relabel("D0")
    double.absD = root
    double.F = model.F
    double.Gamma = model.Gamma
    double.metadata = dict(model.metadata)
    double.metadata["double_of"] = model.model_id
    double.metadata["D1_quasi_norm_p"] = quasi_norm_pinf(
        singular_values(D1), model.p)
    return double, D1.relabel("D1")


def resolvent_weight(model, q=None):
    """(1 + D^2)^{-q/2} for the summability exponent q (default: model p)."""
    q = model.p if q is None else q
    one_plus_sq = (model.D @ model.D) + identity(model.dim)
    return hermitian_calculus(one_plus_sq, lambda x: x ** (-q / 2.0),
                              label=f"(1+D^2)^(-{q}/2)")


def summability_report(model):
    """Ideal diagnostics for (1+D^2)^{-p/2} and the generator F-commutators."""
    V = resolvent_weight(model)
    mu = singular_values(model.compress(V))
    diag = ideal_diagnostics(mu, p=1.0)
    gen_norms = {}
    for name, g in model.generators().items():
        fg = model.compress(f_comm(g, model))
        fdg = model.compress(
            commutator(model.F, commutator(model.absD, model.realize(g))))
        gen_norms[f"[F,{name}]"] = quasi_norm_pinf(singular_values(fg), model.p)
        gen_norms[f"[F,delta({name})]"] = quasi_norm_pinf(
            singular_values(fdg), model.p)
    diag.verdicts.update({
        "weight_decay_exponent": decay_exponent(mu),
        "generator_quasi_norms": gen_norms,
    })
    return diag
