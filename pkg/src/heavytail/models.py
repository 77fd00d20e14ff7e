"""Coefficient models for the affine recursion X_k = A_k X_{k-1} + B_k.

Three model families, all of the form A = I - xi*H with H a random symmetric
d x d matrix and xi = eta/b:

* ``symm``:       H = sum of b i.i.d. symmetric draws from a configurable law
                  (GOE-style Gaussian, deterministic matrix, or finite mixture),
                  B drawn from a configurable vector law (standard Gaussian by
                  default, or finite mixture).
* ``rank1``:      H = sum of b rank-one projections a_i a_i^T,
                  B = xi * sum_i y_i a_i, with configurable (a, y) laws.
* ``rank1gauss``: rank1 with a_i ~ N(0, I_d) independent of y_i ~ N(0, 1);
                  no law parameters are accepted.

Scaling convention used everywhere in this package: ``H`` is the *summed*
matrix (no eta/b factor) and xi carries the eta/b factor, so
``A = I - xi*H`` holds entrywise by construction.

Samplers are pure functions of (spec, rng); a fixed seed and spec give a
bit-identical sample sequence. Draw order per batch is fixed and documented
on each sampler. Finite-support laws additionally expose their exact b-fold
sum support for zero-variance downstream evaluation.
"""

from __future__ import annotations

import ast
import configparser
import io
import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations_with_replacement
from typing import Iterator, Sequence

import numpy as np


class Variant(str, Enum):
    SYMM = "symm"
    RANK1 = "rank1"
    RANK1_GAUSS = "rank1gauss"


class ConfigurationError(ValueError):
    """Invalid model/law configuration."""


class UnsupportedOperationError(RuntimeError):
    """Operation not defined for this model variant."""


PROB_SUM_TOL = 1e-12

# Batch samplers allocate in blocks of this many draws to bound memory.
BLOCK = 1 << 16


def _as_matrix(m, d: int | None = None) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigurationError(f"expected a square matrix, got shape {a.shape}")
    if d is not None and a.shape[0] != d:
        raise ConfigurationError(f"matrix dimension {a.shape[0]} != d={d}")
    if not np.allclose(a, a.T, rtol=0, atol=0):
        raise ConfigurationError("matrix is not exactly symmetric")
    return a


def _check_probs(probs: Sequence[float]) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0 or (p < 0).any():
        raise ConfigurationError("probabilities must be a nonempty nonnegative vector")
    if abs(p.sum() - 1.0) > PROB_SUM_TOL:
        raise ConfigurationError(f"probabilities sum to {p.sum()!r}, not 1 within {PROB_SUM_TOL}")
    return p


# ---------------------------------------------------------------------------
# H laws (symm variant)


@dataclass(frozen=True)
class GoeLaw:
    """Rotation-invariant Gaussian symmetric matrix H = (G + G^T)/sqrt(2).

    Entries: diagonal N(0, 2), off-diagonal N(0, 1), independent up to
    symmetry. Sampling consumes d*d standard normals per draw (the full G).
    """

    d: int

    kind = "goe"
    rotation_invariant = True
    finite_support = False

    def sample_sum(self, n: int, b: int, rng: np.random.Generator) -> np.ndarray:
        g = rng.standard_normal((n, b, self.d, self.d)).sum(axis=1)
        return (g + np.swapaxes(g, -1, -2)) / np.sqrt(2.0)

    def atoms(self):
        return None


@dataclass(frozen=True)
class DeterministicLaw:
    """Point mass at a fixed symmetric matrix."""

    matrix: np.ndarray

    kind = "deterministic"
    finite_support = True

    def __post_init__(self):
        object.__setattr__(self, "matrix", _as_matrix(self.matrix))

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def rotation_invariant(self) -> bool:
        # only scalar multiples of the identity commute with every rotation
        return bool(np.array_equal(self.matrix, self.matrix[0, 0] * np.eye(self.d)))

    def sample_sum(self, n: int, b: int, rng: np.random.Generator) -> np.ndarray:
        return np.broadcast_to(b * self.matrix, (n, self.d, self.d)).copy()

    def atoms(self):
        return [(self.matrix, 1.0)]


@dataclass(frozen=True)
class MatrixMixtureLaw:
    """Finite mixture over symmetric matrices."""

    matrices: tuple[np.ndarray, ...]
    probs: tuple[float, ...]

    kind = "mixture"
    finite_support = True

    def __post_init__(self):
        mats = tuple(_as_matrix(m) for m in self.matrices)
        if len({m.shape[0] for m in mats}) != 1:
            raise ConfigurationError("mixture matrices must share one dimension")
        p = _check_probs(self.probs)
        if len(p) != len(mats):
            raise ConfigurationError("need one probability per matrix")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "probs", tuple(float(x) for x in p))

    @property
    def d(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def rotation_invariant(self) -> bool:
        eye = np.eye(self.d)
        return all(np.array_equal(m, m[0, 0] * eye) for m in self.matrices)

    def sample_sum(self, n: int, b: int, rng: np.random.Generator) -> np.ndarray:
        stack = np.stack(self.matrices)
        idx = rng.choice(len(stack), size=(n, b), p=np.asarray(self.probs))
        return stack[idx].sum(axis=1)

    def atoms(self):
        return list(zip(self.matrices, self.probs))


# ---------------------------------------------------------------------------
# B laws (symm variant)


@dataclass(frozen=True)
class GaussianVectorLaw:
    """Standard Gaussian vector in R^d. Consumes d normals per draw."""

    d: int

    kind = "gaussian"

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal((n, self.d))


@dataclass(frozen=True)
class VectorMixtureLaw:
    """Finite mixture over fixed vectors."""

    vectors: tuple[np.ndarray, ...]
    probs: tuple[float, ...]

    kind = "mixture"

    def __post_init__(self):
        vecs = tuple(np.atleast_1d(np.asarray(v, dtype=float)) for v in self.vectors)
        if len({v.shape for v in vecs}) != 1:
            raise ConfigurationError("mixture vectors must share one shape")
        p = _check_probs(self.probs)
        if len(p) != len(vecs):
            raise ConfigurationError("need one probability per vector")
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "probs", tuple(float(x) for x in p))

    @property
    def d(self) -> int:
        return self.vectors[0].shape[0]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        stack = np.stack(self.vectors)
        idx = rng.choice(len(stack), size=n, p=np.asarray(self.probs))
        return stack[idx]


@dataclass(frozen=True)
class ScalarMixtureLaw:
    """Finite mixture over fixed scalars (rank1 y law)."""

    values: tuple[float, ...]
    probs: tuple[float, ...]

    kind = "mixture"

    def __post_init__(self):
        p = _check_probs(self.probs)
        if len(p) != len(self.values):
            raise ConfigurationError("need one probability per value")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "probs", tuple(float(x) for x in p))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.asarray(self.values)[rng.choice(len(self.values), size=n, p=np.asarray(self.probs))]


@dataclass(frozen=True)
class GaussianScalarLaw:
    kind = "gaussian"

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(n)


# ---------------------------------------------------------------------------
# Model spec


@dataclass(frozen=True)
class ModelSpec:
    """Which coefficient law to sample, with dimensions and step size.

    ``xi`` is always derived as eta/b, never stored.
    """

    variant: Variant
    d: int
    b: int
    eta: float
    h_law: object | None = None  # symm only
    b_law: object | None = None  # symm only; default standard Gaussian
    a_law: object | None = None  # rank1 only; default standard Gaussian vectors
    y_law: object | None = None  # rank1 only; default standard Gaussian scalars

    def __post_init__(self):
        if self.d < 1 or self.b < 1:
            raise ConfigurationError(f"need d >= 1 and b >= 1, got d={self.d}, b={self.b}")
        if not (self.eta > 0):
            raise ConfigurationError(f"need eta > 0, got {self.eta}")
        v = Variant(self.variant)
        object.__setattr__(self, "variant", v)
        if v is Variant.RANK1_GAUSS:
            if any(x is not None for x in (self.h_law, self.b_law, self.a_law, self.y_law)):
                raise ConfigurationError("rank1gauss takes no law parameters")
        elif v is Variant.RANK1:
            if self.h_law is not None or self.b_law is not None:
                raise ConfigurationError("rank1 uses a_law/y_law, not h_law/b_law")
            if self.a_law is None:
                object.__setattr__(self, "a_law", GaussianVectorLaw(self.d))
            if self.y_law is None:
                object.__setattr__(self, "y_law", GaussianScalarLaw())
        else:  # SYMM
            if self.a_law is not None or self.y_law is not None:
                raise ConfigurationError("symm uses h_law/b_law, not a_law/y_law")
            if self.h_law is None:
                raise ConfigurationError("symm requires an h_law")
            if self.h_law.d != self.d:
                raise ConfigurationError("h_law dimension does not match d")
            if self.b_law is None:
                object.__setattr__(self, "b_law", GaussianVectorLaw(self.d))
            if self.b_law.d != self.d:
                raise ConfigurationError("b_law dimension does not match d")

    @property
    def xi(self) -> float:
        return self.eta / self.b

    @property
    def rotation_invariant(self) -> bool:
        """Whether the law of H is invariant under orthogonal conjugation."""
        if self.variant is Variant.RANK1_GAUSS:
            return True
        if self.variant is Variant.RANK1:
            return isinstance(self.a_law, GaussianVectorLaw)
        return bool(getattr(self.h_law, "rotation_invariant", False))

    @property
    def has_finite_h_support(self) -> bool:
        return self.variant is Variant.SYMM and getattr(self.h_law, "finite_support", False)


def rank1_gauss(d: int, b: int, eta: float) -> ModelSpec:
    return ModelSpec(Variant.RANK1_GAUSS, d=d, b=b, eta=eta)


def symm(d: int, b: int, eta: float, h_law, b_law=None) -> ModelSpec:
    return ModelSpec(Variant.SYMM, d=d, b=b, eta=eta, h_law=h_law, b_law=b_law)


@dataclass(frozen=True)
class CoefficientPair:
    """One draw (A, B) with the underlying summed symmetric matrix H.

    Invariant: A + xi*H == I entrywise (by construction order).
    """

    A: np.ndarray
    B: np.ndarray
    H: np.ndarray


# ---------------------------------------------------------------------------
# Sampling


def _rank1_a_draws(spec: ModelSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """The (n, b, d) batch of a-vectors behind rank1/rank1gauss draws."""
    if spec.variant is Variant.RANK1 and not isinstance(spec.a_law, GaussianVectorLaw):
        return spec.a_law.sample(n * spec.b, rng).reshape(n, spec.b, spec.d)
    return rng.standard_normal((n, spec.b, spec.d))


def _rank1_h_block(spec: ModelSpec, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """(a draws, summed H) for rank1/rank1gauss. Consumes a-draws only."""
    a = _rank1_a_draws(spec, n, rng)
    return a, np.einsum("nbi,nbj->nij", a, a)


def sample_h_sums(spec: ModelSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """n draws of the summed (unscaled) matrix H, shape (n, d, d).

    Draw order: one block of H draws; for rank1 variants the underlying
    a-draws, for symm the h_law draws. No B draws are consumed.
    """
    if spec.variant is Variant.SYMM:
        return spec.h_law.sample_sum(n, spec.b, rng)
    _, h = _rank1_h_block(spec, n, rng)
    return h


def sample_h_raw(spec: ModelSpec, rng: np.random.Generator) -> np.ndarray:
    """One draw of the unscaled H = sum_i a_i a_i^T (rank1 variants only)."""
    if spec.variant is Variant.SYMM:
        raise UnsupportedOperationError("raw rank-one H sums are undefined for the symm variant")
    return sample_h_sums(spec, 1, rng)[0]


def sample_pairs(spec: ModelSpec, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """n coefficient draws as arrays (H: (n,d,d), B: (n,d)).

    Draw order per batch: rank1 variants draw all a's, then all y's;
    symm draws all H's, then all B's. A is not materialized here;
    use ``pair_a`` / ``sample_pair`` when the A matrix itself is needed.
    """
    if spec.variant is Variant.SYMM:
        h = spec.h_law.sample_sum(n, spec.b, rng)
        bvec = spec.b_law.sample(n, rng)
        return h, bvec
    a, h = _rank1_h_block(spec, n, rng)
    if spec.variant is Variant.RANK1 and not isinstance(spec.y_law, GaussianScalarLaw):
        y = spec.y_law.sample(n * spec.b, rng).reshape(n, spec.b)
    else:
        y = rng.standard_normal((n, spec.b))
    bvec = spec.xi * np.einsum("nb,nbi->ni", y, a)
    return h, bvec


def pair_a(spec: ModelSpec, h: np.ndarray) -> np.ndarray:
    """A = I - xi*H for a batch (or single) summed H."""
    return np.eye(spec.d) - spec.xi * h


def sample_pair(spec: ModelSpec, rng: np.random.Generator) -> CoefficientPair:
    """One i.i.d. draw (A, B, H)."""
    h, bvec = sample_pairs(spec, 1, rng)
    return CoefficientPair(A=pair_a(spec, h[0]), B=bvec[0], H=h[0])


def iter_h_blocks(spec: ModelSpec, n: int, rng: np.random.Generator,
                  block: int = BLOCK) -> Iterator[np.ndarray]:
    """Yield summed-H batches totalling n draws, bounding peak memory."""
    done = 0
    while done < n:
        m = min(block, n - done)
        yield sample_h_sums(spec, m, rng)
        done += m


def sample_h_columns(spec: ModelSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """n draws of the first column H e_1 of the summed matrix, shape (n, d).

    This is the only part of H entering |(I - xi H) e_1|; sampled blockwise
    through the same law-defining code path as full draws.
    """
    if spec.variant is not Variant.SYMM:
        # a-draws only; avoid materializing full H
        out = np.empty((n, spec.d))
        done = 0
        while done < n:
            m = min(BLOCK, n - done)
            a = _rank1_a_draws(spec, m, rng)
            out[done:done + m] = np.einsum("nb,nbi->ni", a[:, :, 0], a)
            done += m
        return out
    out = np.empty((n, spec.d))
    done = 0
    for h in iter_h_blocks(spec, n, rng):
        out[done:done + h.shape[0]] = h[:, :, 0]
        done += h.shape[0]
    return out


# ---------------------------------------------------------------------------
# Exact b-fold sum support for finite H laws


MAX_SUPPORT_ATOMS = 100_000


def h_sum_support(spec: ModelSpec, limit: int = MAX_SUPPORT_ATOMS):
    """Exact support of the summed H with probabilities, or None.

    For a finite mixture with m atoms and batch b the support has
    C(m+b-1, b) points (multisets with multinomial weights). Returns None
    when the law has no finite support or the expansion exceeds ``limit``.
    """
    if not spec.has_finite_h_support:
        return None
    atoms = spec.h_law.atoms()
    m = len(atoms)
    if math.comb(m + spec.b - 1, spec.b) > limit:
        return None
    out = []
    fact_b = math.factorial(spec.b)
    for combo in combinations_with_replacement(range(m), spec.b):
        counts = np.bincount(combo, minlength=m)
        weight = fact_b
        prob = 1.0
        for j, c in enumerate(counts):
            weight //= math.factorial(int(c))
            prob *= atoms[j][1] ** int(c)
        total = sum(atoms[j][0] * int(c) for j, c in enumerate(counts) if c)
        out.append((total, weight * prob))
    return out


# ---------------------------------------------------------------------------
# Law files: structured key-value text with bracketed row-major matrices


LAW_FILE_GRAMMAR = """\
Law files are INI-style: section headers, key = value lines.

[model]            variant = symm|rank1|rank1gauss ; d, b integers ; eta real
[h_law]            kind = goe|deterministic|mixture
                   matrices = [[...],[...]] ; [[...]]   (row-major, ';'-separated)
                   probs = p1, p2, ...                  (mixture only, sum to 1)
[b_law]            kind = gaussian|mixture ; vectors = [..] ; [..] ; probs = ...
[a_law]            kind = gaussian|mixture ; vectors/probs as above (rank1)
[y_law]            kind = gaussian|mixture ; values = v1, v2, ... ; probs = ...
"""


def _parse_bracketed_list(text: str) -> list:
    items = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        try:
            items.append(ast.literal_eval(part))
        except (SyntaxError, ValueError) as exc:
            raise ConfigurationError(f"cannot parse bracketed list {part!r}: {exc}") from exc
    return items


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _law_from_section(section, d: int, role: str):
    kind = section.get("kind", "gaussian").strip().lower()
    if role == "h":
        if kind == "goe":
            return GoeLaw(d)
        if kind == "deterministic":
            mats = _parse_bracketed_list(section["matrices"])
            if len(mats) != 1:
                raise ConfigurationError("deterministic h_law takes exactly one matrix")
            return DeterministicLaw(np.asarray(mats[0], dtype=float))
        if kind == "mixture":
            mats = tuple(np.asarray(m, dtype=float) for m in _parse_bracketed_list(section["matrices"]))
            probs = tuple(_parse_floats(section["probs"]))
            return MatrixMixtureLaw(mats, probs)
        raise ConfigurationError(f"unknown h_law kind {kind!r}")
    if role in ("b", "a"):
        if kind == "gaussian":
            return GaussianVectorLaw(d)
        if kind == "mixture":
            vecs = tuple(np.asarray(v, dtype=float) for v in _parse_bracketed_list(section["vectors"]))
            probs = tuple(_parse_floats(section["probs"]))
            return VectorMixtureLaw(vecs, probs)
        raise ConfigurationError(f"unknown {role}_law kind {kind!r}")
    # y law
    if kind == "gaussian":
        return GaussianScalarLaw()
    if kind == "mixture":
        return ScalarMixtureLaw(tuple(_parse_floats(section["values"])),
                                tuple(_parse_floats(section["probs"])))
    raise ConfigurationError(f"unknown y_law kind {kind!r}")


def spec_from_law_text(text: str, overrides: dict | None = None) -> ModelSpec:
    """Build a ModelSpec from law-file text; ``overrides`` replace [model] keys."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"bad law file: {exc}") from exc
    if "model" not in cp:
        raise ConfigurationError("law file needs a [model] section")
    model = dict(cp["model"])
    if overrides:
        model.update({k: str(v) for k, v in overrides.items() if v is not None})
    try:
        variant = Variant(model["variant"].strip().lower())
        d = int(model["d"])
        b = int(model["b"])
        eta = float(model["eta"])
    except KeyError as exc:
        raise ConfigurationError(f"[model] is missing key {exc}") from exc
    kwargs = {}
    if variant is Variant.SYMM:
        if "h_law" not in cp:
            raise ConfigurationError("symm law file needs an [h_law] section")
        kwargs["h_law"] = _law_from_section(cp["h_law"], d, "h")
        if "b_law" in cp:
            kwargs["b_law"] = _law_from_section(cp["b_law"], d, "b")
    elif variant is Variant.RANK1:
        if "a_law" in cp:
            kwargs["a_law"] = _law_from_section(cp["a_law"], d, "a")
        if "y_law" in cp:
            kwargs["y_law"] = _law_from_section(cp["y_law"], d, "y")
    return ModelSpec(variant, d=d, b=b, eta=eta, **kwargs)


def load_law_file(path: str, overrides: dict | None = None) -> ModelSpec:
    with io.open(path, "r", encoding="utf-8") as fh:
        return spec_from_law_text(fh.read(), overrides)
