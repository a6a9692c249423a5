"""Classic objective functions plus shift/rotation/noise transforms.

Every base function reaches 0 at its optimum and the arithmetic is ordered so
that the optimum evaluates to exactly 0.0 (for instance Ackley is written as
``(20 - 20 e^{...}) + (e - e^{...})`` rather than ``-20 e^{...} - e^{...} + 20 + e``).
The transformed objective is

    f(x) = base(Q (x - s) + o) [+ noise] + bias

with ``s`` the new optimum location and ``o`` the base function's own optimum,
so rotation happens about the shifted optimum.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

TAGS = ("separable", "multimodal", "unimodal", "shifted", "rotated", "noisy")
NOISE_MODELS = ("gaussian_multiplicative", "gaussian_additive")
TRANSFORM_POLICIES = ("none", "shift", "shift_rotate")


class BenchmarkError(ValueError):
    pass


# -- base functions; each takes an (..., D) array and returns (...) ---------


def sphere(z):
    return np.sum(z * z, axis=-1)


def schwefel_2_21(z):
    return np.max(np.abs(z), axis=-1)


def rosenbrock(z):
    a, b = z[..., :-1], z[..., 1:]
    return np.sum(100.0 * (b - a * a) ** 2 + (a - 1.0) ** 2, axis=-1)


def rastrigin(z):
    return np.sum(z * z + 10.0 * (1.0 - np.cos(2.0 * np.pi * z)), axis=-1)


def griewank(z):
    i = np.sqrt(np.arange(1, z.shape[-1] + 1))
    return np.sum(z * z, axis=-1) / 4000.0 + (1.0 - np.prod(np.cos(z / i), axis=-1))


def ackley(z):
    d = z.shape[-1]
    r = np.sqrt(np.sum(z * z, axis=-1) / d)
    c = np.sum(np.cos(2.0 * np.pi * z), axis=-1) / d
    return (20.0 - 20.0 * np.exp(-0.2 * r)) + (math.e - np.exp(c))


def schwefel_2_22(z):
    a = np.abs(z)
    return np.sum(a, axis=-1) + np.prod(a, axis=-1)


def schwefel_1_2(z):
    return np.sum(np.cumsum(z, axis=-1) ** 2, axis=-1)


def bohachevsky(z):
    a, b = z[..., :-1], z[..., 1:]
    terms = a * a + 2.0 * b * b + 0.3 * (1.0 - np.cos(3.0 * np.pi * a)) + 0.4 * (1.0 - np.cos(4.0 * np.pi * b))
    return np.sum(terms, axis=-1)


def schaffer(z):
    a, b = z[..., :-1], z[..., 1:]
    s = a * a + b * b
    return np.sum(s**0.25 * (np.sin(50.0 * s**0.1) ** 2 + 1.0), axis=-1)


@dataclass(frozen=True)
class _CatalogEntry:
    name: str
    func: Callable
    bound: float
    tags: frozenset
    optimum: float = 0.0  # coordinate value of the base optimum
    min_dimension: int = 1


# order follows the classic large-scale suite listing
CATALOG: dict[str, _CatalogEntry] = {
    e.name: e
    for e in [
        _CatalogEntry("sphere", sphere, 100.0, frozenset({"separable", "unimodal"})),
        _CatalogEntry("schwefel_2_21", schwefel_2_21, 100.0, frozenset({"unimodal"})),
        _CatalogEntry("rosenbrock", rosenbrock, 100.0, frozenset({"multimodal"}), optimum=1.0, min_dimension=2),
        _CatalogEntry("rastrigin", rastrigin, 5.0, frozenset({"separable", "multimodal"})),
        _CatalogEntry("griewank", griewank, 600.0, frozenset({"multimodal"})),
        _CatalogEntry("ackley", ackley, 32.0, frozenset({"multimodal"})),
        _CatalogEntry("schwefel_2_22", schwefel_2_22, 10.0, frozenset({"unimodal"})),
        _CatalogEntry("schwefel_1_2", schwefel_1_2, 65.536, frozenset({"unimodal"})),
        _CatalogEntry("bohachevsky", bohachevsky, 15.0, frozenset({"multimodal"}), min_dimension=2),
        _CatalogEntry("schaffer", schaffer, 100.0, frozenset({"multimodal"}), min_dimension=2),
    ]
}


def function_names(tag: str | None = None) -> list[str]:
    if tag is not None and tag not in TAGS:
        raise BenchmarkError(f"unknown tag {tag!r}; valid tags: {', '.join(TAGS)}")
    return [n for n, e in CATALOG.items() if tag is None or tag in e.tags]


@dataclass(frozen=True)
class NoiseModel:
    model: str = "gaussian_multiplicative"
    magnitude: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.model not in NOISE_MODELS:
            raise BenchmarkError(f"unknown noise model {self.model!r}")
        if not self.magnitude >= 0:
            raise BenchmarkError("noise magnitude must be >= 0")


@dataclass(frozen=True)
class TransformChain:
    shift: np.ndarray | None = None
    rotation: np.ndarray | None = None
    noise: NoiseModel | None = None


@dataclass(frozen=True, eq=False)
class FunctionSpec:
    """An objective with box bounds, known optimum, bias and feature tags."""

    id: str
    name: str
    dimension: int
    lower: np.ndarray
    upper: np.ndarray
    optimum_location: np.ndarray
    bias: float = 0.0
    tags: frozenset = frozenset()
    shift: np.ndarray | None = None
    rotation: np.ndarray | None = None
    noise: NoiseModel | None = None
    transform_seed: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if np.any(self.lower >= self.upper):
            raise BenchmarkError("lower bound must be below upper bound in every dimension")
        if np.any(self.optimum_location < self.lower) or np.any(self.optimum_location > self.upper):
            raise BenchmarkError("optimum lies outside the bounds")

    @property
    def base(self) -> _CatalogEntry:
        return CATALOG[self.name]

    def _raw(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.dimension:
            raise BenchmarkError(f"point has dimension {x.shape[-1]}, expected {self.dimension}")
        z = x
        if self.shift is not None:
            z = z - self.shift
        if self.rotation is not None:
            z = z @ self.rotation.T
        if self.shift is not None or self.rotation is not None:
            # coordinates measured from the optimum; re-centre on the base optimum
            if self.base.optimum != 0.0:
                z = z + self.base.optimum
        return self.base.func(z)

    def evaluate(self, x, rng: np.random.Generator | None = None):
        """Objective value at ``x`` (a point or an (m, D) batch).

        Noise is drawn from ``rng``; a noisy spec evaluated without a
        generator returns the noiseless value.
        """
        x = np.asarray(x, dtype=float)
        value = self._raw(x)
        if self.noise is not None and self.noise.magnitude > 0 and rng is not None:
            eps = rng.standard_normal(np.shape(value))
            if self.noise.model == "gaussian_multiplicative":
                value = value * (1.0 + self.noise.magnitude * eps)
            else:
                value = value + self.noise.magnitude * eps
        value = value + self.bias if self.bias != 0.0 else value
        return float(value) if np.ndim(value) == 0 else value

    def objective(self, seed: int | None = None) -> Callable:
        """Evaluation callable owning its own noise stream."""
        rng = np.random.default_rng(seed) if self.noise is not None else None
        return lambda x: self.evaluate(x, rng)

    def manifest(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "dimension": self.dimension,
            "bias": self.bias,
            "tags": sorted(self.tags),
            "transform_seed": self.transform_seed,
        }


def make_function(name: str, dimension: int, bias: float = 0.0, id: str | None = None) -> FunctionSpec:
    if name not in CATALOG:
        raise BenchmarkError(f"unknown function {name!r}; valid names: {', '.join(CATALOG)}")
    e = CATALOG[name]
    if dimension < e.min_dimension:
        raise BenchmarkError(f"{name} needs dimension >= {e.min_dimension}")
    return FunctionSpec(
        id=id or name,
        name=name,
        dimension=dimension,
        lower=np.full(dimension, -e.bound),
        upper=np.full(dimension, e.bound),
        optimum_location=np.full(dimension, e.optimum),
        bias=bias,
        tags=e.tags,
    )


def evaluate(spec: FunctionSpec, x, rng=None):
    return spec.evaluate(x, rng)


def random_orthogonal(dimension: int, seed: int) -> np.ndarray:
    """Orthogonal matrix from the QR factorization of a seeded Gaussian matrix."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dimension, dimension))
    q, r = np.linalg.qr(g)
    # sign fix makes the draw Haar-distributed
    return q * np.sign(np.diag(r))


def apply_chain(spec: FunctionSpec, chain: TransformChain) -> FunctionSpec:
    """Return a new spec with the chain's shift, rotation and noise applied.

    Transforms compose on top of the base function; applying a chain to an
    already-transformed spec replaces the components the chain provides.
    """
    tags = set(spec.tags)
    shift, rotation, noise = spec.shift, spec.rotation, spec.noise
    optimum = spec.optimum_location
    if chain.shift is not None:
        s = np.asarray(chain.shift, dtype=float)
        if s.shape != (spec.dimension,):
            raise BenchmarkError("shift vector has the wrong dimension")
        if np.any(s <= spec.lower) or np.any(s >= spec.upper):
            raise BenchmarkError("shift moves the optimum outside the open box")
        shift, optimum = s, s
        tags.add("shifted")
    if chain.rotation is not None:
        q = np.asarray(chain.rotation, dtype=float)
        if q.shape != (spec.dimension, spec.dimension):
            raise BenchmarkError("rotation matrix has the wrong shape")
        if np.max(np.abs(q.T @ q - np.eye(spec.dimension))) > 1e-10:
            raise BenchmarkError("rotation matrix is not orthogonal")
        if shift is None:
            # rotate about the current optimum
            shift = optimum.copy()
        rotation = q
        tags.add("rotated")
        tags.discard("separable")
    if chain.noise is not None:
        noise = chain.noise
        if noise.magnitude > 0:
            tags.add("noisy")
    return replace(spec, shift=shift, rotation=rotation, noise=noise, optimum_location=optimum, tags=frozenset(tags))


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary printable parts."""
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "little")


def random_shift(spec: FunctionSpec, rng: np.random.Generator) -> np.ndarray:
    # central 80% of the box: away from both the centre bias and the bounds
    lo = spec.lower + 0.1 * (spec.upper - spec.lower)
    hi = spec.upper - 0.1 * (spec.upper - spec.lower)
    return rng.uniform(lo, hi)


@dataclass(frozen=True)
class SuiteManifest:
    names: tuple[str, ...]
    dimension: int
    policy: str = "shift"
    master_seed: int = 0
    noise_model: str | None = None
    noise_magnitude: float = 0.0

    def to_dict(self) -> dict:
        d = {
            "functions": list(self.names),
            "dimension": self.dimension,
            "transform_policy": self.policy,
            "master_seed": self.master_seed,
        }
        if self.noise_model is not None:
            d["noise"] = {"model": self.noise_model, "magnitude": self.noise_magnitude}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteManifest":
        noise = d.get("noise") or {}
        return cls(
            names=tuple(d["functions"]),
            dimension=int(d["dimension"]),
            policy=d.get("transform_policy", "shift"),
            master_seed=int(d.get("master_seed", 0)),
            noise_model=noise.get("model"),
            noise_magnitude=float(noise.get("magnitude", 0.0)),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def build(self) -> list[FunctionSpec]:
        return build_suite(
            self.names, self.dimension, self.policy, self.master_seed, self.noise_model, self.noise_magnitude
        )


def build_suite(
    names, dimension: int, policy: str = "shift", master_seed: int = 0, noise_model=None, noise_magnitude=0.0
) -> list[FunctionSpec]:
    """Instantiate catalog functions with independently seeded transforms."""
    if policy not in TRANSFORM_POLICIES:
        raise BenchmarkError(f"unknown transform policy {policy!r}; use one of {TRANSFORM_POLICIES}")
    unknown = [n for n in names if n not in CATALOG]
    if unknown:
        raise BenchmarkError(f"unknown function(s) {unknown}; valid names: {', '.join(CATALOG)}")
    suite = []
    for name in names:
        seed = derive_seed(master_seed, "suite", name, dimension)
        rng = np.random.default_rng(seed)
        spec = make_function(name, dimension)
        chain = TransformChain(
            shift=random_shift(spec, rng) if policy != "none" else None,
            rotation=random_orthogonal(dimension, int(rng.integers(2**63))) if policy == "shift_rotate" else None,
            noise=NoiseModel(noise_model, noise_magnitude, seed) if noise_model else None,
        )
        spec = apply_chain(spec, chain)
        suite.append(replace(spec, transform_seed=seed))
    return suite
