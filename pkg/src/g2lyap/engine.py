"""Monte Carlo Lyapunov spectra of matrix cocycles along random words.

A word is drawn over the generators and their inverses, an orthonormal frame
is pushed through the corresponding matrices and re-orthonormalized (QR with
positive R diagonal), and the log growth of each frame direction is averaged.
The run is split into independent blocks, each a fresh frame with its own
burn-in and its own seed; the block means give the standard errors.

Block seeds come from ``master_seed`` through a splitmix64 mix of
``master_seed XOR (b + 1) * 0x9E3779B97F4A7C15``. Each block then draws its
word from numpy's PCG64 with that seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from .functors import IDENTITY, FunctorSpec, apply_functor
from .monodromy import CocycleGenerators

WALK_KINDS = ("non-backtracking", "iid-uniform")
GOLDEN = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1
SUM_TOL = 1e-9


class NumericalBlowupError(RuntimeError):
    pass


@dataclass(frozen=True)
class WalkConfig:
    steps: int = 1_000_000
    walk_kind: str = "non-backtracking"
    renorm_interval: int = 1
    blocks: int = 20
    master_seed: int = 0
    burn_in: int = 1000
    workers: int = 1
    inverses: bool = True

    def __post_init__(self):
        if self.walk_kind not in WALK_KINDS:
            raise ValueError(f"walk_kind must be one of {WALK_KINDS}, got {self.walk_kind!r}")
        if self.blocks < 2:
            raise ValueError("need at least 2 blocks for standard errors")
        if self.steps < self.blocks or self.steps % self.blocks:
            raise ValueError(f"steps ({self.steps}) must be a positive multiple of blocks ({self.blocks})")
        if self.renorm_interval < 1:
            raise ValueError("renorm_interval must be >= 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if not 0 <= self.master_seed <= MASK64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def steps_per_block(self) -> int:
        return self.steps // self.blocks

    def to_dict(self) -> dict:
        return asdict(self)


def splitmix64(x: int) -> int:
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def block_seed(master_seed: int, block: int) -> int:
    return splitmix64(master_seed ^ (((block + 1) * GOLDEN) & MASK64))


def block_word(gen_count: int, walk_kind: str, length: int, seed: int, inverses: bool = True) -> np.ndarray:
    """Symbol codes 0..2g-1 (g..2g-1 are inverses) for one block.

    With ``inverses=False`` only the generators themselves are drawn, uniformly;
    nothing can backtrack then, so both walk kinds coincide.
    """
    if gen_count < 1:
        raise ValueError("need at least one generator")
    m = 2 * gen_count
    rng = np.random.Generator(np.random.PCG64(seed))
    if not inverses:
        return rng.integers(0, gen_count, size=length, dtype=np.int64)
    if walk_kind == "iid-uniform":
        return rng.integers(0, m, size=length, dtype=np.int64)
    if gen_count == 1:
        raise ValueError("non-backtracking walk with one generator has a single admissible continuation")
    first = int(rng.integers(0, m))
    draws = rng.integers(0, m - 1, size=max(length - 1, 0), dtype=np.int64)
    return _kernels.non_backtracking_fill(first, draws, gen_count)[:length]


def _block_words(gen_count: int, config: WalkConfig) -> Iterator[np.ndarray]:
    length = config.burn_in + config.steps_per_block
    for b in range(config.blocks):
        yield block_word(gen_count, config.walk_kind, length, block_seed(config.master_seed, b), config.inverses)


def to_signed(word: np.ndarray, gen_count: int) -> np.ndarray:
    """Codes to signed indices: generator i -> i + 1, its inverse -> -(i + 1)."""
    return np.where(word < gen_count, word + 1, -(word - gen_count + 1))


def sample_word_stream(gen_count: int, config: WalkConfig) -> Iterator[int]:
    """The exact symbol stream the engine consumes, block after block, burn-in included."""
    for word in _block_words(gen_count, config):
        yield from to_signed(word, gen_count).tolist()


def generator_stack(gens: CocycleGenerators, functor: FunctorSpec = IDENTITY) -> np.ndarray:
    """Float matrices for symbols 0..2g-1, functor applied exactly before conversion."""
    exact = gens.matrices + gens.inverses
    return np.ascontiguousarray(np.array([apply_functor(m, functor).to_numpy() for m in exact]))


@dataclass
class EstimationResult:
    exponents: np.ndarray
    std_errors: np.ndarray
    block_estimates: np.ndarray
    steps_used: int
    config: WalkConfig | None = None
    dataset: str = ""
    functor: str = "identity"

    @classmethod
    def from_values(cls, values: Sequence[float], std_errors: Sequence[float] | None = None) -> EstimationResult:
        vals = np.sort(np.asarray(values, dtype=float))[::-1]
        se = np.zeros_like(vals) if std_errors is None else np.asarray(std_errors, dtype=float)
        return cls(vals, se, vals[None, :].copy(), 0)

    @property
    def dim(self) -> int:
        return len(self.exponents)

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "functor": self.functor,
            "config": self.config.to_dict() if self.config else None,
            "steps_used": self.steps_used,
            "exponents": self.exponents.tolist(),
            "std_errors": self.std_errors.tolist(),
            "blocks": self.block_estimates.tolist(),
        }


def _summarize(block_logs: np.ndarray, config: WalkConfig, dataset: str, functor: str) -> EstimationResult:
    est = block_logs / config.steps_per_block
    mean = est.mean(axis=0)
    order = np.argsort(-mean, kind="stable")
    est = est[:, order]
    se = est.std(axis=0, ddof=1) / math.sqrt(config.blocks)
    return EstimationResult(mean[order], se, est, config.steps, config, dataset, functor)


def _run(stacks: list[np.ndarray], gen_count: int, config: WalkConfig) -> list[np.ndarray]:
    """Block log sums for each matrix stack, all driven by the same words."""
    length = config.burn_in + config.steps_per_block

    def one_block(b: int) -> list[np.ndarray]:
        word = block_word(gen_count, config.walk_kind, length, block_seed(config.master_seed, b), config.inverses)
        out = []
        for stack in stacks:
            logs, status = _kernels.qr_walk(stack, word, config.burn_in, config.renorm_interval)
            if status != _kernels.STATUS_OK:
                raise NumericalBlowupError(
                    f"frame degenerated or overflowed in block {b}; lower renorm_interval "
                    f"(currently {config.renorm_interval})"
                )
            out.append(logs)
        return out

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            per_block = list(pool.map(one_block, range(config.blocks)))
    else:
        per_block = [one_block(b) for b in range(config.blocks)]
    # merge in block-index order regardless of completion order
    return [np.array([blk[i] for blk in per_block]) for i in range(len(stacks))]


def estimate_exponents(gens: CocycleGenerators, config: WalkConfig) -> EstimationResult:
    (logs,) = _run([generator_stack(gens)], len(gens.generators), config)
    return _summarize(logs, config, gens.name, "identity")


def coupled_estimate(
    gens: CocycleGenerators, functors: Sequence[FunctorSpec], config: WalkConfig
) -> list[EstimationResult]:
    """One result per functor, identity first, all along one shared word stream."""
    specs = [IDENTITY] + [f for f in functors if f != IDENTITY]
    stacks = [generator_stack(gens, f) for f in specs]
    logs = _run(stacks, len(gens.generators), config)
    return [_summarize(lg, config, gens.name, str(f)) for lg, f in zip(logs, specs)]


def estimate_from_word(mats: np.ndarray, word: np.ndarray, burn_in: int = 0, renorm_interval: int = 1) -> np.ndarray:
    """Per-direction exponents along one explicit word, in frame order."""
    logs, status = _kernels.qr_walk(
        np.ascontiguousarray(mats, dtype=float), np.asarray(word, dtype=np.int64), burn_in, renorm_interval
    )
    if status != _kernels.STATUS_OK:
        raise NumericalBlowupError("frame degenerated or overflowed; lower renorm_interval")
    return logs / (len(word) - burn_in)


# -- diagnostics ---------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumHints:
    expect_zero: bool = False
    expect_symmetry: bool = False
    expect_g2_additivity: bool = False
    expect_gap: bool = False
    expect_unit_determinant: bool = False


@dataclass
class DiagnosticsReport:
    tol_sigma: float
    symmetry_defect: float
    symmetry_z: float
    zero_defect: float | None
    zero_z: float | None
    zero_count: int
    additivity_defect: float | None
    additivity_z: float | None
    gap_zscores: list[float]
    sum_defect: float
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _z(defect: float, se: float) -> float:
    if se > 0:
        return defect / se
    return 0.0 if defect == 0 else math.inf


def analyze_spectrum(result: EstimationResult, hints: SpectrumHints, tol_sigma: float = 3.0) -> DiagnosticsReport:
    """Structure checks on an estimated spectrum, each measured in standard errors.

    Combined standard errors add the per-exponent errors in quadrature.
    """
    lam, se = result.exponents, result.std_errors
    d = len(lam)
    if hints.expect_zero and d % 2 == 0:
        raise ValueError("expect_zero needs an odd dimension")
    if hints.expect_g2_additivity and d < 3:
        raise ValueError("additivity check needs at least three exponents")

    lam, se = np.asarray(lam, dtype=float), np.asarray(se, dtype=float)
    pair_z = [_z(abs(float(lam[i] + lam[d - 1 - i])), math.hypot(se[i], se[d - 1 - i])) for i in range(d // 2)]
    symmetry_defect = max((abs(lam[i] + lam[d - 1 - i]) for i in range(d)), default=0.0)
    symmetry_z = max(pair_z, default=0.0)

    zero_count = sum(1 for x, s in zip(lam, se) if abs(x) <= tol_sigma * s)
    zero_defect = zero_z = None
    if d % 2 == 1:
        mid = d // 2
        zero_defect = abs(float(lam[mid]))
        zero_z = _z(zero_defect, float(se[mid]))

    additivity_defect = additivity_z = None
    if d >= 3:
        additivity_defect = abs(float(lam[0] - lam[1] - lam[2]))
        additivity_z = _z(additivity_defect, math.sqrt(se[0] ** 2 + se[1] ** 2 + se[2] ** 2))

    npos = d // 2 if hints.expect_symmetry else int(np.sum(lam > 0))
    gap_z = [_z(float(lam[i] - lam[i + 1]), math.hypot(se[i], se[i + 1])) for i in range(npos - 1)]

    sum_defect = abs(float(lam.sum()))
    checks = {}
    if hints.expect_symmetry:
        checks["symmetry"] = bool(symmetry_z <= tol_sigma)
    if hints.expect_zero:
        checks["zero"] = bool(zero_count == 1 and zero_z <= tol_sigma)
    if hints.expect_g2_additivity:
        checks["additivity"] = bool(additivity_z <= tol_sigma)
    if hints.expect_gap:
        checks["gap"] = all(z > tol_sigma for z in gap_z)
    if hints.expect_unit_determinant:
        checks["unit_determinant"] = bool(sum_defect <= SUM_TOL)
    return DiagnosticsReport(
        tol_sigma=tol_sigma,
        symmetry_defect=float(symmetry_defect),
        symmetry_z=float(symmetry_z),
        zero_defect=zero_defect,
        zero_z=zero_z,
        zero_count=zero_count,
        additivity_defect=additivity_defect,
        additivity_z=additivity_z,
        gap_zscores=[float(z) for z in gap_z],
        sum_defect=sum_defect,
        checks=checks,
    )


def mirror_check(identity: EstimationResult, dual: EstimationResult, tol_sigma: float = 3.0) -> dict:
    """Dual-cocycle exponents against the negated, reversed original spectrum."""
    target = -identity.exponents[::-1]
    target_se = identity.std_errors[::-1]
    z = [_z(abs(a - b), math.hypot(s, t)) for a, b, s, t in zip(dual.exponents, target, dual.std_errors, target_se)]
    return {"max_defect": float(np.max(np.abs(dual.exponents - target))), "max_z": float(max(z)), "passed": bool(max(z) <= tol_sigma)}


def pairwise_sum_spectrum(result: EstimationResult) -> tuple[np.ndarray, np.ndarray]:
    """Sorted sums lambda_i + lambda_j (i < j) and their block-level standard errors."""
    d = result.dim
    iu = np.triu_indices(d, k=1)

    def sums(v):
        return np.sort((v[:, None] + v[None, :])[iu])[::-1]

    values = sums(result.exponents)
    blocks = np.array([sums(row) for row in result.block_estimates])
    nb = len(blocks)
    se = blocks.std(axis=0, ddof=1) / math.sqrt(nb) if nb > 1 else np.zeros_like(values)
    return values, se


def exterior_square_check(identity: EstimationResult, ext2: EstimationResult, tol_sigma: float = 3.0) -> dict:
    """Estimated second-exterior-power spectrum against pairwise sums of the base spectrum."""
    target, target_se = pairwise_sum_spectrum(identity)
    if len(target) != ext2.dim:
        raise ValueError(f"dimension mismatch: {ext2.dim} exponents vs {len(target)} pairwise sums")
    z = [_z(abs(a - b), math.hypot(s, t)) for a, b, s, t in zip(ext2.exponents, target, ext2.std_errors, target_se)]
    return {"max_defect": float(np.max(np.abs(ext2.exponents - target))), "max_z": float(max(z)), "passed": bool(max(z) <= tol_sigma)}
