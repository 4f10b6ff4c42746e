"""Monodromy generator datasets and their exact certification."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .exact_linalg import (
    AlternatingTrilinearForm,
    ExactMatrix,
    SymmetricBilinearForm,
    invariant_alternating_bilinear_space,
    invariant_bilinear_space,
    invariant_trilinear_space,
    primitive_integer_matrix,
    primitive_integer_vector,
    signature,
)

BUILTIN_FILES = {
    "g2-elliptic-surface": "g2_elliptic_surface.json",
    "sl2-sanity": "sl2_sanity.json",
}

# sha256 of the canonical serialization; guards against accidental edits of the assets
BUILTIN_CHECKSUMS = {
    "g2-elliptic-surface": "863e376fd3ca7d20d43ee6af61cf143506928e5abbf47cec2870c499ad989956",
    "sl2-sanity": "421abdeaa737bad49db615a577797ab998cf89eec0a8af3d6d1f56a361cea834",
}

MAX_RELATION_LENGTH = 8


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class CocycleGenerators:
    name: str
    dim: int
    generators: tuple[tuple[str, ExactMatrix], ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        labels = self.labels
        if len(set(labels)) != len(labels):
            raise DatasetError(f"{self.name}: generator labels are not unique")
        if not self.generators:
            raise DatasetError(f"{self.name}: no generators")
        for label, m in self.generators:
            if m.nrows != self.dim or m.ncols != self.dim:
                raise DatasetError(f"{self.name}: generator {label} is {m.nrows}x{m.ncols}, expected {self.dim}x{self.dim}")
            if m.det() == 0:
                raise DatasetError(f"{self.name}: generator {label} is singular")

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.generators]

    @property
    def matrices(self) -> list[ExactMatrix]:
        return [m for _, m in self.generators]

    @cached_property
    def inverses(self) -> list[ExactMatrix]:
        return [m.inverse() for m in self.matrices]

    def __getitem__(self, label: str) -> ExactMatrix:
        for lab, m in self.generators:
            if lab == label:
                return m
        raise KeyError(label)

    def subset(self, labels: Sequence[str], name: str | None = None) -> CocycleGenerators:
        chosen = tuple((lab, m) for lab, m in self.generators if lab in set(labels))
        return CocycleGenerators(name or f"{self.name}[{','.join(labels)}]", self.dim, chosen, dict(self.metadata))

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "dim": self.dim,
            "generators": [{"label": lab, "rows": m.to_lists()} for lab, m in self.generators],
            "metadata": self.metadata,
        }

    @property
    def checksum(self) -> str:
        canon = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def dataset_from_dict(data: dict[str, Any]) -> CocycleGenerators:
    unknown = set(data) - {"name", "dim", "generators", "metadata"}
    if unknown:
        raise DatasetError(f"unknown dataset keys: {sorted(unknown)}")
    try:
        gens = tuple((g["label"], ExactMatrix.from_rows(g["rows"])) for g in data["generators"])
        return CocycleGenerators(data["name"], int(data["dim"]), gens, dict(data.get("metadata", {})))
    except (KeyError, TypeError) as exc:
        raise DatasetError(f"malformed dataset: {exc}") from exc


def load_dataset(path: str | Path) -> CocycleGenerators:
    with open(path, encoding="utf-8") as fh:
        return dataset_from_dict(json.load(fh))


def load_builtin(name: str) -> CocycleGenerators:
    if name not in BUILTIN_FILES:
        raise DatasetError(f"unknown dataset {name!r}; builtins are {sorted(BUILTIN_FILES)}")
    text = resources.files("g2lyap").joinpath("data", BUILTIN_FILES[name]).read_text(encoding="utf-8")
    ds = dataset_from_dict(json.loads(text))
    expected = BUILTIN_CHECKSUMS.get(name)
    if expected and ds.checksum != expected:
        raise DatasetError(f"checksum mismatch for builtin dataset {name!r}: asset was edited")
    return ds


def resolve_dataset(ref: str) -> CocycleGenerators:
    """Builtin name, or path to a dataset JSON file."""
    if ref in BUILTIN_FILES:
        return load_builtin(ref)
    if Path(ref).is_file():
        return load_dataset(ref)
    raise DatasetError(f"dataset {ref!r} is neither a builtin ({', '.join(sorted(BUILTIN_FILES))}) nor a file")


def unipotency_index(m: ExactMatrix) -> int | None:
    """Least k <= dim with (M - I)^k = 0, or None if M is not unipotent."""
    n = m.dim
    nil = m - ExactMatrix.identity(n)
    p = nil
    for k in range(1, n + 1):
        if p.is_zero():
            return k
        p = p @ nil
    return None


# -- relations -----------------------------------------------------------------


def _symbol_name(labels: Sequence[str], s: int) -> str:
    g = len(labels)
    return labels[s] if s < g else f"{labels[s - g]}^-1"


def format_word(labels: Sequence[str], word: Sequence[int]) -> str:
    return "*".join(_symbol_name(labels, s) for s in word)


def find_relations(gens: CocycleGenerators, max_len: int = 4, chunk: int = 100_000) -> list[tuple[int, ...]]:
    """All nonempty reduced words of length <= max_len that evaluate to +-identity.

    Symbols 0..g-1 are the generators and g..2g-1 their inverses; a word
    (s1, ..., sL) evaluates to M_s1 M_s2 ... M_sL. Output is sorted by length,
    then lexicographically with each generator followed by its inverse.
    """
    if max_len > MAX_RELATION_LENGTH:
        raise ValueError(f"max_len {max_len} exceeds the guard {MAX_RELATION_LENGTH}")
    if max_len < 1:
        return []
    g = len(gens.generators)
    exact = gens.matrices + gens.inverses
    integral = all(m.is_integral() for m in exact)
    if integral:
        bound = max(max(sum(abs(int(x)) for x in r) for r in m.rows) for m in exact)
        dtype = np.int64 if float(bound) ** max_len < 2.0**62 else object
        mats = np.array([[[int(x) for x in r] for r in m.rows] for m in exact], dtype=dtype)
    else:
        mats = np.array([[list(r) for r in m.rows] for m in exact], dtype=object)
    d = gens.dim
    eye = np.eye(d, dtype=np.int64)
    found: list[tuple[int, ...]] = []

    def check(level_mats, level_words):
        if level_mats.dtype == object:
            flat = level_mats.reshape(len(level_mats), -1)
            target = eye.reshape(-1)
            hits = [i for i, row in enumerate(flat) if all(row == target) or all(row == -target)]
        else:
            hits = np.nonzero((level_mats == eye).all(axis=(1, 2)) | (level_mats == -eye).all(axis=(1, 2)))[0]
        found.extend(tuple(int(s) for s in level_words[i]) for i in hits)

    def grow(level_mats, level_words, depth):
        check(level_mats, level_words)
        if depth == max_len:
            return
        if len(level_mats) > chunk:
            for start in range(0, len(level_mats), chunk):
                grow_children(level_mats[start:start + chunk], level_words[start:start + chunk], depth)
        else:
            grow_children(level_mats, level_words, depth)

    def grow_children(level_mats, level_words, depth):
        last = level_words[:, -1]
        new_mats, new_words = [], []
        for s in range(2 * g):
            keep = last != (s + g) % (2 * g)
            if not keep.any():
                continue
            new_mats.append(level_mats[keep] @ mats[s])
            ws = level_words[keep]
            new_words.append(np.hstack([ws, np.full((len(ws), 1), s, dtype=np.int64)]))
        grow(np.concatenate(new_mats), np.concatenate(new_words), depth + 1)

    grow(mats.copy(), np.arange(2 * g, dtype=np.int64).reshape(-1, 1), 1)

    def rank(s):
        return 2 * s if s < g else 2 * (s - g) + 1

    return sorted(found, key=lambda w: (len(w), [rank(s) for s in w]))


# -- verification --------------------------------------------------------------


@dataclass
class GeneratorCheck:
    label: str
    determinant: Fraction
    unipotency_index: int | None
    preserves_symmetric_form: bool | None
    preserves_alternating_form: bool | None
    preserves_3form: bool | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "determinant": str(self.determinant),
            "unipotency_index": self.unipotency_index,
            "preserves_symmetric_form": self.preserves_symmetric_form,
            "preserves_alternating_form": self.preserves_alternating_form,
            "preserves_3form": self.preserves_3form,
        }


@dataclass
class VerificationReport:
    dataset: str
    checksum: str
    dim: int
    expected_polarization: str
    generators: list[GeneratorCheck]
    symmetric_bilinear_dim: int
    alternating_bilinear_dim: int
    trilinear_dim: int | None
    symmetric_form: ExactMatrix | None
    signature: tuple[int, int, int] | None
    alternating_form: ExactMatrix | None
    three_form: dict[str, str] | None
    relations: list[str]
    relation_search_length: int
    certified: bool
    discrepancies: list[str] = field(default_factory=list)
    best_subset: list[str] | None = None
    fallback_generators: list[str] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset": self.dataset,
            "checksum": self.checksum,
            "dim": self.dim,
            "expected_polarization": self.expected_polarization,
            "generators": [g.to_dict() for g in self.generators],
            "symmetric_bilinear_dim": self.symmetric_bilinear_dim,
            "alternating_bilinear_dim": self.alternating_bilinear_dim,
            "trilinear_dim": self.trilinear_dim,
            "symmetric_form": self.symmetric_form.to_lists() if self.symmetric_form else None,
            "signature": list(self.signature) if self.signature else None,
            "alternating_form": self.alternating_form.to_lists() if self.alternating_form else None,
            "three_form": self.three_form,
            "relations": self.relations,
            "relation_search_length": self.relation_search_length,
            "certified": self.certified,
            "discrepancies": self.discrepancies,
            "best_subset": self.best_subset,
            "fallback_generators": self.fallback_generators,
        }


def _normalized_symmetric(q: SymmetricBilinearForm) -> ExactMatrix:
    """Primitive integer multiple of Q, signed so that positive count >= negative count."""
    m = primitive_integer_matrix(q.matrix)
    sig = signature(m)
    return -m if sig.negative > sig.positive else m


def verify_invariance(gens: CocycleGenerators, max_relation_length: int = 4) -> VerificationReport:
    """Exact certification of invariant forms; failures are recorded, never raised."""
    mats = gens.matrices
    weight = gens.metadata.get("weight")
    expected = "alternating" if weight is not None and weight % 2 else "symmetric"

    sym = invariant_bilinear_space(mats)
    alt = invariant_alternating_bilinear_space(mats)
    tri = invariant_trilinear_space(mats) if gens.dim == 7 else None

    sym_form = _normalized_symmetric(sym[0]) if len(sym) == 1 else None
    sig = signature(sym_form).as_tuple() if sym_form is not None else None
    alt_form = primitive_integer_matrix(alt[0]) if len(alt) == 1 else None
    three = None
    if tri is not None and len(tri) == 1:
        three_form = AlternatingTrilinearForm(gens.dim, primitive_integer_vector(tri[0].coefficients))
        three = three_form.to_dict()
    else:
        three_form = None

    checks = []
    for label, m in gens.generators:
        checks.append(
            GeneratorCheck(
                label=label,
                determinant=m.det(),
                unipotency_index=unipotency_index(m),
                preserves_symmetric_form=(m.T @ sym_form @ m - sym_form).is_zero() if sym_form is not None else None,
                preserves_alternating_form=(m.T @ alt_form @ m - alt_form).is_zero() if alt_form is not None else None,
                preserves_3form=three_form.is_invariant_under(m) if three_form is not None else None,
            )
        )

    discrepancies = []
    exp_dim = len(sym) if expected == "symmetric" else len(alt)
    form = sym_form if expected == "symmetric" else alt_form
    ok = exp_dim == 1 and form is not None and form.det() != 0
    if exp_dim != 1:
        discrepancies.append(f"invariant {expected} bilinear space has dimension {exp_dim}, expected 1")
    elif form.det() == 0:
        discrepancies.append(f"invariant {expected} form is degenerate")
    if tri is not None:
        if len(tri) == 0:
            ok = False
            discrepancies.append("no invariant alternating 3-form")
        elif len(tri) > 1:
            discrepancies.append(f"invariant 3-form space has dimension {len(tri)}, expected 1")
    if any(c.determinant not in (1, -1) for c in checks):
        discrepancies.append("some generator has determinant other than +-1")

    best = fallback = None
    if not ok:
        best = _largest_certifiable_subset(gens, expected)
        fallback = [c.label for c in checks if c.unipotency_index is not None]
        failing = [lab for lab in gens.labels if best is None or lab not in best]
        discrepancies.append(f"generators outside the largest certifiable subset: {failing}")

    rel_len = min(max_relation_length, MAX_RELATION_LENGTH)
    relations = [format_word(gens.labels, w) for w in find_relations(gens, rel_len)]

    return VerificationReport(
        dataset=gens.name,
        checksum=gens.checksum,
        dim=gens.dim,
        expected_polarization=expected,
        generators=checks,
        symmetric_bilinear_dim=len(sym),
        alternating_bilinear_dim=len(alt),
        trilinear_dim=None if tri is None else len(tri),
        symmetric_form=sym_form,
        signature=sig,
        alternating_form=alt_form,
        three_form=three,
        relations=relations,
        relation_search_length=rel_len,
        certified=ok,
        discrepancies=discrepancies,
        best_subset=best,
        fallback_generators=fallback,
    )


def _largest_certifiable_subset(gens: CocycleGenerators, expected: str) -> list[str] | None:
    solve = invariant_bilinear_space if expected == "symmetric" else invariant_alternating_bilinear_space
    labels = gens.labels
    for size in range(len(labels) - 1, 0, -1):
        for sub in combinations(range(len(labels)), size):
            if len(solve([gens.matrices[i] for i in sub])) == 1:
                return [labels[i] for i in sub]
    return None


def certified_generators(gens: CocycleGenerators, report: VerificationReport) -> CocycleGenerators:
    """The full set when certified, else the subgroup generated by the unipotent generators."""
    if report.certified or not report.fallback_generators:
        return gens
    return gens.subset(report.fallback_generators, name=f"{gens.name}:unipotent-fallback")
