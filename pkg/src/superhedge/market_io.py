"""JSON market specifications: one self-contained document per experiment.

Layout::

    {
      "outcomes":   {"count": 2, "labels": ["up", "down"]},
      "filtration": [[[0, 1]], [[0], [1]]],
      "measures":   {"generators": [[0.5, 0.5]]}
                    or {"martingale_assets": ["S"]},
      "processes":  {"S": [[100, 100], [120, 80]]},
      "claims":     {"call": [20, 0]}
    }

Numbers are decimal doubles.  Serialization is canonical (sorted keys, native
float repr), so load -> dump round-trips value-identically and dump output
re-serializes byte-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .measures import GeneratorHull, MartingalePolytope, Measure, MeasureSet
from .spaces import AdaptedProcess, FilteredSpace, build_space


@dataclass(frozen=True, eq=False)
class MarketModel:
    space: FilteredSpace
    measure_set: MeasureSet
    processes: dict[str, AdaptedProcess]
    claims: dict[str, np.ndarray]
    labels: tuple[str, ...] | None = None
    asset_names: tuple[str, ...] = field(default=())
    generator_vectors: tuple[tuple[float, ...], ...] = field(default=())

    @property
    def is_polytope(self) -> bool:
        return isinstance(self.measure_set, MartingalePolytope)


def parse_market(doc: dict) -> MarketModel:
    """Build a validated model from a parsed JSON document."""
    try:
        outcomes = doc["outcomes"]
        count = int(outcomes["count"])
        filtration = doc["filtration"]
        measures = doc["measures"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"missing or malformed section: {exc}") from exc

    labels = tuple(outcomes["labels"]) if "labels" in outcomes else None
    if labels is not None and len(labels) != count:
        raise ValidationError("labels must match the outcome count")

    space = build_space(count, filtration)

    processes = {}
    for name in sorted(doc.get("processes", {})):
        matrix = np.asarray(doc["processes"][name], dtype=float)
        processes[name] = AdaptedProcess(space, matrix)

    claims = {}
    for name in sorted(doc.get("claims", {})):
        vec = np.asarray(doc["claims"][name], dtype=float)
        if vec.shape != (count,):
            raise ValidationError(f"claim {name!r} must list one value per outcome")
        claims[name] = vec

    asset_names: tuple[str, ...] = ()
    generator_vectors: tuple[tuple[float, ...], ...] = ()
    if "generators" in measures:
        gens = [Measure(np.asarray(g, dtype=float)) for g in measures["generators"]]
        for g in gens:
            if len(g) != count:
                raise ValidationError("generator length must equal the outcome count")
        mset: MeasureSet = GeneratorHull(space, gens)
        generator_vectors = tuple(tuple(map(float, g.probabilities)) for g in gens)
    elif "martingale_assets" in measures:
        asset_names = tuple(measures["martingale_assets"])
        missing = [a for a in asset_names if a not in processes]
        if missing:
            raise ValidationError(f"martingale_assets reference unknown processes {missing}")
        mset = MartingalePolytope(space, [processes[a] for a in asset_names], names=asset_names)
    else:
        raise ValidationError("measures must declare either generators or martingale_assets")

    return MarketModel(
        space=space,
        measure_set=mset,
        processes=processes,
        claims=claims,
        labels=labels,
        asset_names=asset_names,
        generator_vectors=generator_vectors,
    )


def load_market(path: str) -> MarketModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top level must be an object")
    return parse_market(doc)


def market_document(model: MarketModel) -> dict:
    """Canonical document for a model; inverse of parse_market."""
    doc: dict = {
        "outcomes": {"count": model.space.outcome_count},
        "filtration": [
            [list(cell) for cell in level] for level in model.space.cells
        ],
    }
    if model.labels is not None:
        doc["outcomes"]["labels"] = list(model.labels)
    if model.asset_names:
        doc["measures"] = {"martingale_assets": list(model.asset_names)}
    else:
        doc["measures"] = {"generators": [list(g) for g in model.generator_vectors]}
    doc["processes"] = {
        name: [[float(v) for v in row] for row in proc.values]
        for name, proc in sorted(model.processes.items())
    }
    doc["claims"] = {
        name: [float(v) for v in vec] for name, vec in sorted(model.claims.items())
    }
    return doc


def dumps_canonical(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def save_market(model: MarketModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(market_document(model)))


def strategy_document(strategy, claim_name: str, mode: str, price: float, asset_names=()) -> dict:
    return {
        "claim": claim_name,
        "mode": mode,
        "price": float(price),
        "assets": list(asset_names),
        "cash": [[float(v) for v in row] for row in strategy.cash],
        "risky": [
            [[float(v) for v in outcome] for outcome in row] for row in strategy.risky
        ],
    }


def save_strategy(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(doc))


def load_strategy(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
