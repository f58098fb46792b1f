"""Structured problem files: one JSON document describing model + objective.

The schema ships with the package (schema/problem.schema.json) and is
enforced strictly: unknown fields and unknown schema versions are rejected
so a typo cannot silently change the model being solved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .lap import LapModel
from .markov import MarkovSpec, TamakiSpec
from .odds import OddsSequence, dice, secretary, with_availability
from .verify import Objective

SCHEMA_VERSION = 1


def problem_schema() -> dict:
    text = resources.files("stoprule").joinpath("schema/problem.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class Problem:
    kind: str
    model: OddsSequence | MarkovSpec | TamakiSpec | LapModel | None
    objective: Objective
    raw: dict
    empirical_n: int | None = None


def parse_problem(document: dict) -> Problem:
    """Validate a problem document and build the model it describes."""
    try:
        jsonschema.validate(document, problem_schema())
    except jsonschema.ValidationError as err:
        raise ValueError(f"problem file rejected: {err.message}") from err
    if document["schema_version"] != SCHEMA_VERSION:
        raise ValueError(
            f"unsupported schema_version {document['schema_version']}; "
            f"this build reads version {SCHEMA_VERSION}"
        )
    spec = document["model"]
    kind = spec["kind"]
    empirical_n = None
    model: Any
    if kind == "explicit-odds":
        model = OddsSequence(spec["probs"])
        if "availability" in spec:
            model = with_availability(model, spec["availability"])
    elif kind == "secretary":
        model = secretary(spec["n"])
    elif kind == "dice":
        model = dice(spec["n"], spec.get("faces", 6))
    elif kind == "empirical":
        model = None
        empirical_n = spec["n"]
    elif kind == "markov":
        n_horizon = spec["N"]
        if "alphas" in spec or "betas" in spec:
            if "alpha" in spec or "beta" in spec:
                raise ValueError("markov model takes either alpha/beta or alphas/betas")
            model = MarkovSpec(
                N=n_horizon,
                alphas=tuple(spec["alphas"]),
                betas=tuple(spec["betas"]),
                rho=spec.get("rho", 0.5),
            )
        else:
            if "alpha" not in spec or "beta" not in spec:
                raise ValueError("homogeneous markov model needs alpha and beta")
            model = MarkovSpec.homogeneous(
                spec["alpha"], spec["beta"], n_horizon, rho=spec.get("rho", 0.5)
            )
    elif kind == "tamaki-markov":
        model = TamakiSpec.from_transitions(
            spec["alphas"], spec["betas"], rho=spec.get("rho", 0.5)
        )
    elif kind == "lap":
        model = LapModel(base_rate=spec.get("rate", 1.0), thin_p=spec.get("thin_p", 1.0))
    else:  # unreachable behind the schema
        raise ValueError(f"unknown model kind {kind!r}")

    objective_spec = document.get("objective", {"kind": "last-success"})
    okind = objective_spec["kind"]
    if okind == "last-success":
        objective = Objective.last_success()
    else:
        if "m" not in objective_spec:
            raise ValueError(f"objective {okind!r} needs m")
        objective = Objective(okind, objective_spec["m"])
    return Problem(
        kind=kind, model=model, objective=objective, raw=document, empirical_n=empirical_n
    )


def load_problem(path: str | Path) -> Problem:
    try:
        document = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ValueError(f"problem file is not valid JSON: {err}") from err
    if not isinstance(document, dict):
        raise ValueError("problem file must hold a JSON object")
    return parse_problem(document)
