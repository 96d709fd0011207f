"""JSON problem definitions and the built-in presets for the CLI.

Schema (version 1): complex numbers are ``[re, im]`` pairs (bare reals are
also accepted), matrices are row-major nested lists.

::

    {
      "schema": 1,
      "source": "paper-example" | {"matrix": [[...], ...]},
      "side_info": {"matrix": [[...], ...], "dims": [dA, dB]},   # optional
      "observable": "paper-example"
                    | {"kind": "paper-example"}
                    | {"kind": "eigenbasis"}
                    | {"kind": "classical-cost", "costs": [[...], ...]}
                    | {"kind": "blocks", "blocks": [[[...]], ...]},
      "outcomes": 2,                                             # optional
      "purification": [ ... amplitudes ... ],                    # optional
      "solver": {"restarts": 8, "max_iterations": 2000,
                 "lagrange_grid": [...], "convergence_tol": 1e-7,
                 "rng_seed": 0}                                  # optional
    }

With ``side_info`` the joint state is the source and the observable blocks
act on reference (x) side information; a ``classical-cost`` observable is
lifted as sum_z d(z, x) |w_z><w_z|_R (x) I_B over the joint eigenbasis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from numbers import Real

import numpy as np

from .distortion import (
    DistortionObservable,
    classical_cost_observable,
    eigenbasis_observable,
    example_observable,
)
from .operators import eig_hermitian, tensor, trace_distance
from .solver import SolverOptions
from .states import (
    DensityOperator,
    Purification,
    example_source,
    purify,
    purify_joint,
)

SCHEMA_VERSION = 1

PAPER_PRESET = "paper-example"


class ProblemSpecError(ValueError):
    """A problem definition is malformed or inconsistent."""


def _parse_scalar(entry) -> complex:
    if isinstance(entry, Real):
        return complex(entry)
    if isinstance(entry, (list, tuple)) and len(entry) == 2 and all(isinstance(v, Real) for v in entry):
        return complex(entry[0], entry[1])
    raise ProblemSpecError(f"expected a real number or [re, im] pair, got {entry!r}")


def _parse_matrix(rows, what: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ProblemSpecError(f"{what} must be a nonempty nested list of rows")
    try:
        return np.array([[_parse_scalar(v) for v in row] for row in rows], dtype=complex)
    except ProblemSpecError as exc:
        raise ProblemSpecError(f"{what}: {exc}") from None


def _parse_vector(entries, what: str) -> np.ndarray:
    if not isinstance(entries, list) or not entries:
        raise ProblemSpecError(f"{what} must be a nonempty list")
    return np.array([_parse_scalar(v) for v in entries], dtype=complex)


@dataclass(frozen=True)
class ProblemSpec:
    """Validated problem definition ready for the solvers."""

    source: DensityOperator
    observable_spec: dict
    outcomes: int | None = None
    joint: DensityOperator | None = None
    side_dims: tuple[int, int] | None = None
    purification_vector: np.ndarray | None = None
    solver: SolverOptions = SolverOptions()
    preset: str | None = None

    @property
    def has_side_info(self) -> bool:
        return self.joint is not None

    def build(self) -> tuple[Purification, DistortionObservable, int]:
        """Purification, observable, and outcome count for the plain setting."""
        if self.purification_vector is not None:
            dim = self.source.dim
            psi = Purification(self.purification_vector, dim, (dim,))
            if trace_distance(psi.reduced_system_state(), self.source.mat) > 1e-9:
                raise ProblemSpecError("supplied purification does not reduce to the source state")
        else:
            psi = purify(self.source)
        obs = self._build_observable(self.source)
        return psi, obs, self._resolve_outcomes(obs)

    def build_qsi(self) -> tuple[Purification, DistortionObservable, int]:
        """Purification, observable, and outcome count for the QSI setting."""
        if self.joint is None or self.side_dims is None:
            raise ProblemSpecError("side_info with dims is required for the QSI setting")
        psi = purify_joint(self.joint, self.side_dims)
        obs = self._build_observable_qsi(psi)
        return psi, obs, self._resolve_outcomes(obs)

    def _resolve_outcomes(self, obs: DistortionObservable) -> int:
        if self.outcomes is None:
            return obs.outcome_count
        if self.outcomes != obs.outcome_count:
            raise ProblemSpecError(
                f"outcomes={self.outcomes} does not match the observable's {obs.outcome_count} blocks"
            )
        return self.outcomes

    def _build_observable(self, rho: DensityOperator) -> DistortionObservable:
        kind = self.observable_spec.get("kind")
        if kind == PAPER_PRESET:
            return example_observable()
        if kind == "eigenbasis":
            return eigenbasis_observable(rho)
        if kind == "classical-cost":
            costs = np.asarray(self.observable_spec["costs"], dtype=float)
            return classical_cost_observable(costs, eig_hermitian(rho.mat).eigenvectors)
        if kind == "blocks":
            return DistortionObservable(tuple(self.observable_spec["blocks"]))
        raise ProblemSpecError(f"unknown observable kind {kind!r}")

    def _build_observable_qsi(self, psi: Purification) -> DistortionObservable:
        kind = self.observable_spec.get("kind")
        _, d_b = psi.system_dims
        if kind == "classical-cost":
            costs = np.asarray(self.observable_spec["costs"], dtype=float)
            base = classical_cost_observable(costs, eig_hermitian(self.joint.mat).eigenvectors)
            eye_b = np.eye(d_b)
            return DistortionObservable(tuple(tensor(b, eye_b) for b in base.blocks))
        if kind == "blocks":
            return DistortionObservable(tuple(self.observable_spec["blocks"]))
        raise ProblemSpecError(f"observable kind {kind!r} is not supported with side information")


def paper_problem(solver: SolverOptions | None = None) -> ProblemSpec:
    """The worked qubit example: |+>/|0> source with its natural observable."""
    return ProblemSpec(
        source=example_source(),
        observable_spec={"kind": PAPER_PRESET},
        outcomes=2,
        solver=solver or SolverOptions(),
        preset=PAPER_PRESET,
    )


def _parse_solver(data) -> SolverOptions:
    if data is None:
        return SolverOptions()
    if not isinstance(data, dict):
        raise ProblemSpecError("solver must be an object")
    known = {"restarts", "max_iterations", "lagrange_grid", "convergence_tol", "rng_seed"}
    unknown = set(data) - known
    if unknown:
        raise ProblemSpecError(f"unknown solver options {sorted(unknown)}")
    kwargs = dict(data)
    if "lagrange_grid" in kwargs:
        kwargs["lagrange_grid"] = tuple(float(m) for m in kwargs["lagrange_grid"])
    try:
        return SolverOptions(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ProblemSpecError(f"invalid solver options: {exc}") from None


def _parse_observable_spec(data) -> dict:
    if data == PAPER_PRESET:
        return {"kind": PAPER_PRESET}
    if not isinstance(data, dict) or "kind" not in data:
        raise ProblemSpecError("observable must be 'paper-example' or an object with a 'kind'")
    kind = data["kind"]
    if kind in (PAPER_PRESET, "eigenbasis"):
        return {"kind": kind}
    if kind == "classical-cost":
        costs = data.get("costs")
        if not isinstance(costs, list):
            raise ProblemSpecError("classical-cost observable needs a 'costs' matrix")
        return {"kind": kind, "costs": [[float(v) for v in row] for row in costs]}
    if kind == "blocks":
        blocks = data.get("blocks")
        if not isinstance(blocks, list) or not blocks:
            raise ProblemSpecError("blocks observable needs a nonempty 'blocks' list")
        return {"kind": kind, "blocks": tuple(_parse_matrix(b, f"block {i}") for i, b in enumerate(blocks))}
    raise ProblemSpecError(f"unknown observable kind {kind!r}")


def parse_problem(data: dict) -> ProblemSpec:
    """Validate a decoded JSON document into a :class:`ProblemSpec`."""
    if not isinstance(data, dict):
        raise ProblemSpecError("problem definition must be a JSON object")
    if data.get("schema") != SCHEMA_VERSION:
        raise ProblemSpecError(f"schema must be {SCHEMA_VERSION}, got {data.get('schema')!r}")
    known = {"schema", "source", "side_info", "observable", "outcomes", "purification", "solver"}
    unknown = set(data) - known
    if unknown:
        raise ProblemSpecError(f"unknown fields {sorted(unknown)}")

    joint = None
    side_dims = None
    if "side_info" in data:
        side = data["side_info"]
        if not isinstance(side, dict) or "matrix" not in side or "dims" not in side:
            raise ProblemSpecError("side_info needs 'matrix' and 'dims'")
        dims = side["dims"]
        if not (isinstance(dims, list) and len(dims) == 2):
            raise ProblemSpecError("side_info dims must be [dA, dB]")
        side_dims = (int(dims[0]), int(dims[1]))
        try:
            joint = DensityOperator(_parse_matrix(side["matrix"], "side_info matrix"))
        except ValueError as exc:
            raise ProblemSpecError(f"invalid side_info state: {exc}") from None

    source_data = data.get("source")
    if source_data == PAPER_PRESET:
        source = example_source()
        preset = PAPER_PRESET
    elif isinstance(source_data, dict) and "matrix" in source_data:
        try:
            source = DensityOperator(_parse_matrix(source_data["matrix"], "source matrix"))
        except ValueError as exc:
            raise ProblemSpecError(f"invalid source state: {exc}") from None
        preset = None
    elif source_data is None and joint is not None:
        source = _marginal_source(joint, side_dims)
        preset = None
    else:
        raise ProblemSpecError("source must be 'paper-example' or an object with a 'matrix'")

    if joint is not None and side_dims is not None and source_data is not None:
        marginal = _marginal_source(joint, side_dims)
        if trace_distance(marginal.mat, source.mat) > 1e-9:
            raise ProblemSpecError("source does not match the A-marginal of side_info")

    purification_vector = None
    if "purification" in data:
        purification_vector = _parse_vector(data["purification"], "purification")

    outcomes = data.get("outcomes")
    if outcomes is not None:
        outcomes = int(outcomes)
        if outcomes < 1:
            raise ProblemSpecError("outcomes must be at least 1")

    return ProblemSpec(
        source=source,
        observable_spec=_parse_observable_spec(data.get("observable")),
        outcomes=outcomes,
        joint=joint,
        side_dims=side_dims,
        purification_vector=purification_vector,
        solver=_parse_solver(data.get("solver")),
        preset=preset,
    )


def _marginal_source(joint: DensityOperator, side_dims: tuple[int, int]) -> DensityOperator:
    from .operators import partial_trace

    return DensityOperator(partial_trace(joint.mat, list(side_dims), [0]))


def load_problem(path) -> ProblemSpec:
    """Read and validate a JSON problem definition from ``path``."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ProblemSpecError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ProblemSpecError(f"invalid JSON in {path}: {exc}") from None
    return parse_problem(data)
