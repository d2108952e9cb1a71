"""Random-coupling ensembles with measurement recycling.

Expectations depend only on the trial state and the Pauli strings, never on
the coupling weights, so one expectation table built from a generic
(full-precision, strictly positive) coupling set serves every random
instance on the same graph: each instance only re-expands its own powers
symbolically and contracts the stored numbers with fresh weights.  The
generic set's string support is maximal — random instances can lose strings
to zero couplings but never gain new ones.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .engine import MeasurementStore, expectations_exact, trial_state
from .estimator import (
    EnergyEstimate,
    assemble_moments,
    cumulants,
    infinum_estimate,
    variational_estimate,
)
from .grouping import TPBGroup, group_tpb
from .models import (
    CouplingSet,
    LatticeGraph,
    TrialStateSpec,
    build_hamiltonian,
    generic_couplings,
    sample_couplings,
)
from .oracle import DENSE_MAX_QUBITS, exact_ground_energy
from .pauli import DEFAULT_TOL, PauliString, WeightedPauliSum, hamiltonian_powers
from .rng import derive_seed

__all__ = [
    "ExpectationBasis",
    "EnsembleRecord",
    "EnsembleResult",
    "HISTOGRAM_EDGES",
    "build_expectation_basis",
    "coupling_digest",
    "recycle_estimate",
    "run_ensemble",
]

# Fixed histogram support for energy-density distributions; identical edges
# across runs keep emitted histograms directly comparable.
HISTOGRAM_EDGES = tuple(np.linspace(-4.0, 2.0, 121))


@dataclass(frozen=True)
class ExpectationBasis:
    """Reusable per-string expectations for one (graph, theta) pair."""

    graph: LatticeGraph
    theta: float
    nmax: int
    expectations: Mapping[PauliString, float]
    provenance: str
    groups: tuple[TPBGroup, ...]
    store: MeasurementStore | None = None


def build_expectation_basis(
    graph: LatticeGraph,
    theta: float,
    nmax: int = 4,
    backend: str = "exact",
    shots: int = 5120,
    seed: int = 0,
) -> ExpectationBasis:
    """Expectation table over the union string set of generic-coupling H^n.

    The generic couplings are full-precision draws from (0, 1), expanded at
    zero tolerance so that no string an actual instance can produce is
    missing.  ``backend`` selects exact pair-product values or one simulated
    measurement of the TPB groups.
    """
    if backend not in ("exact", "shots"):
        raise ValueError(f"unknown backend {backend!r}")
    h = build_hamiltonian(graph, generic_couplings(graph, seed))
    powers = hamiltonian_powers(h, nmax, tol=0.0)
    union: dict[PauliString, None] = {}
    for hn in powers[1:]:
        for p, _ in hn:
            union.setdefault(p)
    strings = list(union)
    groups = tuple(group_tpb(strings, graph.layout()))
    state = trial_state(TrialStateSpec(graph.q, theta))
    if backend == "exact":
        xs = np.array([p.x_mask for p in strings], dtype=np.uint64)
        zs = np.array([p.z_mask for p in strings], dtype=np.uint64)
        values = expectations_exact(state, xs, zs)
        table = dict(zip(strings, values.tolist()))
        return ExpectationBasis(graph, theta, nmax, table, "exact", groups)
    store = MeasurementStore.measure(state, groups, shots, seed)
    table = store.expectations(groups)
    return ExpectationBasis(
        graph, theta, nmax, table, "sampled", groups, store
    )


def recycle_estimate(
    basis: ExpectationBasis,
    couplings: CouplingSet,
    tol: float = DEFAULT_TOL,
) -> tuple[EnergyEstimate, EnergyEstimate]:
    """(variational, infinum) for one coupling instance, reusing the basis.

    Only the symbolic power expansion is redone; every expectation value is
    looked up.  A lookup miss raises the missing-string error — it means the
    basis was built from a degenerate coupling set.
    """
    h = build_hamiltonian(basis.graph, couplings)
    powers = hamiltonian_powers(h, basis.nmax, tol=tol)
    moments = assemble_moments(
        powers[1:], basis.expectations, basis.provenance
    )
    c = cumulants(moments)
    return variational_estimate(c), infinum_estimate(c)


def coupling_digest(couplings: CouplingSet) -> str:
    """Short content hash identifying a coupling set in reports."""
    text = couplings.digest_text()
    return hashlib.sha256(text.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class EnsembleRecord:
    seed: int
    jdigest: str
    variational: float
    infinum: float
    exact: float | None = None


@dataclass(frozen=True)
class EnsembleResult:
    """Per-instance estimates plus summary and report helpers."""

    theta: float
    records: tuple[EnsembleRecord, ...]

    def summary(self) -> dict:
        var = np.array([r.variational for r in self.records])
        inf = np.array([r.infinum for r in self.records])
        out = {
            "instances": len(self.records),
            "mean_variational": float(var.mean()),
            "mean_infinum": float(inf.mean()),
        }
        if all(r.exact is not None for r in self.records) and self.records:
            ex = np.array([r.exact for r in self.records])
            out["mean_exact"] = float(ex.mean())
            out["mean_abs_dev_variational"] = float(np.abs(var - ex).mean())
            out["mean_abs_dev_infinum"] = float(np.abs(inf - ex).mean())
        return out

    def to_csv(self) -> str:
        lines = ["seed,jdigest,variational,infinum,exact"]
        for r in self.records:
            exact = "" if r.exact is None else repr(r.exact)
            lines.append(
                f"{r.seed},{r.jdigest},{r.variational!r},{r.infinum!r},{exact}"
            )
        return "\n".join(lines) + "\n"

    def histogram(self) -> dict:
        edges = np.array(HISTOGRAM_EDGES)
        out = {"edges": list(HISTOGRAM_EDGES)}
        for name, values in (
            ("variational", [r.variational for r in self.records]),
            ("infinum", [r.infinum for r in self.records]),
        ):
            counts, _ = np.histogram(values, bins=edges)
            out[name] = counts.tolist()
        if all(r.exact is not None for r in self.records) and self.records:
            counts, _ = np.histogram(
                [r.exact for r in self.records], bins=edges
            )
            out["exact"] = counts.tolist()
        return out


def run_ensemble(
    graph: LatticeGraph,
    theta: float,
    instance_count: int,
    master_seed: int,
    basis: ExpectationBasis | None = None,
    with_exact: bool | None = None,
    nmax: int = 4,
    tol: float = DEFAULT_TOL,
) -> EnsembleResult:
    """Estimate ``instance_count`` random coupling instances from one basis.

    Instance seeds derive deterministically from the master seed, so the
    whole result is a pure function of its arguments.  Exact energies are
    attached by default only where the dense oracle is cheap.
    """
    if basis is None:
        basis = build_expectation_basis(
            graph, theta, nmax, seed=derive_seed(master_seed, "basis")
        )
    if basis.graph != graph:
        raise ValueError("basis was built for a different graph")
    if with_exact is None:
        with_exact = graph.q <= DENSE_MAX_QUBITS
    records = []
    for i in range(instance_count):
        iseed = derive_seed(master_seed, "instance", i)
        couplings = sample_couplings(graph, iseed)
        var, inf = recycle_estimate(basis, couplings, tol=tol)
        exact = None
        if with_exact:
            exact = exact_ground_energy(build_hamiltonian(graph, couplings))
        records.append(
            EnsembleRecord(
                iseed, coupling_digest(couplings), var.value, inf.value, exact
            )
        )
    return EnsembleResult(theta, tuple(records))
