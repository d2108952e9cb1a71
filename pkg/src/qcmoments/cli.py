"""Command-line pipeline: expand, sweep, ensemble, scaling, oracle.

Every command is a pure function of its flags, input files, and seed —
reruns produce byte-identical outputs.  All randomness flows from a single
``--seed`` whose subcomponent streams are derived by labeled hashing, and
output files are written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .engine import (
    MeasurementStore,
    apply_damping_noise,
    expectations_exact,
    trial_state,
)
from .ensemble import build_expectation_basis, run_ensemble
from .errors import QcmError
from .estimator import (
    assemble_moments,
    bootstrap_estimates,
    cumulants,
    infinum_estimate,
    variational_estimate,
)
from .grouping import (
    group_tpb,
    groups_from_json_dict,
    groups_to_json_dict,
    scaling_report,
    scaling_report_csv,
)
from .models import (
    LATTICE_KINDS,
    CouplingSet,
    TrialStateSpec,
    build_hamiltonian,
    build_lattice,
    model_from_json_dict,
    model_to_json_dict,
    sample_couplings,
)
from .oracle import exact_ground_energy
from .pauli import DEFAULT_TOL, WeightedPauliSum, hamiltonian_powers
from .rng import derive_seed

__all__ = ["main"]


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path: str, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=1) + "\n")


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _add_lattice_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--lattice", choices=LATTICE_KINDS, default="square",
        help="graph family (default square)",
    )
    p.add_argument("--q", type=int, help="chain length")
    p.add_argument("--rows", type=int, help="square lattice rows")
    p.add_argument("--cols", type=int, help="square lattice columns")
    p.add_argument("--cells", type=int, help="heavy-honeycomb hexagon count")


def _add_coupling_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--j", type=float, default=1.0,
        help="uniform coupling strength (default 1.0)",
    )
    p.add_argument(
        "--random-seed", type=int, default=None,
        help="draw three-decimal random couplings with this seed",
    )


def _graph_from_args(args, parser: argparse.ArgumentParser):
    if args.lattice == "chain":
        if args.q is None:
            parser.error("chain lattice needs --q")
        dims = (args.q,)
    elif args.lattice == "square":
        if args.rows is None or args.cols is None:
            parser.error("square lattice needs --rows and --cols")
        dims = (args.rows, args.cols)
    else:
        if args.cells is None:
            parser.error("heavy-honeycomb lattice needs --cells")
        dims = (args.cells,)
    return build_lattice(args.lattice, dims)


def _couplings_from_args(graph, args) -> CouplingSet:
    if args.random_seed is not None:
        return sample_couplings(graph, args.random_seed)
    return CouplingSet.uniform(graph, args.j)


def _hamiltonian_from_args(args, parser):
    """(hamiltonian, model json payload or None, site layout or None)."""
    if getattr(args, "hamiltonian", None):
        h = WeightedPauliSum.from_json_dict(_read_json(args.hamiltonian))
        return h, None, None
    if getattr(args, "model", None):
        graph, couplings = model_from_json_dict(_read_json(args.model))
        if couplings is None:
            couplings = _couplings_from_args(graph, args)
    else:
        graph = _graph_from_args(args, parser)
        couplings = _couplings_from_args(graph, args)
    payload = model_to_json_dict(graph, couplings)
    return build_hamiltonian(graph, couplings), payload, graph.layout()


def _parse_theta_grid(text: str) -> np.ndarray:
    """Grid spec 'start:stop:count' in units of pi (or one bare value)."""
    parts = text.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise ValueError(f"theta grid must be start:stop:count, got {text!r}")
    count = int(parts[2])
    if count < 1:
        raise ValueError(f"theta grid needs count >= 1, got {count}")
    return np.linspace(float(parts[0]), float(parts[1]), count)


# -- expand --------------------------------------------------------------


def cmd_expand(args, parser) -> int:
    h, model_payload, layout = _hamiltonian_from_args(args, parser)
    os.makedirs(args.out, exist_ok=True)
    powers = hamiltonian_powers(h, args.nmax, tol=args.tol)
    if model_payload is not None:
        _write_json(os.path.join(args.out, "model.json"), model_payload)
    union: dict = {}
    rows = []
    for n in range(1, args.nmax + 1):
        hn = powers[n]
        strings = [p for p, _ in hn]
        for p in strings:
            union.setdefault(p)
        groups = group_tpb(strings, layout)
        _write_json(
            os.path.join(args.out, f"powers_n{n}.json"), hn.to_json_dict()
        )
        _write_json(
            os.path.join(args.out, f"groups_n{n}.json"),
            groups_to_json_dict(n, groups),
        )
        rows.append((str(n), len(strings), len(groups)))
    union_groups = group_tpb(list(union), layout)
    _write_json(
        os.path.join(args.out, "groups_union.json"),
        groups_to_json_dict(args.nmax, union_groups),
    )
    rows.append(("union", len(union), len(union_groups)))
    print(f"{'n':>6} {'strings':>9} {'groups':>7}")
    for name, raw, ngroups in rows:
        print(f"{name:>6} {raw:>9} {ngroups:>7}")
    return 0


# -- sweep ---------------------------------------------------------------


def _load_powers(directory: str) -> list[WeightedPauliSum]:
    sums = []
    n = 1
    while True:
        path = os.path.join(directory, f"powers_n{n}.json")
        if not os.path.exists(path):
            break
        sums.append(WeightedPauliSum.from_json_dict(_read_json(path)))
        n += 1
    if len(sums) < 4:
        raise QcmError(
            f"{directory} holds powers up to n={len(sums)}; need at least 4 "
            "(run expand with --nmax >= 4)"
        )
    return sums


def cmd_sweep(args, parser) -> int:
    sums = _load_powers(args.dir)
    q = sums[0].q
    thetas = _parse_theta_grid(args.theta) * math.pi
    groups = None
    if args.backend == "shots":
        payload = _read_json(os.path.join(args.dir, "groups_union.json"))
        _, groups = groups_from_json_dict(payload)
    union: dict = {}
    for hn in sums:
        for p, _ in hn:
            union.setdefault(p)
    strings = list(union)
    xs = np.array([p.x_mask for p in strings], dtype=np.uint64)
    zs = np.array([p.z_mask for p in strings], dtype=np.uint64)

    if args.store_out:
        os.makedirs(args.store_out, exist_ok=True)
    names = [f"m{k}" for k in range(1, len(sums) + 1)]
    names += [f"c{k}" for k in range(1, len(sums) + 1)]
    header = (
        "theta," + ",".join(names)
        + ",variational,infinum,variational_err,infinum_err"
    )
    lines = [header]
    records = []
    for i, theta in enumerate(thetas):
        state = trial_state(TrialStateSpec(q, float(theta)))
        var_err = inf_err = None
        if args.backend == "exact":
            values = expectations_exact(state, xs, zs)
            table = dict(zip(strings, values.tolist()))
            provenance = "exact"
        else:
            store = MeasurementStore.measure(
                state, groups, args.shots, derive_seed(args.seed, "theta", i)
            )
            table = store.expectations(groups)
            provenance = "sampled"
            if args.store_out:
                _atomic_write(
                    os.path.join(args.store_out, f"store_theta{i:02d}.json"),
                    store.dumps(),
                )
        if args.damping:
            table = apply_damping_noise(table, args.damping)
        moments = assemble_moments(sums, table, provenance)
        c = cumulants(moments)
        var = variational_estimate(c)
        inf = infinum_estimate(c)
        if args.backend == "shots":
            boot = bootstrap_estimates(
                store,
                groups,
                sums,
                resamples=args.resamples,
                seed=derive_seed(args.seed, "bootstrap", i),
                damping=args.damping,
            )
            var_err = boot.variational_std
            inf_err = boot.infinum_std
        cells = [repr(float(theta))]
        cells += [repr(v) for v in moments.values]
        cells += [repr(v) for v in c.values]
        cells += [repr(var.value), repr(inf.value)]
        cells += ["" if var_err is None else repr(var_err)]
        cells += ["" if inf_err is None else repr(inf_err)]
        lines.append(",".join(cells))
        records.append(
            {
                "theta": float(theta),
                "moments": list(moments.values),
                "cumulants": list(c.values),
                "variational": var.value,
                "infinum": inf.value,
                "infinum_err": 0.0 if inf_err is None else inf_err,
                "fallback": inf.fallback,
            }
        )
    _atomic_write(args.out, "\n".join(lines) + "\n")
    if args.records:
        _write_json(args.records, {"records": records})
    print(f"wrote {len(thetas)} rows to {args.out}")
    return 0


# -- ensemble ------------------------------------------------------------


def cmd_ensemble(args, parser) -> int:
    graph = _graph_from_args(args, parser)
    theta = args.theta * math.pi
    basis = build_expectation_basis(
        graph,
        theta,
        nmax=args.nmax,
        backend=args.backend,
        shots=args.shots,
        seed=derive_seed(args.seed, "basis"),
    )
    with_exact = {"auto": None, "on": True, "off": False}[args.exact]
    result = run_ensemble(
        graph,
        theta,
        args.instances,
        args.seed,
        basis=basis,
        with_exact=with_exact,
        nmax=args.nmax,
        tol=args.tol,
    )
    _atomic_write(args.out, result.to_csv())
    if args.hist:
        _write_json(args.hist, result.histogram())
    for key, value in result.summary().items():
        print(f"{key}: {value}")
    return 0


# -- scaling -------------------------------------------------------------


def cmd_scaling(args, parser) -> int:
    q_values = [int(part) for part in args.q.split(",")]
    rows = []
    for q in q_values:
        rows.extend(scaling_report(args.family, [q], n=args.n, tol=args.tol))
        last = rows[-1]
        print(f"q={last['q']} raw={last['raw']} groups={last['groups']}")
    csv = scaling_report_csv(rows)
    if args.out:
        _atomic_write(args.out, csv)
    else:
        sys.stdout.write(csv)
    return 0


# -- oracle --------------------------------------------------------------


def cmd_oracle(args, parser) -> int:
    h, _, _ = _hamiltonian_from_args(args, parser)
    energy = exact_ground_energy(h, allow_stretch=args.stretch)
    print(repr(energy))
    return 0


# -- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcm",
        description=(
            "Moment-based ground-state energy pipeline: expand Hamiltonian "
            "powers, group measurement bases, sweep trial states, and "
            "compare against exact diagonalization."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "expand", help="expand H^1..H^nmax and write power/group files"
    )
    _add_lattice_args(p)
    _add_coupling_args(p)
    p.add_argument("--hamiltonian", help="JSON file with an explicit sum")
    p.add_argument("--model", help="JSON model file (graph and couplings)")
    p.add_argument("--nmax", type=int, default=4)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser(
        "sweep", help="estimate energies over a theta grid from expand output"
    )
    p.add_argument("--dir", required=True, help="directory from expand")
    p.add_argument(
        "--theta", default="0.7:1.3:13",
        help="grid start:stop:count in units of pi (default 0.7:1.3:13)",
    )
    p.add_argument("--backend", choices=("exact", "shots"), default="exact")
    p.add_argument("--shots", type=int, default=5120)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--damping", type=float, default=0.0)
    p.add_argument("--resamples", type=int, default=200)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--records", help="also write estimate records JSON here")
    p.add_argument(
        "--store-out", help="directory for per-theta measurement stores"
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "ensemble", help="random-coupling ensemble via measurement recycling"
    )
    _add_lattice_args(p)
    p.add_argument("--instances", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--theta", type=float, default=1.0, help="units of pi (default 1.0)"
    )
    p.add_argument("--backend", choices=("exact", "shots"), default="exact")
    p.add_argument("--shots", type=int, default=8192)
    p.add_argument("--nmax", type=int, default=4)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument(
        "--exact", choices=("auto", "on", "off"), default="auto",
        help="attach exact oracle energies (auto: only when cheap)",
    )
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--hist", help="also write histogram JSON here")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser(
        "scaling", help="string/group counts for H^n across lattice sizes"
    )
    p.add_argument("--family", choices=LATTICE_KINDS, default="square")
    p.add_argument("--q", required=True, help="comma-separated qubit counts")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("oracle", help="exact ground energy by diagonalization")
    _add_lattice_args(p)
    _add_coupling_args(p)
    p.add_argument("--hamiltonian", help="JSON file with an explicit sum")
    p.add_argument("--model", help="JSON model file (graph and couplings)")
    p.add_argument(
        "--stretch", action="store_true",
        help="allow the iterative solver beyond its default size guard",
    )
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (QcmError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
