"""Moments, cumulants, and ground-state energy estimates.

From Hamiltonian moments ``m_n = <H^n>`` in a trial state, connected
cumulants follow the recursion

    c_n = m_n - sum_{p=0}^{n-2} C(n-1, p) * c_{p+1} * m_{n-1-p}

with ``m_0 = 1``.  The infinum estimate corrects the variational value
``c_1`` using the first four cumulants:

    E = c_1 - c_2^2 / (c_3^2 - c_2*c_4) * (sqrt(3*c_3^2 - 2*c_2*c_4) - c_3)

which is exact whenever the trial state overlaps only two eigenstates.  A
numeric route minimizes the same truncated auxiliary series

    alpha(z) = c_1 + z*(c_3/c_2) + z^2*(3c_3^3 - 4c_2c_3c_4 + c_2^2c_5)/(4c_2^4)
    beta^2(z) = z*c_2 + z^2*(c_2*c_4 - c_3^2)/(2*c_2^2)

over ``f(z) = alpha(z) - 2*beta(z)`` for ``z > 0`` with ``beta^2 >= 0``; at
first order in z (alpha truncated after its linear term) its minimum
reproduces the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import EstimateUndefinedError, MissingExpectationError
from .pauli import PauliString, WeightedPauliSum

__all__ = [
    "MomentVector",
    "CumulantVector",
    "EnergyEstimate",
    "assemble_moments",
    "moments_from_state",
    "cumulant_sequence",
    "cumulants",
    "variational_estimate",
    "infinum_estimate",
    "infinum_numeric_z",
    "bootstrap_estimates",
    "BootstrapSummary",
]


@dataclass(frozen=True)
class MomentVector:
    """Moments ``m_1 .. m_nmax`` with their provenance (exact or sampled)."""

    values: tuple[float, ...]
    provenance: str = "exact"

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("need at least the first moment")
        if self.provenance not in ("exact", "sampled"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "exact" and len(self.values) >= 2:
            m1, m2 = self.values[0], self.values[1]
            if m2 < m1 * m1 - 1e-9 * (1.0 + m1 * m1):
                raise ValueError(
                    f"exact moments violate m2 >= m1^2: m1={m1!r}, m2={m2!r}"
                )

    @property
    def nmax(self) -> int:
        return len(self.values)

    def moment(self, n: int) -> float:
        if not 1 <= n <= self.nmax:
            raise ValueError(f"moment order {n} outside 1..{self.nmax}")
        return self.values[n - 1]


@dataclass(frozen=True)
class CumulantVector:
    """Cumulants ``c_1 .. c_nmax`` with provenance."""

    values: tuple[float, ...]
    provenance: str = "exact"

    @property
    def nmax(self) -> int:
        return len(self.values)

    def cumulant(self, n: int) -> float:
        if not 1 <= n <= self.nmax:
            raise ValueError(f"cumulant order {n} outside 1..{self.nmax}")
        return self.values[n - 1]


@dataclass(frozen=True)
class EnergyEstimate:
    """An energy value with its method tag and diagnostics."""

    value: float
    method: str
    z_star: float | None = None
    z_order: int | None = None
    fallback: str = "none"


def assemble_moments(
    sums: Sequence[WeightedPauliSum],
    expectations: Mapping[PauliString, float],
    provenance: str = "sampled",
) -> MomentVector:
    """Contract each power's weights with per-string expectations.

    ``sums`` holds ``H^1 .. H^nmax`` (nmax >= 4).  A string missing from
    ``expectations`` raises :class:`MissingExpectationError` naming it.
    """
    if len(sums) < 4:
        raise ValueError(f"need powers up to at least H^4, got {len(sums)}")
    values = []
    for hn in sums:
        total = 0.0
        for p, w in hn:
            e = expectations.get(p)
            if e is None:
                raise MissingExpectationError(p.label)
            total += w * e
        values.append(total)
    return MomentVector(tuple(values), provenance)


def moments_from_state(sums: Sequence[WeightedPauliSum], state) -> MomentVector:
    """Exact moments via vectorized pair-product expectations."""
    from .engine import expectations_exact

    if len(sums) < 4:
        raise ValueError(f"need powers up to at least H^4, got {len(sums)}")
    values = []
    for hn in sums:
        xs, zs, ws = hn.masks()
        values.append(float(ws @ expectations_exact(state, xs, zs)))
    return MomentVector(tuple(values), "exact")


def cumulant_sequence(moments: Sequence) -> list:
    """Cumulants from moments via the binomial recursion.

    Works with any numeric type that supports + - * (floats, Fractions),
    which lets tests verify the closed forms exactly.
    """
    m = [1] + list(moments)
    c: list = []
    for n in range(1, len(m)):
        total = m[n]
        for p in range(0, n - 1):
            total = total - math.comb(n - 1, p) * c[p] * m[n - 1 - p]
        c.append(total)
    return c


def cumulants(moments: MomentVector) -> CumulantVector:
    values = cumulant_sequence(moments.values)
    return CumulantVector(tuple(float(v) for v in values), moments.provenance)


def variational_estimate(c: CumulantVector) -> EnergyEstimate:
    """The plain variational energy, ``c_1 = <H>``."""
    return EnergyEstimate(c.values[0], "variational")


def _eigenstate_guard(c: CumulantVector) -> float:
    c1 = c.values[0]
    return 1e-10 * (1.0 + c1 * c1)


def infinum_estimate(c: CumulantVector) -> EnergyEstimate:
    """Closed-form infinum estimate from ``c_1 .. c_4`` with guards.

    Falls back to returning ``c_1`` when ``c_2`` is at eigenstate level,
    and to the numeric z-minimization when the closed form's radicand goes
    negative or its denominator is at noise level.
    """
    if c.nmax < 4:
        raise ValueError(f"need cumulants up to c_4, got {c.nmax}")
    c1, c2, c3, c4 = c.values[:4]
    if c2 <= _eigenstate_guard(c):
        return EnergyEstimate(c1, "infinum-analytic", fallback="eigenstate")
    den = c3 * c3 - c2 * c4
    rad = 3.0 * c3 * c3 - 2.0 * c2 * c4
    eps_den = 1e-12 * (1.0 + c2 * c2)
    if rad < 0.0 or abs(den) <= eps_den:
        numeric = infinum_numeric_z(c, z_order=1)
        return EnergyEstimate(
            numeric.value,
            numeric.method,
            z_star=numeric.z_star,
            z_order=numeric.z_order,
            fallback="numeric-z",
        )
    value = c1 - (c2 * c2 / den) * (math.sqrt(rad) - c3)
    return EnergyEstimate(value, "infinum-analytic")


def infinum_numeric_z(c: CumulantVector, z_order: int = 1) -> EnergyEstimate:
    """Minimize the truncated auxiliary series ``alpha(z) - 2*beta(z)``.

    ``z_order = 1`` keeps alpha through its linear term (needs ``c_4``);
    ``z_order = 2`` adds alpha's quadratic term (needs ``c_5``).  beta^2
    always carries both printed terms.  The minimizer is located to
    ``|dz| < 1e-10``.
    """
    if z_order not in (1, 2):
        raise ValueError(f"z_order must be 1 or 2, got {z_order}")
    needed = 4 if z_order == 1 else 5
    if c.nmax < needed:
        raise ValueError(
            f"z_order={z_order} needs cumulants up to c_{needed}, got {c.nmax}"
        )
    c1, c2, c3, c4 = c.values[:4]
    if c2 <= _eigenstate_guard(c):
        # Covers sampled c2 that noise pushed negative: beta^2 has no usable
        # domain, so the best statement is the variational value itself.
        return EnergyEstimate(
            c1, "infinum-numeric-z", z_order=z_order, fallback="eigenstate"
        )
    a = c3 / c2
    d = (c2 * c4 - c3 * c3) / (2.0 * c2 * c2)
    e = 0.0
    if z_order == 2:
        c5 = c.values[4]
        e = (3.0 * c3**3 - 4.0 * c2 * c3 * c4 + c2 * c2 * c5) / (4.0 * c2**4)

    def beta_sq(z: float) -> float:
        return z * c2 + z * z * d

    def f(z: float) -> float:
        bsq = beta_sq(z)
        if bsq < 0.0:
            return math.inf
        return c1 + a * z + e * z * z - 2.0 * math.sqrt(bsq)

    if d < 0.0:
        z_hi = -c2 / d
    else:
        # The domain is unbounded; make sure f eventually grows before
        # bracketing a minimum.
        slope = a - 2.0 * math.sqrt(d) if d > 0.0 else a
        if e < 0.0 or (e == 0.0 and (slope < 0.0 or (d == 0.0 and a <= 0.0))):
            raise EstimateUndefinedError(
                "truncated z-series is unbounded below; no minimum exists"
            )
        z_hi = 1.0
        while f(z_hi) <= f(z_hi / 2.0):
            z_hi *= 2.0
            if z_hi > 1e12:
                raise EstimateUndefinedError(
                    "no interior minimum located for the z-series"
                )

    res = minimize_scalar(
        f,
        bounds=(0.0, z_hi),
        method="bounded",
        options={"xatol": 1e-10, "maxiter": 5000},
    )
    if not res.success:
        raise EstimateUndefinedError(f"z-minimization failed: {res.message}")
    z_star = float(res.x)
    value = float(res.fun)
    # The infimum may also sit at the z -> 0 edge (value c1).
    if c1 < value:
        value = c1
        z_star = 0.0
    return EnergyEstimate(
        value, "infinum-numeric-z", z_star=z_star, z_order=z_order
    )


# -- bootstrap ----------------------------------------------------------------


@dataclass(frozen=True)
class BootstrapSummary:
    """Resampling spread of the sampled estimates."""

    resamples: int
    variational_std: float
    infinum_std: float
    variational_samples: tuple[float, ...]
    infinum_samples: tuple[float, ...]


def bootstrap_estimates(
    store,
    groups,
    sums: Sequence[WeightedPauliSum],
    resamples: int = 200,
    seed: int = 0,
    damping: float = 0.0,
) -> BootstrapSummary:
    """Bootstrap the sampled pipeline by resampling group counts.

    Each replica redraws every group's counts from a multinomial with the
    observed frequencies, rebuilds expectations, moments, cumulants, and
    both energy estimates.  Randomness comes from one stream keyed by
    ``(seed, "bootstrap")``; groups are always visited in a fixed order.
    """
    from .engine import _string_to_bits

    if resamples < 2:
        raise ValueError(f"need at least 2 resamples, got {resamples}")

    # Index the union of member strings.
    position: dict[tuple[int, int], int] = {}
    group_data = []
    for group in groups:
        counts = store.records[group.label.label]
        outcome_bits = np.array(
            [_string_to_bits(b) for b in counts], dtype=np.uint64
        )
        freq = np.array(list(counts.values()), dtype=np.float64)
        shots = freq.sum()
        signs = np.empty((len(group.members), len(freq)), dtype=np.float64)
        rows = []
        for r, member in enumerate(group.members):
            key = (member.x_mask, member.z_mask)
            if key not in position:
                position[key] = len(position)
            rows.append(position[key])
            sup = np.uint64(member.x_mask | member.z_mask)
            parity = np.bitwise_count(outcome_bits & sup) & np.uint8(1)
            signs[r] = 1.0 - 2.0 * parity.astype(np.float64)
        group_data.append((np.array(rows), signs, freq, shots))

    damp = np.ones(len(position), dtype=np.float64)
    if damping:
        factor = 1.0 - damping
        for (x, z), idx in position.items():
            damp[idx] = factor ** int.bit_count(x | z)

    sum_indices = []
    for hn in sums:
        xs, zs, ws = hn.masks()
        idx = np.empty(len(ws), dtype=np.int64)
        for i, (x, z) in enumerate(zip(xs, zs)):
            pos = position.get((int(x), int(z)))
            if pos is None:
                raise MissingExpectationError(
                    PauliString(hn.q, int(x), int(z)).label
                )
            idx[i] = pos
        sum_indices.append((idx, ws))

    from .rng import stream

    rng = stream(seed, "bootstrap")
    evec = np.empty(len(position), dtype=np.float64)
    var_samples = []
    inf_samples = []
    for _ in range(resamples):
        for rows, signs, freq, shots in group_data:
            redraw = rng.multinomial(int(shots), freq / shots).astype(np.float64)
            evec[rows] = (signs @ redraw) / shots
        ev = evec * damp
        moments = MomentVector(
            tuple(float(ws @ ev[idx]) for idx, ws in sum_indices), "sampled"
        )
        c = cumulants(moments)
        var_samples.append(variational_estimate(c).value)
        inf_samples.append(infinum_estimate(c).value)

    return BootstrapSummary(
        resamples=resamples,
        variational_std=float(np.std(var_samples, ddof=1)),
        infinum_std=float(np.std(inf_samples, ddof=1)),
        variational_samples=tuple(var_samples),
        infinum_samples=tuple(inf_samples),
    )
