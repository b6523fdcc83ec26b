"""Declarative inequality restriction sets on (phi, Q).

Every restriction reduces to a scalar margin m(phi, Q) with the
convention "satisfied iff m >= 0". A :class:`MarginEvaluator` compiles a
set at a fixed phi into a form where one evaluation costs a single small
matrix product plus one quadratic form per narrative-contribution
restriction; the samplers call it millions of times.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular

from .model import InnovationSeries, IrfCoefficients, ReducedFormParams, compute_irf_coefficients

KINDS = (
    "irf-sign",
    "irf-ranking",
    "structural-sign",
    "elasticity-bound",
    "irf-ratio-bound",
    "narrative-shock-sign",
    "narrative-hd-most",
    "narrative-hd-least",
    "sign-normalisation",
)

NORMALISATION_MODES = ("none", "soft", "mechanical")


class SchemaError(ValueError):
    """Restriction config does not validate; message carries the path."""


class UnknownVariable(SchemaError):
    pass


class UnknownDate(KeyError):
    """Episode date not present in the dataset's date index."""


class MissingContext(ValueError):
    """Narrative restrictions need innovations; none were supplied."""


@dataclass(frozen=True)
class Restriction:
    """One inequality restriction; unused fields stay None."""

    kind: str
    variable: int | None = None
    shock: int | None = None
    horizon: int = 0
    sign: float = 1.0
    cumulative: bool = False
    # ranking
    variable2: int | None = None
    horizon2: int | None = None
    # ratio / elasticity bounds
    numerator: int | None = None
    denominator: int | None = None
    bound: float | None = None
    direction: str = "<="
    denominator_sign: float | None = 1.0
    # narrative
    date: str | None = None
    t_index: int | None = None
    span: int = 0

    def key(self) -> tuple:
        return (
            self.kind, self.variable, self.shock, self.horizon, self.sign,
            self.cumulative, self.variable2, self.horizon2, self.numerator,
            self.denominator, self.bound, self.direction, self.denominator_sign,
            self.date, self.t_index, self.span,
        )


@dataclass(frozen=True)
class RestrictionSet:
    """Ordered restrictions plus the handling of the sign normalisation.

    ``normalisation`` declares whether diag(A_0) >= 0 is part of the
    identified set and how samplers impose it: "soft" appends one margin
    per shock, "mechanical" leaves the margins out (the accept-reject
    sampler flips columns instead), "none" drops it entirely.
    """

    restrictions: tuple[Restriction, ...]
    n: int
    normalisation: str = "soft"
    variables: tuple[str, ...] = ()
    shocks: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.normalisation not in NORMALISATION_MODES:
            raise SchemaError(f"unknown sign_normalisation {self.normalisation!r}")
        if not self.restrictions:
            raise SchemaError("at least one restriction is required")

    @property
    def s_base(self) -> int:
        return len(self.restrictions)

    def margin_count(self, mode: str | None = None) -> int:
        mode = self.normalisation if mode is None else mode
        return self.s_base + (self.n if mode == "soft" else 0)

    @property
    def has_narrative(self) -> bool:
        return any(r.kind.startswith("narrative") for r in self.restrictions)

    @property
    def max_horizon(self) -> int:
        h = 0
        for r in self.restrictions:
            h = max(h, r.horizon, r.horizon2 or 0, r.span)
        return h


@dataclass
class EvalContext:
    """Per-phi quantities needed by IRF and narrative margins."""

    irf: IrfCoefficients | None = None
    innovations: InnovationSeries | None = None
    date_to_index: dict[str, int] | None = None

    def resolve_index(self, r: Restriction) -> int:
        if r.t_index is not None:
            return r.t_index
        if self.date_to_index is None or r.date not in self.date_to_index:
            raise UnknownDate(r.date)
        return self.date_to_index[r.date]


class MarginEvaluator:
    """Restriction set compiled at a fixed phi.

    Linear margins collapse to rows of a single matrix A with per-row
    column picks from A @ Q; each historical-decomposition margin becomes
    a quadratic form q' G q evaluated for all shocks at once. Raw-ratio
    margins (no pinned denominator sign) are kept as a slow-path list.
    """

    def __init__(
        self,
        rset: RestrictionSet,
        phi: ReducedFormParams,
        context: EvalContext | None = None,
        mode: str | None = None,
    ):
        self.rset = rset
        self.phi = phi
        self.mode = rset.normalisation if mode is None else mode
        self.n_evals = 0
        context = context or EvalContext()
        n = phi.n

        irf = context.irf
        if irf is None or irf.horizons < rset.max_horizon:
            irf = compute_irf_coefficients(phi, rset.max_horizon)
        coeffs = irf.coeffs  # (H+1, n, n), coeffs[h, i] = c_ih

        sigma_inv = phi.sigma_tr_inv()  # lower-triangular inverse

        rows: list[np.ndarray] = []
        cols: list[int] = []
        lin_pos: list[int] = []
        offsets: list[float] = []
        hd_G: list[np.ndarray] = []
        hd_shock: list[int] = []
        hd_most: list[bool] = []
        hd_pos: list[int] = []
        self._raw_ratio: list[tuple[np.ndarray, np.ndarray, int, float, str, int]] = []

        def c_vec(i: int, h: int, cumulative: bool) -> np.ndarray:
            if cumulative:
                return coeffs[: h + 1, i, :].sum(axis=0)
            return coeffs[h, i, :]

        def innovation_dir(t: int) -> np.ndarray:
            if context.innovations is None:
                raise MissingContext(
                    "narrative restrictions need an innovation series"
                )
            if t < 0 or t >= len(context.innovations):
                raise UnknownDate(f"innovation index {t} out of range")
            return solve_triangular(
                phi.sigma_tr, context.innovations.u[t], lower=True,
                check_finite=False,
            )

        def add_linear(a: np.ndarray, col: int, pos: int, offset: float = 0.0) -> None:
            rows.append(a)
            cols.append(col)
            lin_pos.append(pos)
            offsets.append(offset)

        for pos, r in enumerate(rset.restrictions):
            if r.kind == "irf-sign":
                # optional level bound: sign * (eta - bound) >= 0
                b = r.bound or 0.0
                add_linear(
                    r.sign * c_vec(r.variable, r.horizon, r.cumulative),
                    r.shock, pos, offset=-r.sign * b,
                )
            elif r.kind == "irf-ranking":
                i2 = r.variable if r.variable2 is None else r.variable2
                a = c_vec(r.variable, r.horizon, r.cumulative) - c_vec(
                    i2, r.horizon2, r.cumulative
                )
                add_linear(a, r.shock, pos)
            elif r.kind == "structural-sign":
                add_linear(r.sign * sigma_inv[:, r.variable].copy(), r.shock, pos)
            elif r.kind in ("elasticity-bound", "irf-ratio-bound"):
                num = c_vec(r.numerator, r.horizon, r.cumulative)
                den = c_vec(r.denominator, r.horizon, r.cumulative)
                if r.denominator_sign is None:
                    self._raw_ratio.append(
                        (num, den, r.shock, r.bound, r.direction, pos)
                    )
                    continue
                # cross-multiplied: num/den <= b with den >= 0 gives
                # b*den - num >= 0; each flip (direction, den sign) negates
                a = r.bound * den - num
                if r.direction == ">=":
                    a = -a
                if r.denominator_sign < 0:
                    a = -a
                add_linear(a, r.shock, pos)
            elif r.kind == "narrative-shock-sign":
                t = context.resolve_index(r)
                add_linear(r.sign * innovation_dir(t), r.shock, pos)
            elif r.kind in ("narrative-hd-most", "narrative-hd-least"):
                t = context.resolve_index(r)
                G = np.zeros((n, n))
                for l in range(r.span + 1):
                    G += np.outer(coeffs[l, r.variable, :], innovation_dir(t + r.span - l))
                hd_G.append(G)
                hd_shock.append(r.shock)
                hd_most.append(r.kind == "narrative-hd-most")
                hd_pos.append(pos)
            elif r.kind == "sign-normalisation":
                add_linear(sigma_inv[:, r.shock].copy(), r.shock, pos)
            else:
                raise SchemaError(f"unknown restriction kind {r.kind!r}")

        s = rset.s_base
        if self.mode == "soft":
            for j in range(n):
                add_linear(sigma_inv[:, j].copy(), j, s)
                s += 1
        self.s = s

        self._A = np.array(rows) if rows else np.zeros((0, n))
        self._flat = np.array(
            [p * n + c for p, c in zip(range(len(cols)), cols)], dtype=np.intp
        )
        self._offsets = np.array(offsets)
        self._lin_pos = np.array(lin_pos, dtype=np.intp)
        self._hd_G = np.array(hd_G) if hd_G else None
        self._hd_shock = hd_shock
        self._hd_most = hd_most
        self._hd_pos = hd_pos

    def __call__(self, Q: np.ndarray) -> np.ndarray:
        """Margin vector at Q, in restriction order."""
        self.n_evals += 1
        m = np.empty(self.s)
        if self._A.shape[0]:
            vals = (self._A @ Q).ravel()
            m[self._lin_pos] = vals[self._flat] + self._offsets
        if self._hd_G is not None:
            GQ = self._hd_G @ Q
            H = np.abs(np.einsum("ij,rij->rj", Q, GQ))
            for r, (j, most, pos) in enumerate(
                zip(self._hd_shock, self._hd_most, self._hd_pos)
            ):
                own = H[r, j]
                others = np.delete(H[r], j)
                if most:
                    m[pos] = own - others.max()
                else:
                    m[pos] = others.min() - own
        for num, den, j, bound, direction, pos in self._raw_ratio:
            ratio = float(num @ Q[:, j]) / float(den @ Q[:, j])
            m[pos] = bound - ratio if direction == "<=" else ratio - bound
        return m


def margins(
    rset: RestrictionSet,
    phi: ReducedFormParams,
    Q: np.ndarray,
    context: EvalContext | None = None,
    mode: str | None = None,
) -> np.ndarray:
    """Margin vector m(phi, Q); satisfied iff every entry is >= 0."""
    return MarginEvaluator(rset, phi, context, mode=mode)(Q)


def is_feasible(
    rset: RestrictionSet,
    phi: ReducedFormParams,
    Q: np.ndarray,
    context: EvalContext | None = None,
    mode: str | None = None,
) -> bool:
    """Weak-inequality feasibility: min margin >= 0 (m = 0 counts)."""
    return bool(margins(rset, phi, Q, context, mode=mode).min() >= 0.0)


def normalize_signs(phi: ReducedFormParams, Q: np.ndarray) -> np.ndarray:
    """Flip columns of Q so that diag(A_0) = diag(Q' Sigma_tr^{-1}) >= 0.

    A zero dot product leaves the column unchanged; the map is idempotent.
    """
    sigma_inv = phi.sigma_tr_inv()
    d = np.sign(np.einsum("ij,ij->j", Q, sigma_inv))
    d[d == 0] = 1.0
    return Q * d


def _resolve_name(name: str, names: list[str], path: str) -> int:
    try:
        return names.index(name)
    except ValueError:
        raise UnknownVariable(f"{path}: unknown name {name!r} (have {names})") from None


def _parse_sign(raw, path: str) -> float:
    if raw in ("+", 1, 1.0, "positive"):
        return 1.0
    if raw in ("-", -1, -1.0, "negative"):
        return -1.0
    raise SchemaError(f"{path}: sign must be '+' or '-', got {raw!r}")


def parse_restrictions(config) -> RestrictionSet:
    """Build a RestrictionSet from a config document (dict, YAML text or path).

    Restriction order is document order; entries with a ``horizons`` list
    expand to one margin per horizon. Duplicate restrictions are accepted
    with a warning (margins are idempotent).
    """
    if isinstance(config, (str, Path)):
        import yaml

        p = Path(config)
        text = p.read_text() if p.exists() else str(config)
        config = yaml.safe_load(text)
    if not isinstance(config, dict):
        raise SchemaError("restriction config must be a mapping")

    variables = list(config.get("variables") or [])
    shocks = list(config.get("shocks") or [])
    if not variables:
        raise SchemaError("variables: at least one variable name required")
    if not shocks:
        raise SchemaError("shocks: at least one shock name required")
    if len(shocks) != len(variables):
        raise SchemaError("shocks and variables must have equal length")
    n = len(variables)

    normalisation = config.get("sign_normalisation", "soft")
    if normalisation not in NORMALISATION_MODES:
        raise SchemaError(
            f"sign_normalisation must be one of {NORMALISATION_MODES}, "
            f"got {normalisation!r}"
        )

    entries = config.get("restrictions")
    if not entries:
        raise SchemaError("restrictions: at least one restriction required")

    out: list[Restriction] = []
    for idx, entry in enumerate(entries):
        path = f"restrictions[{idx}]"
        if not isinstance(entry, dict) or "kind" not in entry:
            raise SchemaError(f"{path}: entry must be a mapping with a 'kind'")
        kind = entry["kind"]
        if kind not in KINDS:
            raise SchemaError(f"{path}: unknown kind {kind!r}")

        def var(key: str, required: bool = True) -> int | None:
            if key not in entry:
                if required:
                    raise SchemaError(f"{path}: missing {key!r}")
                return None
            return _resolve_name(entry[key], variables, f"{path}.{key}")

        def shk(key: str = "shock") -> int:
            if key not in entry:
                raise SchemaError(f"{path}: missing {key!r}")
            return _resolve_name(entry[key], shocks, f"{path}.{key}")

        cumulative = bool(entry.get("cumulative", False))
        if kind == "irf-sign":
            sign = _parse_sign(entry.get("sign", "+"), path)
            horizons = entry.get("horizons", [entry.get("horizon", 0)])
            for h in horizons:
                if not isinstance(h, int) or h < 0:
                    raise SchemaError(f"{path}: bad horizon {h!r}")
                out.append(
                    Restriction(
                        kind=kind, variable=var("variable"), shock=shk(),
                        horizon=h, sign=sign, cumulative=cumulative,
                        bound=float(entry.get("bound", 0.0)),
                    )
                )
        elif kind == "irf-ranking":
            out.append(
                Restriction(
                    kind=kind, variable=var("variable"), shock=shk(),
                    horizon=int(entry.get("horizon", 0)),
                    variable2=var("variable2", required=False),
                    horizon2=int(entry["horizon2"]) if "horizon2" in entry
                    else int(entry.get("horizon", 0)),
                    cumulative=cumulative,
                )
            )
        elif kind == "structural-sign":
            out.append(
                Restriction(
                    kind=kind, variable=var("variable"), shock=shk(),
                    sign=_parse_sign(entry.get("sign", "+"), path),
                )
            )
        elif kind in ("elasticity-bound", "irf-ratio-bound"):
            if "bound" not in entry:
                raise SchemaError(f"{path}: missing 'bound'")
            den_sign = entry.get("denominator_sign", "+")
            out.append(
                Restriction(
                    kind=kind,
                    numerator=var("numerator"),
                    denominator=var("denominator"),
                    shock=shk(),
                    horizon=int(entry.get("horizon", 0)),
                    bound=float(entry["bound"]),
                    direction=str(entry.get("direction", "<=")),
                    denominator_sign=None if den_sign in (None, "none")
                    else _parse_sign(den_sign, path),
                    cumulative=cumulative,
                )
            )
        elif kind == "narrative-shock-sign":
            out.append(
                Restriction(
                    kind=kind, shock=shk(),
                    sign=_parse_sign(entry.get("sign", "+"), path),
                    date=str(entry["date"]) if "date" in entry else None,
                    t_index=entry.get("t_index"),
                )
            )
        elif kind in ("narrative-hd-most", "narrative-hd-least"):
            out.append(
                Restriction(
                    kind=kind, variable=var("variable"), shock=shk(),
                    date=str(entry["date"]) if "date" in entry else None,
                    t_index=entry.get("t_index"),
                    span=int(entry.get("span", 0)),
                )
            )
        elif kind == "sign-normalisation":
            out.append(Restriction(kind=kind, shock=shk()))
        if kind.startswith("narrative") and out[-1].date is None and out[-1].t_index is None:
            raise SchemaError(f"{path}: narrative entry needs 'date' or 't_index'")

    seen: set[tuple] = set()
    for idx, r in enumerate(out):
        if r.key() in seen:
            warnings.warn(
                f"duplicate restriction at position {idx}: {r.kind}", stacklevel=2
            )
        seen.add(r.key())

    return RestrictionSet(
        restrictions=tuple(out),
        n=n,
        normalisation=normalisation,
        variables=tuple(variables),
        shocks=tuple(shocks),
    )
