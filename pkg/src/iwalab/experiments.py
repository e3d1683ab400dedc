"""End-to-end computations for the two worked examples and the non-primitive
factorization, as plain JSON-ready dictionaries."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .forms import EigenformDescriptor, congruent_mod_p, load_descriptor
from .iwasawa import (
    delta_identity_check,
    first_case_prime,
    lambda_transfer_check,
    level_raising_scan,
    mu_transfer_check,
    nonprimitive_comparison,
)
from .modsym import eigen_symbol, special_value_ratio
from .padic import evaluate_at_character, gamma, invariants
from .plfun import cached_space, pl_function

SCHEMA = "iwalab/1"
DEFAULT_PRECISION = {5: (3, 3), 11: (2, 3)}  # p -> (n, M)


def data_path(name: str) -> Path:
    return Path(str(resources.files("iwalab") / "data" / name))


def builtin_form(name: str) -> EigenformDescriptor:
    if not name.endswith(".toml"):
        name += ".toml"
    return load_descriptor(data_path(name))


def default_precision(p: int) -> tuple[int, int]:
    return DEFAULT_PRECISION.get(p, (2, 3))


@dataclass(frozen=True)
class ExampleConfig:
    n_offset: int = 0


def units_agree(a, b, p: int, M: int) -> bool:
    """Whether two series agree up to a single unit scalar mod p^M."""
    mod = p**M
    j = next((j for j, c in enumerate(a.coeffs) if c % p), None)
    if j is None or b.coeffs[j] % p == 0:
        return False
    c = b.coeffs[j] * pow(a.coeffs[j], -1, mod) % mod
    return all((c * x - y) % mod == 0 for x, y in zip(a.coeffs, b.coeffs))


def example_one(cfg: ExampleConfig = ExampleConfig()) -> dict:
    """X0(11) and the 11-stabilized Delta at p = 11."""
    p = 11
    n, M = default_precision(p)
    n += cfg.n_offset
    x0 = builtin_form("x0_11")
    delta = builtin_form("delta_11")
    Lx = pl_function(x0, p, 0, n, M)
    Ld = pl_function(delta, p, 0, n, M, route="level_np")
    Ld_stab = pl_function(delta, p, 0, n, M, route="stabilize")
    t0 = gamma(p) ** 5 - 1
    zero = evaluate_at_character(Ld.series, t0)
    plus = eigen_symbol(cached_space(11, 2), {2: -2, 3: -1}, 1)
    hits = level_raising_scan(x0, p, 2200)
    case3 = [h.ell for h in hits if 3 in h.cases]
    return {
        "schema": SCHEMA,
        "example": "x0_11-delta-p11",
        "lfun": {"x0_11": Lx.to_dict(), "delta_11": Ld.to_dict()},
        "delta_routes_agree_up_to_unit": units_agree(Ld.series, Ld_stab.series, p, M),
        "delta_zero": {"t0": str(t0), "value": str(zero.value), "precision": zero.M,
                       "valuation": zero.valuation()},
        "special_value_ratio_x0_11": str(abs(special_value_ratio(plus))),
        "mu_transfer": mu_transfer_check(Lx, Ld).to_dict(),
        "transfer": lambda_transfer_check(x0, delta, p, 0, n, M, Lx, Ld).to_dict(),
        "level_raising": {"lmax": 2200, "first_case3": first_case_prime(hits, 3), "case3_primes": case3,
                          "hits": [h.to_dict() for h in hits if 3 in h.cases]},
    }


def example_two(cfg: ExampleConfig = ExampleConfig()) -> dict:
    """The congruent curves of conductors 52 and 364 at p = 5."""
    p = 5
    n, M = default_precision(p)
    n += cfg.n_offset
    e1 = builtin_form("e1_52")
    e2 = builtin_form("e2_364")
    L1 = pl_function(e1, p, 0, n, M)
    L2 = pl_function(e2, p, 0, n, M)
    report = lambda_transfer_check(e1, e2, p, 0, n, M, L1, L2)
    return {
        "schema": SCHEMA,
        "example": "e1_52-e2_364-p5",
        "lfun": {"e1_52": L1.to_dict(), "e2_364": L2.to_dict()},
        "mu_transfer": mu_transfer_check(L1, L2).to_dict(),
        "transfer": report.to_dict(),
        "delta_identity_7": delta_identity_check(e1, e2, p, 0, 7).to_dict(),
        "level_raising": [h.to_dict() for h in level_raising_scan(e1, p, 10)],
    }


def example_nonprimitive(cfg: ExampleConfig = ExampleConfig()) -> dict:
    """X0(11) at p = 11 with the Euler factor at 3 removed."""
    p = 11
    n, M = default_precision(p)
    n += cfg.n_offset
    x0 = builtin_form("x0_11")
    rep = nonprimitive_comparison(x0, p, 0, [3], n, M)
    Lg = pl_function(x0, p, 0, n, M, sigma=[3])
    return {
        "schema": SCHEMA,
        "example": "x0_11-sigma3-p11",
        "comparison": rep.to_dict(),
        "lfun": {"x0_11_sigma3": Lg.to_dict()},
    }


EXAMPLES = {
    "example1": example_one,
    "example2": example_two,
    "nonprimitive": example_nonprimitive,
}


def invariant_summary(report: dict) -> dict:
    """The certified invariants of a repro report (used for --n stability)."""
    out = {}
    for name, lf in report.get("lfun", {}).items():
        if lf.get("certified"):
            out[name] = (lf["mu"], lf["lambda"])
    if "transfer" in report:
        t = report["transfer"]
        out["transfer"] = (t["lhs"], t["rhs"], t["balanced"])
    if "comparison" in report:
        c = report["comparison"]
        out["comparison"] = (c["identity_in_group_ring"], c["lambda_sigma"], c["e_sum"])
    return out
