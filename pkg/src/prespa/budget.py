"""Error-budget arithmetic for the corrected logical qubit.

Rates are in 1/ms. Rows whose occurrence is a fraction of the photon-loss
rate nbar/T1A can have their transverse entry derived from that fraction.
"""

import json
from dataclasses import asdict, dataclass
from importlib import resources

from .circuitmodel import DeviceParams
from .errors import InvalidInput

UNITS = ("per_ms", "fraction")


@dataclass(frozen=True)
class ErrorChannelRow:
    name: str
    rate: float
    unit: str = "per_ms"
    longitudinal: float = 0.0
    transverse: float = 0.0
    derive_transverse: bool = False
    group: str = ""
    provenance: str = ""

    def __post_init__(self):
        if self.unit not in UNITS:
            raise InvalidInput(f"unit must be one of {UNITS}")
        if self.longitudinal < 0 or self.transverse < 0 or self.rate < 0:
            raise InvalidInput(f"row {self.name!r} has a negative entry")
        if self.unit == "fraction" and self.rate > 1:
            raise InvalidInput(f"row {self.name!r}: fraction above 1")


def loss_rate_per_ms(p=None):
    """Single-photon loss rate nbar / T1A in 1/ms."""
    p = DeviceParams() if p is None else p
    return p.nbar / (p.t1_cavity_us * 1e-3)


def rate_row_from_fraction(fraction, p=None):
    """fraction * nbar / T1A in 1/ms."""
    if not 0 <= fraction <= 1:
        raise InvalidInput("fraction must lie in [0, 1]")
    return fraction * loss_rate_per_ms(p)


def row_contributions(row, p=None, derived=True):
    """(longitudinal, transverse) of one row, deriving the transverse entry when flagged."""
    trans = row.transverse
    if derived and row.derive_transverse and row.unit == "fraction":
        trans = rate_row_from_fraction(row.rate, p)
    return row.longitudinal, trans


def budget_totals(rows, p=None, derived=True):
    """Column sums (Gamma_long, Gamma_trans) in 1/ms.

    With ``derived=False`` the stored transverse entries are summed as they
    are; otherwise fraction rows flagged ``derive_transverse`` are expanded
    with nbar and T1A from ``p``.
    """
    gl = gt = 0.0
    for row in rows:
        l, t = row_contributions(row, p, derived)
        gl += l
        gt += t
    return gl, gt


def bit_flip_longitudinal(rate_per_ms, flip_probability=0.6):
    """Longitudinal rate of a bit-flip process: twice the flip rate."""
    return 2 * rate_per_ms * flip_probability


def load_budget(path=None):
    """Rows from a budget JSON file; the packaged table by default."""
    if path is None:
        text = resources.files("prespa").joinpath("data/error_budget.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    doc = json.loads(text)
    rows = doc["rows"] if isinstance(doc, dict) else doc
    try:
        return [ErrorChannelRow(**r) for r in rows]
    except TypeError as exc:
        raise InvalidInput(f"malformed budget row: {exc}") from exc


def save_budget(rows, path):
    with open(path, "w") as fh:
        json.dump({"version": 1, "rows": [asdict(r) for r in rows]}, fh, indent=2)


def format_budget(rows, p=None, derived=True):
    """Plain-text table with one line per row and a total line."""
    lines = [f"{'channel':40s} {'occurrence':>14s} {'long (1/ms)':>12s} {'trans (1/ms)':>12s}"]
    for r in rows:
        occ = f"{r.rate:.2f} /ms" if r.unit == "per_ms" else f"{100 * r.rate:.0f}% nbar/T1A"
        l, t = row_contributions(r, p, derived)
        lines.append(f"{r.name:40s} {occ:>14s} {l:12.2f} {t:12.2f}")
    gl, gt = budget_totals(rows, p, derived)
    lines.append(f"{'total':40s} {'':>14s} {gl:12.2f} {gt:12.2f}")
    return "\n".join(lines)
