"""Integer-multiplicity polyhedral chains of dimension 0 and 1.

These are the numerical carriers of singularity data: point clouds with
integer weights (k=0) and weighted oriented segments (k=1), typically dual
lattice edges produced by the 3d extraction sweep.  Mass is
sum |multiplicity| * H^k(cell).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams, IoFailure


@dataclass(frozen=True)
class SingularChain:
    """Polyhedral k-chain (k in {0,1}) in R^n with integer multiplicities.

    ``cells`` holds (simplex, multiplicity) pairs where a simplex is an
    (n,) point for k=0 or a (2, n) oriented segment for k=1.  ``spacing``
    is the dual-lattice step for extracted chains (0 for analytic ones).
    """

    n: int
    k: int
    cells: tuple = field(default_factory=tuple)
    spacing: float = 0.0

    def __post_init__(self):
        if self.k not in (0, 1):
            raise InvalidParams("chain dimension k must be 0 or 1")
        for simplex, mult in self.cells:
            if int(mult) != mult or mult == 0:
                raise InvalidParams("multiplicities must be nonzero integers")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def empty(n: int, k: int = 0) -> "SingularChain":
        return SingularChain(n, k, ())

    @staticmethod
    def points(n: int, items) -> "SingularChain":
        cells = tuple((np.asarray(p, dtype=float).reshape(n), int(m)) for p, m in items)
        return SingularChain(n, 0, cells)

    @staticmethod
    def segments(n: int, items, spacing: float = 0.0) -> "SingularChain":
        cells = tuple(
            (np.asarray(ab, dtype=float).reshape(2, n), int(m)) for ab, m in items
        )
        return SingularChain(n, 1, cells, spacing)

    # -- queries ------------------------------------------------------------

    def __len__(self):
        return len(self.cells)

    def mass(self) -> float:
        return chain_mass(self)

    def filtered(self, predicate) -> "SingularChain":
        """Sub-chain of cells whose midpoint satisfies ``predicate``."""
        kept = []
        for simplex, mult in self.cells:
            mid = simplex if self.k == 0 else 0.5 * (simplex[0] + simplex[1])
            if predicate(mid):
                kept.append((simplex, mult))
        return SingularChain(self.n, self.k, tuple(kept), self.spacing)

    def total_multiplicity(self) -> int:
        return int(sum(m for _, m in self.cells))

    # -- serialization ------------------------------------------------------

    def to_csv(self, path) -> None:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(chain_csv_text(self))
        except OSError as exc:
            raise IoFailure(f"cannot write chain CSV to {path}: {exc}") from exc

    @staticmethod
    def from_csv(path) -> "SingularChain":
        try:
            with open(path, "r", encoding="utf-8", newline="") as fh:
                text = fh.read()
        except OSError as exc:
            raise IoFailure(f"cannot read chain CSV from {path}: {exc}") from exc
        return chain_from_csv_text(text)


def chain_csv_header(n: int) -> list[str]:
    return (
        ["k"]
        + [f"x0_{i}" for i in range(n)]
        + [f"x1_{i}" for i in range(n)]
        + ["multiplicity"]
    )


def chain_csv_text(chain: SingularChain) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(chain_csv_header(chain.n))
    for simplex, mult in chain.cells:
        if chain.k == 0:
            a = b = np.asarray(simplex)
        else:
            a, b = simplex[0], simplex[1]
        row = (
            [str(chain.k)]
            + [f"{v:.17g}" for v in a]
            + [f"{v:.17g}" for v in b]
            + [str(int(mult))]
        )
        writer.writerow(row)
    return buf.getvalue()


def chain_from_csv_text(text: str) -> SingularChain:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise IoFailure("empty chain CSV")
    header = rows[0]
    n = (len(header) - 2) // 2
    cells_k0, cells_k1 = [], []
    for row in rows[1:]:
        if not row:
            continue
        k = int(row[0])
        a = np.array([float(v) for v in row[1 : 1 + n]])
        b = np.array([float(v) for v in row[1 + n : 1 + 2 * n]])
        mult = int(row[-1])
        if k == 0:
            cells_k0.append((a, mult))
        else:
            cells_k1.append((np.stack([a, b]), mult))
    if cells_k1 and cells_k0:
        raise IoFailure("mixed-dimension chain CSV")
    if cells_k1:
        return SingularChain.segments(n, [(s, m) for s, m in cells_k1])
    return SingularChain.points(n, [(p, m) for p, m in cells_k0])


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


def chain_mass(chain: SingularChain) -> float:
    """Sum |d_i| * H^k of each cell: counts for k=0, weighted length for k=1."""
    if chain.k == 0:
        return float(sum(abs(m) for _, m in chain.cells))
    total = 0.0
    for simplex, mult in chain.cells:
        total += abs(mult) * float(np.linalg.norm(simplex[1] - simplex[0]))
    return total


def chain_boundary(chain: SingularChain) -> SingularChain:
    """Signed endpoint counts of a 1-chain; unbalanced vertices form a 0-chain."""
    if chain.k != 1:
        raise InvalidParams("chain_boundary expects a 1-chain")
    quantum = 0.5 * chain.spacing if chain.spacing > 0 else 1e-9
    acc: dict[tuple, list] = {}
    for simplex, mult in chain.cells:
        for point, sign in ((simplex[0], -1), (simplex[1], +1)):
            key = tuple(np.round(point / quantum).astype(np.int64))
            slot = acc.setdefault(key, [point, 0])
            slot[1] += sign * mult
    cells = [(p, total) for p, total in acc.values() if total != 0]
    cells.sort(key=lambda c: tuple(c[0]))
    return SingularChain.points(chain.n, cells)


def interior_boundary(chain: SingularChain, lo, hi, margin: float) -> SingularChain:
    """Boundary restricted to vertices at distance > margin from the box faces."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    bnd = chain_boundary(chain)
    return bnd.filtered(
        lambda p: bool(np.all(p > lo + margin) and np.all(p < hi - margin))
    )


def distance_to_chain(X: np.ndarray, chain: SingularChain) -> np.ndarray:
    """Euclidean distance from each point of X (N, n) to the chain support."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if len(chain.cells) == 0:
        return np.full(X.shape[0], np.inf)
    best = np.full(X.shape[0], np.inf)
    for simplex, _ in chain.cells:
        if chain.k == 0:
            d = np.linalg.norm(X - np.asarray(simplex)[None, :], axis=1)
        else:
            a, b = simplex[0], simplex[1]
            ab = b - a
            denom = float(ab @ ab)
            if denom == 0.0:
                d = np.linalg.norm(X - a[None, :], axis=1)
            else:
                t = np.clip((X - a[None, :]) @ ab / denom, 0.0, 1.0)
                proj = a[None, :] + t[:, None] * ab[None, :]
                d = np.linalg.norm(X - proj, axis=1)
        best = np.minimum(best, d)
    return best
