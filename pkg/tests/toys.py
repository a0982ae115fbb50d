"""Small hand-analyzable problems shared across test modules.

Each builder returns objects whose exact optima (and for the 2-D toys,
the exact near-optimal region) are worked out in comments next to the
numbers, so tests assert against closed-form values rather than against
the code under test.
"""

from __future__ import annotations

import numpy as np

from nearopt.lp import EQ, GE, LE, SparseLP


def budget_toy() -> tuple[SparseLP, float, float]:
    """min a + 2b  s.t.  a + b >= 1,  0 <= a, b <= 2.

    Optimum f* = 1 at (1, 0).  With slack epsilon = 0.1 the near-optimal
    region {a + b >= 1, a + 2b <= 1.1} is the triangle with vertices
    (1, 0), (1.1, 0), (0.9, 0.1); its area is 0.005 (shoelace).

    Returns (lp, f_star, epsilon_01_area).
    """
    lp = SparseLP(
        objective=np.array([1.0, 2.0]),
        rows=np.array([0, 0]),
        cols=np.array([0, 1]),
        vals=np.array([1.0, 1.0]),
        senses=np.array([GE]),
        rhs=np.array([1.0]),
        lower=np.zeros(2),
        upper=np.full(2, 2.0),
        column_labels=("a", "b"),
        mga={"a": 0, "b": 1},
    )
    return lp, 1.0, 0.005


def dispatch_toy() -> tuple[SparseLP, tuple[str, str]]:
    """Two capacities (wind, store) over four periods with cyclic storage.

    Variables: W, S, then per period t: generation g_t, charge c_t,
    discharge d_t, end-of-period level l_t (18 columns).  Demand is 1 in
    every period; wind availability is (1.0, 0.1, 0.8, 0.2), so serving
    the lull hours takes either extra wind or stored energy, which makes
    the near-optimal (W, S) region genuinely two-dimensional.

    Rows: g_t - c_t + d_t == 1          (balance)
          l_t - l_{t-1} - eta*c_t + d_t/eta == 0   (cyclic, l_{-1} = l_3)
          g_t - a_t*W <= 0              (availability)
          l_t - S <= 0                  (energy capacity)
    Cost: 1.0*W + 0.5*S (capex only; dispatch is free).
    """
    avail = (1.0, 0.1, 0.8, 0.2)
    eta = 0.9
    T = len(avail)
    n = 2 + 4 * T

    def g(t: int) -> int:
        return 2 + t

    def c(t: int) -> int:
        return 2 + T + t

    def d(t: int) -> int:
        return 2 + 2 * T + t

    def level(t: int) -> int:
        return 2 + 3 * T + t

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    senses: list[int] = []
    rhs: list[float] = []

    def put(r: int, entries: list[tuple[int, float]], sense: int, b: float) -> None:
        for col, val in entries:
            rows.append(r)
            cols.append(col)
            vals.append(val)
        senses.append(sense)
        rhs.append(b)

    r = 0
    for t in range(T):
        put(r, [(g(t), 1.0), (c(t), -1.0), (d(t), 1.0)], EQ, 1.0)
        r += 1
    for t in range(T):
        put(
            r,
            [
                (level(t), 1.0),
                (level((t - 1) % T), -1.0),
                (c(t), -eta),
                (d(t), 1.0 / eta),
            ],
            EQ,
            0.0,
        )
        r += 1
    for t in range(T):
        put(r, [(g(t), 1.0), (0, -avail[t])], LE, 0.0)
        r += 1
    for t in range(T):
        put(r, [(level(t), 1.0), (1, -1.0)], LE, 0.0)
        r += 1

    objective = np.zeros(n)
    objective[0] = 1.0
    objective[1] = 0.5
    labels = ["W", "S"]
    for stem in ("g", "c", "d", "l"):
        labels.extend(f"{stem}{t}" for t in range(T))

    lp = SparseLP(
        objective=objective,
        rows=np.array(rows),
        cols=np.array(cols),
        vals=np.array(vals),
        senses=np.array(senses),
        rhs=np.array(rhs),
        lower=np.zeros(n),
        upper=np.concatenate([[20.0, 20.0], np.full(4 * T, np.inf)]),
        column_labels=tuple(labels),
        mga={"wind": 0, "store": 1},
    )
    return lp, ("wind", "store")


def random_bounded_lp(rng: np.random.Generator, feasible: bool = True) -> SparseLP:
    """A random LP with all-finite bounds, feasible by construction.

    Finite bounds keep the feasible set inside a box, so every feasible
    instance attains its optimum at a vertex and brute-force vertex
    enumeration is a complete oracle.  feasible=False inverts the
    inequality right-hand sides far enough to empty the region.
    """
    n = int(rng.integers(2, 6))
    m = int(rng.integers(1, 8))
    lower = rng.uniform(-3.0, 0.0, size=n)
    upper = lower + rng.uniform(0.5, 4.0, size=n)
    fix = rng.random(n) < 0.1
    upper[fix] = lower[fix]

    A = rng.normal(size=(m, n)) * (rng.random(size=(m, n)) < 0.8)
    # A zero row would make its constraint either vacuous or absurd.
    for i in range(m):
        if not A[i].any():
            A[i, int(rng.integers(0, n))] = 1.0
    senses = rng.choice([LE, GE, EQ], size=m, p=[0.4, 0.4, 0.2])

    x0 = rng.uniform(lower, upper)
    slack = rng.uniform(0.1, 1.0, size=m)
    b = A @ x0
    b = np.where(senses == LE, b + slack, b)
    b = np.where(senses == GE, b - slack, b)
    if not feasible:
        shift = 10.0 * (np.abs(A) @ (upper - lower) + 1.0)
        le = senses == LE
        ge = senses == GE
        if not (le.any() or ge.any()):
            senses[0] = LE
            le = senses == LE
        b = np.where(le, b - shift, b)
        b = np.where(ge, b + shift, b)

    rr, cc = np.nonzero(A)
    return SparseLP(
        objective=rng.normal(size=n),
        rows=rr,
        cols=cc,
        vals=A[rr, cc],
        senses=senses,
        rhs=b,
        lower=lower,
        upper=upper,
        column_labels=tuple(f"x{j}" for j in range(n)),
    )


def mixed_carrier_synthetic(
    n_per: int = 400, seed: int = 3
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Three labeled groups with two continuous features and a category.

    Continuous centers are separated by ~6 sigma, and the categorical
    column equals the group for 90% of rows, so the generating partition
    is recoverable both with and without the categorical term.

    Returns (continuous (n,2), categories (n,), true_labels (n,)).
    """
    rng = np.random.default_rng(seed)
    centers = np.array([[0.2, 0.8], [0.5, 0.2], [0.8, 0.7]])
    xs, cats, labels = [], [], []
    for gid, center in enumerate(centers):
        pts = rng.normal(loc=center, scale=0.05, size=(n_per, 2))
        cat = np.full(n_per, gid)
        flip = rng.random(n_per) < 0.1
        cat[flip] = rng.integers(0, 3, size=int(flip.sum()))
        xs.append(pts)
        cats.append(cat)
        labels.append(np.full(n_per, gid))
    return (
        np.clip(np.vstack(xs), 0.0, 1.0),
        np.concatenate(cats).astype(np.int16),
        np.concatenate(labels),
    )
