"""Local residue systems, their CRT assembly, counting and hyperplane
statistics, and enumeration of the supported moduli."""

import math
import threading
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .modarith import Factorization, PrimePower, factor_tuples, mod_inverse, sieve_primes, spf_factor, spf_table

DEFAULT_SUPPORT = 2**62


class LocalSystem:
    """A rule assigning to each prime power p^v a finite set of residue
    tuples mod p^v. Materialized sets are cached; the rule must be
    deterministic. `size_rule`, when given, answers cardinality queries
    without materializing the set."""

    def __init__(self, dimension, rule, support_limit=DEFAULT_SUPPORT, name="", size_rule=None):
        if dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {dimension}")
        self.dimension = dimension
        self.rule = rule
        self.support_limit = support_limit
        self.name = name
        self.size_rule = size_rule
        self._cache = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"LocalSystem(n={self.dimension}, name={self.name!r})"

    def _check_support(self, p, v):
        value = p**v
        if value > self.support_limit:
            raise ValueError(f"prime power {p}^{v} = {value} beyond support limit {self.support_limit}")
        return value

    def local_set(self, p, v=1):
        """The set for p^v as a sorted tuple of coordinate tuples."""
        key = (p, v)
        got = self._cache.get(key)
        if got is not None:
            return got
        value = self._check_support(p, v)
        raw = self.rule(p, v)
        pts = set()
        for item in raw:
            t = (item,) if isinstance(item, int) else tuple(item)
            if len(t) != self.dimension:
                raise ValueError(f"tuple {t} has wrong dimension for n={self.dimension}")
            if any(c < 0 or c >= value for c in t):
                raise ValueError(f"coordinates of {t} not canonical mod {p}^{v}")
            pts.add(t)
        norm = tuple(sorted(pts))
        with self._lock:
            return self._cache.setdefault(key, norm)

    def local_size(self, p, v=1):
        if self.size_rule is not None:
            key = (p, v)
            got = self._cache.get(key)
            if got is not None:
                return len(got)
            self._check_support(p, v)
            return self.size_rule(p, v)
        return len(self.local_set(p, v))


@dataclass(frozen=True)
class ResidueSet:
    q: int
    factorization: Factorization
    points: tuple
    size: int

    def __post_init__(self):
        if self.size != len(self.points):
            raise ValueError("size does not match point count")


@dataclass(frozen=True)
class ModulusSet:
    x: int
    k: object
    members: tuple


@dataclass(frozen=True)
class TorusPointSet:
    """The multiset {a/q} on the torus as exact rationals: integer numerator
    tuples over a common denominator, uniformly weighted."""

    dimension: int
    denominator: int
    numerators: tuple
    weight: Fraction

    def __post_init__(self):
        if not self.numerators:
            raise ValueError("point set must be nonempty")
        q = self.denominator
        for t in self.numerators:
            if len(t) != self.dimension or any(c < 0 or c >= q for c in t):
                raise ValueError(f"numerator {t} not canonical mod {q}")


def _combine_points(pts_a, mod_a, pts_b, mod_b):
    """CRT-combine two point lists coordinatewise (coprime moduli)."""
    inv = mod_inverse(mod_a % mod_b, mod_b)
    out = []
    for xa in pts_a:
        for xb in pts_b:
            out.append(tuple(ca + mod_a * (((cb - ca) * inv) % mod_b) for ca, cb in zip(xa, xb)))
    return out


def residue_set(system, q):
    """Assemble A_q from the local sets at the prime powers dividing q."""
    n = system.dimension
    if q == 1:
        fac = Factorization(1, ())
        pt = ((0,) * n,)
        return ResidueSet(1, fac, pt, 1)
    parts = factor_tuples(q)
    pts = [(0,) * n]
    m = 1
    for p, v in parts:
        local = system.local_set(p, v)
        if not local:
            return ResidueSet(q, Factorization(q, tuple(PrimePower(p_, v_) for p_, v_ in parts)), (), 0)
        pts = _combine_points(pts, m, local, p**v) if m > 1 else [tuple(t) for t in local]
        m *= p**v
    fac = Factorization(q, tuple(PrimePower(p_, v_) for p_, v_ in parts))
    return ResidueSet(q, fac, tuple(sorted(pts)), len(pts))


def point_count(system, q):
    """|A_q| as a product of local cardinalities; never materializes A_q."""
    if q == 1:
        return 1
    total = 1
    for p, v in factor_tuples(q):
        total *= system.local_size(p, v)
        if total == 0:
            return 0
    return total


def _primitive_directions(n, p, w):
    """One representative per direction class of hyperplane normals mod p^w:
    first non-p-divisible coordinate normalized to 1."""
    pw = p**w
    below = range(0, pw, p)
    full = range(pw)
    for i in range(n):
        for pre in product(below, repeat=i):
            for post in product(full, repeat=n - 1 - i):
                yield pre + (1,) + post


def hyperplane_max_local(system, p, v=1):
    """Largest number of points of the local set lying on one affine
    hyperplane h.x = a with h any nonzero vector mod p^v. A vector
    h = p^(v-w) h' with h' primitive mod p^w cuts the same fibers as
    h'.x mod p^w, so the scan runs over w = 1..v and primitive h'."""
    n = system.dimension
    if n == 1 and v == 1:
        return 1 if system.local_size(p, 1) > 0 else 0
    pts = system.local_set(p, v)
    if not pts:
        return 0
    best = 0
    for w in range(1, v + 1):
        pw = p**w
        red = [tuple(c % pw for c in x) for x in pts]
        if n == 1:
            cnt = Counter(x[0] for x in red)
            best = max(best, max(cnt.values()))
            continue
        for h in _primitive_directions(n, p, w):
            cnt = Counter(sum(hc * xc for hc, xc in zip(h, x)) % pw for x in red)
            best = max(best, max(cnt.values()))
    return best


def hyperplane_max(system, q):
    """Multiplicative extension of the local hyperplane maximum.

    Equals the direct hyperplane maximum mod q when the normal vector is
    restricted to be nonzero mod every maximal prime power dividing q
    (unrestricted normals can exceed the product)."""
    if q == 1:
        return 1
    total = 1
    for p, v in factor_tuples(q):
        total *= hyperplane_max_local(system, p, v)
        if total == 0:
            return 0
    return total


def supported_moduli(system, x, k=None):
    """All q <= x with a nonempty assembled set, ascending; with k set,
    only q with exactly k distinct prime factors. q = 1 belongs to the
    unrestricted set."""
    if k is not None and k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    members = []
    if x >= 1 and k is None:
        members.append(1)
    if x >= 2:
        spf = spf_table(x)
        for q in range(2, x + 1):
            parts = spf_factor(q, spf)
            if k is not None and len(parts) != k:
                continue
            rho = 1
            for p, v in parts:
                rho *= system.local_size(p, v)
                if rho == 0:
                    break
            if rho >= 1:
                members.append(q)
    return ModulusSet(x=x, k=k, members=tuple(members))


def fractional_points(rs):
    """The torus points a/q of a nonempty residue set, exact rationals."""
    if rs.size == 0:
        raise ValueError(f"measure undefined: A_{rs.q} is empty")
    n = len(rs.points[0])
    return TorusPointSet(n, rs.q, rs.points, Fraction(1, rs.size))


def prime_support_stat(system, x):
    """(sum of log p over supported primes p <= x, that sum divided by x)."""
    if x < 2:
        return (0.0, 0.0)
    total = math.fsum(math.log(p) for p in sieve_primes(x) if system.local_size(p, 1) >= 1)
    return (total, total / x)


def numerators_1d(system, q, parts=None):
    """Sorted int64 array of the numerators of A_q for a 1-dimensional
    system. Vectorized CRT; the workhorse behind large aggregations."""
    if system.dimension != 1:
        raise ValueError("numerators_1d requires a 1-dimensional system")
    if q == 1:
        return np.zeros(1, dtype=np.int64)
    if parts is None:
        parts = factor_tuples(q)
    cur = None
    m = 1
    for p, v in parts:
        pv = p**v
        local = np.fromiter((t[0] for t in system.local_set(p, v)), dtype=np.int64)
        if local.size == 0:
            return np.empty(0, dtype=np.int64)
        if cur is None:
            cur = local
        else:
            inv = mod_inverse(m % pv, pv)
            shift = ((local[None, :] - cur[:, None]) * inv) % pv
            cur = (cur[:, None] + m * shift).ravel()
        m *= pv
    return np.sort(cur)


def load_local_system(path, dimension=None, support_limit=None, name=None):
    """Read a system from the line format `p v a_1,...,a_n` (one tuple per
    line, `#` starts a comment). Prime powers absent from the file have
    empty sets."""
    entries = {}
    dim = dimension
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'p v a_1,...,a_n', got {raw.strip()!r}")
            try:
                p, v = int(fields[0]), int(fields[1])
                coords = tuple(int(c) for c in fields[2].split(","))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed integers in {raw.strip()!r}") from None
            if dim is None:
                dim = len(coords)
            if len(coords) != dim:
                raise ValueError(f"{path}:{lineno}: expected {dim} coordinates, got {len(coords)}")
            pv = p**v
            if any(c < 0 or c >= pv for c in coords):
                raise ValueError(f"{path}:{lineno}: coordinates not canonical mod {p}^{v}")
            entries.setdefault((p, v), set()).add(coords)
    if dim is None:
        raise ValueError(f"{path}: no data lines")
    frozen = {key: tuple(sorted(val)) for key, val in entries.items()}
    limit = support_limit if support_limit is not None else max((p**v for p, v in frozen), default=2)
    return LocalSystem(dim, lambda p, v: frozen.get((p, v), ()), limit, name=name or str(path))


def save_local_system(system, path, prime_powers):
    """Write the listed (p, v) sets in the line format load_local_system reads."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# local system {system.name or ''}: n = {system.dimension}\n")
        for p, v in sorted(prime_powers, key=lambda t: (t[0] ** t[1], t[0])):
            for t in system.local_set(p, v):
                fh.write(f"{p} {v} {','.join(str(c) for c in t)}\n")
