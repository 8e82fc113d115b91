"""Equidistribution measurements: Weyl sums and spectra, the frequency
modulus bracket, exact interval/box discrepancy, Erdos-Turan bounds,
second-moment checks, reciprocal prime sums, theorem right-hand sides,
and aggregation over supported moduli."""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .crt_sets import ResidueSet, TorusPointSet, fractional_points, numerators_1d, point_count, hyperplane_max, residue_set, supported_moduli
from .modarith import factor_tuples, sieve_primes, spf_factor, spf_table


@dataclass
class WeylSpectrum:
    """Normalized exponential sums W(h) for all nonzero integer frequency
    vectors with max-norm at most H, in lexicographic order."""

    q: int
    H: int
    dimension: int
    entries: dict

    def to_json(self):
        return {
            "q": self.q,
            "H": self.H,
            "method": "weyl_spectrum",
            "value": [[list(h), w.real, w.imag] for h, w in self.entries.items()],
            "witness": None,
            "seed": None,
        }


@dataclass
class DiscrepancyResult:
    method: str
    value: float = None
    bounds: tuple = None
    witness: dict = None
    q: int = None
    H: int = None
    seed: int = None
    fraction: Fraction = field(default=None, repr=False, compare=False)

    def to_json(self):
        out = {"q": self.q, "H": self.H, "method": self.method}
        if self.value is not None:
            out["value"] = self.value
        if self.bounds is not None:
            out["bounds"] = list(self.bounds)
        out["witness"] = self.witness
        out["seed"] = self.seed
        return out


def _points_of(source):
    if isinstance(source, ResidueSet):
        if source.size == 0:
            raise ValueError(f"A_{source.q} is empty")
        return source.q, np.array(source.points, dtype=np.int64)
    if isinstance(source, TorusPointSet):
        return source.denominator, np.array(source.numerators, dtype=np.int64)
    raise TypeError(f"expected ResidueSet or TorusPointSet, got {type(source).__name__}")


def _as_hvec(h, n):
    if isinstance(h, int):
        if n != 1:
            raise ValueError(f"scalar frequency given for dimension {n}")
        return (h,)
    t = tuple(int(c) for c in h)
    if len(t) != n:
        raise ValueError(f"frequency {t} has wrong dimension for n={n}")
    return t


def _phase_table(q):
    return np.exp((2j * np.pi / q) * np.arange(q))


def weyl_sum(source, h):
    """(1/|A|) sum of e(h.x / q) over the set; the frequency-phase dot
    product is reduced mod q in exact integers first."""
    q, pts = _points_of(source)
    hv = np.array(_as_hvec(h, pts.shape[1]), dtype=np.int64)
    dots = (pts @ hv) % q
    return complex(_phase_table(q)[dots].mean())


def _freq_box(n, H):
    """Nonzero integer vectors with max-norm <= H, lexicographic."""
    for h in itertools.product(range(-H, H + 1), repeat=n):
        if any(h):
            yield h


def weyl_spectrum(source, H):
    if H < 1:
        raise ValueError(f"H must be >= 1, got {H}")
    q, pts = _points_of(source)
    n = pts.shape[1]
    hs = list(_freq_box(n, H))
    harr = np.array(hs, dtype=np.int64)
    dots = (pts @ harr.T) % q
    W = _phase_table(q)[dots].mean(axis=0)
    return WeylSpectrum(q=q, H=H, dimension=n, entries={h: complex(w) for h, w in zip(hs, W)})


def max_norm(h):
    return max(abs(c) for c in h)


def mixed_norm(h):
    """Product of max(1, |h_i|)."""
    out = 1
    for c in h:
        out *= max(1, abs(c))
    return out


def frequency_modulus(h, q):
    """Product of the maximal prime powers p^v || q with h nonzero mod p^v
    (a divisor of q recording where the frequency survives)."""
    hv = h if isinstance(h, tuple) else ((h,) if isinstance(h, int) else tuple(h))
    if all(c == 0 for c in hv):
        raise ValueError("frequency must be nonzero")
    out = 1
    for p, v in factor_tuples(q):
        pv = p**v
        if any(c % pv for c in hv):
            out *= pv
    return out


def second_moment_check(system, q, h, tol=1e-9):
    """lhs = average over a mod q of |W(ah)|^2 by direct summation;
    rhs = hyperplane-max over size at the frequency modulus of h."""
    rs = residue_set(system, q)
    if rs.size == 0:
        raise ValueError(f"A_{q} is empty")
    qq, pts = _points_of(rs)
    hv = np.array(_as_hvec(h, pts.shape[1]), dtype=np.int64)
    dots = (pts @ hv) % qq
    table = _phase_table(qq)
    phases = table[(np.arange(qq)[:, None] * dots[None, :]) % qq]
    W = phases.mean(axis=1)
    lhs = float(np.mean(np.abs(W) ** 2))
    b = frequency_modulus(tuple(int(c) for c in hv), q)
    rhs = hyperplane_max(system, b) / point_count(system, b)
    return lhs, rhs, lhs <= rhs + tol


# ---------------------------------------------------------------------------
# discrepancy

def _closed_arc_scan(u, counts, q):
    """Exact sup over closed arcs of (mass - length), scaled by N*q.

    u: sorted unique int64 positions in [0, q); counts: multiplicities.
    Closed-arc deviations separate as end-score minus start-score, and the
    wrap-around case gives the same difference, so the sup is
    max(A) - min(B). By circle complementation this also equals the sup
    over open arcs of (length - mass), hence the full discrepancy.
    Returns (numerator, start_index, end_index); denominator is N*q.
    """
    N = int(counts.sum())
    pref = np.cumsum(counts)
    A = q * pref - N * u
    B = A - q * counts
    j = int(np.argmax(A))
    i = int(np.argmin(B))
    return int(A[j] - B[i]), i, j


def interval_discrepancy(ps):
    """Exact discrepancy of a 1-dimensional point set against the uniform
    measure, with the extremal closed arc as witness."""
    if ps.dimension != 1:
        raise ValueError(f"interval discrepancy requires n=1, got n={ps.dimension}")
    q = ps.denominator
    raw = np.fromiter((t[0] for t in ps.numerators), dtype=np.int64, count=len(ps.numerators))
    u, counts = np.unique(raw, return_counts=True)
    num, i, j = _closed_arc_scan(u, counts, q)
    den = len(raw) * q
    frac = Fraction(num, den)
    witness = {
        "closed_arc": [f"{int(u[i])}/{q}", f"{int(u[j])}/{q}"],
        "deviation": f"{num}/{den}",
    }
    return DiscrepancyResult(method="exact", value=float(frac), witness=witness, q=q, fraction=frac)


def _axis_candidates(coord, q):
    """Per-axis interval candidates for the 2-dimensional exact scan.

    Closed candidates attain the positive side of the sup; open ones (point
    coordinates excluded, plus full-minus-point and the full circle) give the
    limit values for the negative side. Returns boolean membership matrices
    over the N points and integer lengths."""
    u = np.unique(coord)
    K = len(u)
    N = len(coord)
    mc = np.empty((K * K + 1, N), dtype=bool)
    lc = np.empty(K * K + 1, dtype=np.int64)
    mo = np.empty((K * K + 1, N), dtype=bool)
    lo = np.empty(K * K + 1, dtype=np.int64)
    idx = 0
    for a in range(K):
        ge = coord >= u[a]
        gt = coord > u[a]
        for b in range(K):
            if b >= a:
                mc[idx] = ge & (coord <= u[b])
                lc[idx] = u[b] - u[a]
            else:
                mc[idx] = ge | (coord <= u[b])
                lc[idx] = u[b] - u[a] + q
            if b > a:
                mo[idx] = gt & (coord < u[b])
                lo[idx] = u[b] - u[a]
            elif b < a:
                mo[idx] = gt | (coord < u[b])
                lo[idx] = u[b] - u[a] + q
            else:
                mo[idx] = coord != u[a]
                lo[idx] = q
            idx += 1
    mc[idx] = True
    lc[idx] = q
    mo[idx] = True
    lo[idx] = q
    return u, mc, lc, mo, lo


def _box_exact_2d(ps, budget):
    q = ps.denominator
    pts = np.array(ps.numerators, dtype=np.int64)
    N = len(pts)
    ux, mcx, lcx, mox, lox = _axis_candidates(pts[:, 0], q)
    uy, mcy, lcy, moy, loy = _axis_candidates(pts[:, 1], q)
    cost = len(lcx) * len(lcy)
    if cost * N > budget:
        raise ValueError(
            f"exact box scan needs {cost * N} operations, over budget {budget}; use mode='bounds'"
        )
    q2 = q * q
    counts = mcx.astype(np.int64) @ mcy.astype(np.int64).T
    plus = counts * q2 - N * (lcx[:, None] * lcy[None, :])
    ip = np.unravel_index(np.argmax(plus), plus.shape)
    counts_o = mox.astype(np.int64) @ moy.astype(np.int64).T
    minus = N * (lox[:, None] * loy[None, :]) - counts_o * q2
    im = np.unravel_index(np.argmax(minus), minus.shape)
    den = N * q2
    if plus[ip] >= minus[im]:
        num = int(plus[ip])
        witness = {"side": "closed", "box_index": [int(ip[0]), int(ip[1])]}
    else:
        num = int(minus[im])
        witness = {"side": "open", "box_index": [int(im[0]), int(im[1])]}
    frac = Fraction(num, den)
    witness["deviation"] = f"{num}/{den}"
    return DiscrepancyResult(method="exact", value=float(frac), witness=witness, q=q, fraction=frac)


def _box_membership(pts, q, corner_lo, corner_hi, strict):
    """Count points inside the product of per-axis arcs [lo, hi] (or open)."""
    inside = np.ones(len(pts), dtype=bool)
    for axis, (a, b) in enumerate(zip(corner_lo, corner_hi)):
        c = pts[:, axis]
        if strict:
            part = (c > a) & (c < b) if a <= b else (c > a) | (c < b)
        else:
            part = (c >= a) & (c <= b) if a <= b else (c >= a) | (c <= b)
        inside &= part
    return int(inside.sum())


def box_discrepancy(ps, mode="exact", budget=50_000_000, seed=0, H=None):
    """Discrepancy over closed boxes on the n-torus. Exact mode enumerates
    per-axis candidate intervals with endpoints at point coordinates
    (n <= 2); bounds mode pairs a seeded coordinate-restricted random
    search (lower bound) with an Erdos-Turan bound (upper)."""
    if ps.dimension == 1:
        return interval_discrepancy(ps)
    if mode == "exact":
        if ps.dimension != 2:
            raise ValueError(f"exact box scan supports n <= 2, got n={ps.dimension}; use mode='bounds'")
        return _box_exact_2d(ps, budget)
    if mode != "bounds":
        raise ValueError(f"unknown mode {mode!r}")
    import random as _random

    q = ps.denominator
    n = ps.dimension
    pts = np.array(ps.numerators, dtype=np.int64)
    N = len(pts)
    rng = _random.Random(seed)
    axes = [np.unique(pts[:, a]) for a in range(n)]
    qn = q**n
    den = N * qn
    best_num = 0
    best_box = None
    trials = max(64, min(4096, budget // max(1, 4 * N)))
    for _ in range(trials):
        corner_lo = [int(rng.choice(ax)) for ax in axes]
        corner_hi = [int(rng.choice(ax)) for ax in axes]
        # integer scoring keeps the sampled bound a true lower bound
        vol_num = N * math.prod((b - a) % q for a, b in zip(corner_lo, corner_hi))
        closed = _box_membership(pts, q, corner_lo, corner_hi, strict=False)
        opened = _box_membership(pts, q, corner_lo, corner_hi, strict=True)
        cand = max(closed * qn - vol_num, vol_num - opened * qn)
        if cand > best_num:
            best_num = cand
            best_box = [corner_lo, corner_hi]
    best = best_num / den
    if H is None:
        H = 1
        while (2 * (H + 1) + 1) ** n * N <= budget and H < 64:
            H += 1
    upper = erdos_turan_bound(weyl_spectrum(ps, H))
    return DiscrepancyResult(
        method="sampled",
        bounds=(best, upper),
        witness={"best_box": best_box},
        q=q,
        H=H,
        seed=seed,
    )


def erdos_turan_bound(spectrum):
    """(3/2)^n * (1/H + sum over 0 < max-norm(h) <= H of |W(h)| / M(h)),
    clamped to 1."""
    c = 1.5**spectrum.dimension
    s = math.fsum(abs(w) / mixed_norm(h) for h, w in spectrum.entries.items())
    return min(1.0, c * (1.0 / spectrum.H + s))


# ---------------------------------------------------------------------------
# prime sums and theorem right-hand sides

def reciprocal_prime_sum(system, x):
    """Sum of 1/p over supported primes p <= x, plus 3."""
    return math.fsum(1.0 / p for p in sieve_primes(x) if system.local_size(p, 1) >= 1) + 3.0


def _local_ratio(system, p):
    """hyperplane-max over size at a supported prime (lambda(p)/rho(p))."""
    rho = system.local_size(p, 1)
    if rho < 1:
        return None
    if system.dimension == 1:
        return 1.0 / rho
    from .crt_sets import hyperplane_max_local

    return hyperplane_max_local(system, p, 1) / rho


def damped_reciprocal_prime_sum(system, x):
    """Sum of sqrt(lambda(p)/rho(p))/p over supported primes p <= x, plus 3."""
    terms = []
    for p in sieve_primes(x):
        r = _local_ratio(system, p)
        if r is not None:
            terms.append(math.sqrt(r) / p)
    return math.fsum(terms) + 3.0


def theorem_bound(theorem, system, x, k=None, alpha=1.0, delta=None, strict=True):
    """The displayed right-hand side of one of the four average-discrepancy
    bounds, with every absolute constant set to 1. The exponential or power
    factor is reported separately so experiments can fit the constant.

    Returns a dict with keys: theorem, factor, rhs, alpha, delta, range_ok,
    k_range, sums."""
    if theorem not in (1, 2, 3, 4):
        raise ValueError(f"theorem id must be 1..4, got {theorem}")
    if x < 3:
        raise ValueError(f"x must be >= 3, got {x}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    n = system.dimension
    primes = sieve_primes(x)
    sums = {}
    range_ok = True
    k_range = None
    used_delta = None

    if theorem == 1:
        s = math.fsum(1.0 / p for p in primes if system.local_size(p, 1) >= 2)
        sums["large_fiber_sum"] = s
        factor = math.exp(-s / 6.0)
    else:
        defect = []
        for p in primes:
            r = _local_ratio(system, p)
            if r is not None:
                defect.append((1.0 - r) / p)
        s = math.fsum(defect)
        sums["defect_sum"] = s
        if theorem == 2:
            factor = math.exp(-s / 3.0)
        elif theorem == 3:
            if k is None:
                raise ValueError("theorem 3 needs k")
            loglog = math.log(math.log(x))
            used_delta = delta if delta is not None else min(1.0, s / loglog)
            sums["loglog_x"] = loglog
            if used_delta <= 0:
                range_ok = False
                k_range = (math.inf, math.inf)
                factor = 1.0
            else:
                base = 20.0 * (6 + n)
                k_lo = (base / used_delta) * math.log(base / used_delta)
                k_hi = math.exp(math.sqrt(alpha * used_delta * loglog / base))
                k_range = (k_lo, k_hi)
                range_ok = k_lo <= k <= k_hi
                if strict and k < k_lo:
                    raise ValueError(
                        f"k = {k} violates the lower range bound "
                        f"(20(6+n)/delta)*log(20(6+n)/delta) = {k_lo:.6g}"
                    )
                if strict and k > k_hi:
                    raise ValueError(
                        f"k = {k} violates the upper range bound "
                        f"exp(sqrt(alpha*delta*loglog(x)/(20(6+n)))) = {k_hi:.6g}"
                    )
                factor = math.exp(-used_delta * k / 18.0) + math.log(x) ** (-alpha * used_delta / 18.0)
        else:
            if k is None:
                raise ValueError("theorem 4 needs k")
            loglog = math.log(math.log(x))
            num = []
            den = []
            for p in primes:
                r = _local_ratio(system, p)
                if r is not None:
                    num.append(r / p)
                    den.append(1.0 / p)
            total_den = math.fsum(den)
            ratio = math.fsum(num) / total_den if total_den > 0 else 1.0
            sums["weighted_ratio"] = ratio
            sums["loglog_x"] = loglog
            used_delta = delta if delta is not None else max(ratio, 1.0 / loglog)
            if used_delta > 1.0 / math.e:
                if strict:
                    raise ValueError(
                        f"delta = {used_delta:.6g} violates the ceiling delta <= 1/e = {1.0 / math.e:.6g}"
                    )
                range_ok = False
            k_hi = alpha * used_delta * loglog
            k_range = (2.0, k_hi)
            if not 2 <= k <= k_hi:
                range_ok = False
                if strict:
                    raise ValueError(
                        f"k = {k} violates the range 2 <= k <= alpha*delta*loglog(x) = {k_hi:.6g}"
                    )
            factor = used_delta ** ((k - 1) / 10.0)

    return {
        "theorem": theorem,
        "factor": factor,
        "rhs": factor / alpha,
        "alpha": alpha,
        "delta": used_delta,
        "range_ok": range_ok,
        "k_range": k_range,
        "sums": sums,
    }


# ---------------------------------------------------------------------------
# aggregation over supported moduli

@dataclass
class AggregateStats:
    x: int
    k: object
    weighting: str
    modulus_count: int
    point_total: int
    disc_average: float
    region_mass: object
    method: str
    per_q: tuple = None


def _region_fractions(region, n):
    if region is None:
        return None
    if n == 1:
        lo, hi = region
        return ((Fraction(lo), Fraction(hi)),)
    return tuple((Fraction(lo), Fraction(hi)) for lo, hi in region)


def _count_in_interval(u, q, lo, hi):
    """Points (sorted numerators) with lo <= u/q <= hi, exact endpoints."""
    lo_t = math.ceil(lo * q)
    hi_t = math.floor(hi * q)
    if hi_t < lo_t:
        return 0
    left = int(np.searchsorted(u, lo_t, side="left"))
    right = int(np.searchsorted(u, hi_t, side="right"))
    return right - left


def aggregate_stats(
    system,
    x,
    weighting="uniform",
    k=None,
    region=None,
    threads=1,
    include_per_q=False,
    disc_mode="auto",
    H="auto",
    budget=50_000_000,
):
    """Average discrepancy and optional region mass over all supported
    moduli q <= x. weighting='uniform' averages the per-q values; 'rho'
    weights each modulus by its point count (mass statistics of the
    point-count-weighted aggregate measure).

    Exact per-q discrepancy for 1-dimensional systems; higher dimensions
    default to Erdos-Turan upper bounds unless disc_mode='exact'."""
    if weighting not in ("uniform", "rho"):
        raise ValueError(f"weighting must be 'uniform' or 'rho', got {weighting!r}")
    n = system.dimension
    reg = _region_fractions(region, n)
    if x < 2:
        spf = None
    else:
        spf = spf_table(x)
    rows = []
    qs = []
    if k is None and x >= 1:
        qs.append((1, ()))
    for q in range(2, x + 1):
        parts = spf_factor(q, spf)
        if k is not None and len(parts) != k:
            continue
        qs.append((q, tuple(parts)))

    exact_1d = n == 1 and disc_mode in ("auto", "exact")

    def handle(q, parts):
        if q == 1:
            rho = 1
            u = np.zeros(1, dtype=np.int64)
        else:
            rho = 1
            for p, v in parts:
                rho *= system.local_size(p, v)
                if rho == 0:
                    return None
            u = None
        if exact_1d:
            if u is None:
                u = numerators_1d(system, q, list(parts))
            num, _, _ = _closed_arc_scan(u, np.ones(len(u), dtype=np.int64), q)
            disc = num / (len(u) * q)
            mass_count = _count_in_interval(u, q, reg[0][0], reg[0][1]) if reg else None
            return (q, rho, disc, mass_count, "exact")
        rs = residue_set(system, q)
        if rs.size == 0:
            return None
        ps = fractional_points(rs)
        if disc_mode == "exact":
            disc = box_discrepancy(ps, mode="exact", budget=budget).value
            method = "exact"
        else:
            h_val = H if isinstance(H, int) else _auto_H(system, x)
            disc = erdos_turan_bound(weyl_spectrum(ps, h_val))
            method = "erdos_turan"
        mass_count = None
        if reg:
            pts = np.array(ps.numerators, dtype=np.int64)
            inside = np.ones(len(pts), dtype=bool)
            for axis, (lo, hi) in enumerate(reg):
                lo_t = math.ceil(lo * q)
                hi_t = math.floor(hi * q)
                inside &= (pts[:, axis] >= lo_t) & (pts[:, axis] <= hi_t)
            mass_count = int(inside.sum())
        return (q, rho, disc, mass_count, method)

    if threads > 1 and len(qs) > 64:
        from concurrent.futures import ThreadPoolExecutor

        chunks = np.array_split(np.arange(len(qs)), threads * 4)
        results = [None] * len(qs)

        def work(idx_arr):
            for i in idx_arr:
                q, parts = qs[i]
                results[i] = handle(q, parts)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, chunks))
        rows = [r for r in results if r is not None]
    else:
        for q, parts in qs:
            r = handle(q, parts)
            if r is not None:
                rows.append(r)

    if not rows:
        raise ValueError(f"no supported moduli up to {x}" + (f" with k={k}" if k else ""))
    count = len(rows)
    total = sum(r[1] for r in rows)
    if weighting == "uniform":
        disc_avg = math.fsum(r[2] for r in rows) / count
        mass = math.fsum(r[3] / r[1] for r in rows) / count if reg else None
    else:
        disc_avg = math.fsum(r[1] * r[2] for r in rows) / total
        mass = sum(r[3] for r in rows) / total if reg else None
    method = rows[0][4]
    return AggregateStats(
        x=x,
        k=k,
        weighting=weighting,
        modulus_count=count,
        point_total=total,
        disc_average=disc_avg,
        region_mass=mass,
        method=method,
        per_q=tuple((r[0], r[1], r[2]) for r in rows) if include_per_q else None,
    )


def _auto_H(system, x):
    p = reciprocal_prime_sum(system, x)
    return max(1, min(64, round(math.exp(min(p, 5.0)))))
