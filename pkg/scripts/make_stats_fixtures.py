#!/usr/bin/env python3
"""Generate frozen high-precision fixtures for the stats test suite.

Computes Welch t-test and TOST p-values with mpmath at 50 decimal digits,
via the regularized incomplete beta function, entirely independent of the
scipy routines used by the package. Also searches for integer Likert count
vectors (n=1250, scores 1..5) whose sample mean and sample std round to the
published two-decimal summary values, so the large-sample decision tests can
run on concrete data.

Writes tests/fixtures/stats_fixtures.json. Rerunning regenerates the same
file (everything below is deterministic).
"""

import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from mpmath import mp

mp.dps = 50

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "stats_fixtures.json"


def t_sf(t, df):
    """P(T > t) for Student's t with df degrees of freedom."""
    t = mp.mpf(t)
    df = mp.mpf(df)
    x = df / (df + t * t)
    half = mp.betainc(df / 2, mp.mpf(1) / 2, 0, x, regularized=True) / 2
    return half if t >= 0 else 1 - half


def t_cdf(t, df):
    return t_sf(-mp.mpf(t), df)


def describe(xs):
    n = len(xs)
    xs = [mp.mpf(x) for x in xs]
    mean = mp.fsum(xs) / n
    var = mp.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, var, n


def welch(a, b):
    mean_a, var_a, n_a = describe(a)
    mean_b, var_b, n_b = describe(b)
    va = var_a / n_a
    vb = var_b / n_b
    se = mp.sqrt(va + vb)
    if se == 0:
        df = mp.mpf(n_a + n_b - 2)
        t = mp.mpf(0)
        p = mp.mpf(1)
        return t, df, p, se, mean_a - mean_b
    df = (va + vb) ** 2 / (va**2 / (n_a - 1) + vb**2 / (n_b - 1))
    t = (mean_a - mean_b) / se
    p = 2 * t_sf(abs(t), df)
    if p > 1:
        p = mp.mpf(1)
    return t, df, p, se, mean_a - mean_b


def pooled_sd(a, b):
    _, var_a, n_a = describe(a)
    _, var_b, n_b = describe(b)
    return mp.sqrt(((n_a - 1) * var_a + (n_b - 1) * var_b) / (n_a + n_b - 2))


def tost(a, b, d_bound):
    raw = mp.mpf(d_bound) * pooled_sd(a, b)
    _, df, _, se, diff = welch(a, b)
    t_lower = (diff + raw) / se
    t_upper = (diff - raw) / se
    p_lower = t_sf(t_lower, df)
    p_upper = t_cdf(t_upper, df)
    return raw, p_lower, p_upper, max(p_lower, p_upper)


def expand(counts):
    """[c1..c5] -> list of scores."""
    out = []
    for score, c in zip(range(1, 6), counts):
        out.extend([score] * c)
    return out


def find_counts(n, mean_target, sd_target):
    """Integer counts over scores 1..5 with sample stats rounding to targets.

    Searches sums S and squared sums Q consistent with the two-decimal
    rounded mean and std, then solves the 3-equation linear system for
    (c1, c2, c3) given (c4, c5). Returns the first solution in a fixed
    deterministic scan order.
    """
    s_lo = math.ceil((mean_target - 0.005) * n)
    s_hi = math.floor((mean_target + 0.005) * n)
    for S in range(s_lo, s_hi + 1):
        # sample var = (Q - S^2/n) / (n-1); want sqrt to round to sd_target
        v_lo = (sd_target - 0.005) ** 2
        v_hi = (sd_target + 0.005) ** 2
        q_lo = math.ceil(v_lo * (n - 1) + S * S / n)
        q_hi = math.floor(v_hi * (n - 1) + S * S / n)
        for Q in range(q_lo, q_hi + 1):
            mean = Fraction(S, n)
            var = Fraction(Q * n - S * S, n * (n - 1))
            if round(float(mean), 2) != round(mean_target, 2):
                continue
            sd = math.sqrt(var)
            if round(sd, 2) != round(sd_target, 2):
                continue
            for c5 in range(n + 1):
                for c4 in range(n + 1 - c5):
                    A = n - c4 - c5
                    B = S - 4 * c4 - 5 * c5
                    C = Q - 16 * c4 - 25 * c5
                    if (C - B) % 2:
                        continue
                    c3 = (C - B) // 2 - (B - A)
                    c2 = (B - A) - 2 * c3
                    c1 = A - c2 - c3
                    if min(c1, c2, c3) < 0:
                        continue
                    counts = [c1, c2, c3, c4, c5]
                    xs = expand(counts)
                    assert len(xs) == n and sum(xs) == S
                    assert sum(x * x for x in xs) == Q
                    return counts
    raise SystemExit(f"no composition for n={n} mean={mean_target} sd={sd_target}")


def fixture(name, a, b, d_bound=None, counts_a=None, counts_b=None):
    t, df, p, _, _ = welch(a, b)
    entry = {
        "name": name,
        "welch": {
            "t": mp.nstr(t, 25),
            "df": mp.nstr(df, 25),
            "p": mp.nstr(p, 25),
        },
    }
    if counts_a is not None:
        entry["counts_a"] = counts_a
        entry["counts_b"] = counts_b
    else:
        entry["a"] = a
        entry["b"] = b
    if d_bound is not None:
        raw, p_lo, p_up, p_tost = tost(a, b, d_bound)
        entry["tost"] = {
            "d_bound": d_bound,
            "raw_bound": mp.nstr(raw, 25),
            "p_lower": mp.nstr(p_lo, 25),
            "p_upper": mp.nstr(p_up, 25),
            "p_tost": mp.nstr(p_tost, 25),
        }
    return entry


def main():
    print("searching Likert compositions ...", flush=True)
    monet_v = find_counts(1250, 3.20, 1.59)
    monet_s = find_counts(1250, 2.91, 1.76)
    selfie_v = find_counts(1250, 3.11, 1.76)
    selfie_s = find_counts(1250, 3.08, 1.50)
    for tag, c in [
        ("monet victim", monet_v),
        ("monet surrogate", monet_s),
        ("selfie victim", selfie_v),
        ("selfie surrogate", selfie_s),
    ]:
        xs = expand(c)
        m = sum(xs) / len(xs)
        sd = math.sqrt(sum((x - m) ** 2 for x in xs) / (len(xs) - 1))
        print(f"  {tag}: counts={c} mean={m:.4f} sd={sd:.4f}")

    fixtures = [
        fixture("small_int", [1, 2, 2, 3, 5], [2, 4, 4, 4, 5, 5, 5], d_bound=0.5),
        fixture("identical", [3, 3, 4, 4, 5], [3, 3, 4, 4, 5], d_bound=0.3),
        fixture(
            "likert_30_30",
            [1, 1, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4, 4, 4, 5, 5, 5, 5, 5, 5, 5, 5, 5],
            [1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4, 5, 5, 5, 5, 5, 5, 5],
            d_bound=0.3,
        ),
        fixture(
            "unequal_var",
            [10.1, 10.2, 9.9, 10.0, 10.3, 9.8, 10.1, 10.0, 9.9, 10.2, 10.1, 10.0],
            [8.5, 12.0, 9.7, 11.3, 7.9, 12.8, 10.4, 9.1],
            d_bound=1.0,
        ),
        fixture(
            "large_effect",
            [5.2, 5.8, 6.1, 5.5, 5.9, 6.3, 5.4, 5.7, 6.0, 5.6, 5.3, 6.2, 5.8, 5.5, 5.9, 6.1, 5.4, 5.7, 6.0, 5.6],
            [3.1, 3.8, 2.9, 3.5, 3.2, 3.9, 3.0, 3.6, 3.3, 3.7, 3.4, 2.8, 3.5, 3.1, 3.8, 3.2, 3.6, 3.0, 3.4, 3.7],
            d_bound=0.3,
        ),
        fixture(
            "tiny_effect",
            [4.01, 3.99, 4.02, 3.98, 4.0, 4.01, 3.99, 4.0, 4.02, 3.98] * 5,
            [4.0, 4.01, 3.99, 4.0, 4.02, 3.98, 4.01, 3.99] * 5,
            d_bound=0.3,
        ),
        fixture(
            "float_normalish",
            [0.497, 1.22, -0.138, 0.648, 0.843, -1.137, 1.327, -0.315, 0.498, 0.651, 0.112, -0.547, 0.93, 0.201, -0.088],
            [0.741, 0.529, -0.624, 1.058, 0.355, -0.217, 0.817, 0.429, 1.263, -0.042, 0.572, 0.66, -0.381, 0.91, 0.188, 0.474, -0.155, 0.733, 0.295, 0.611, 0.07, -0.508, 0.823, 0.397, 1.101],
            d_bound=0.4,
        ),
        fixture(
            "skewed",
            [1, 1, 1, 1, 1, 1, 2, 3, 5],
            [5, 5, 5, 5, 5, 4, 4, 3, 1],
            d_bound=0.3,
        ),
        fixture("minimum_n", [1.0, 2.0], [1.5, 3.5], d_bound=0.5),
        fixture(
            "one_side_constant",
            [4, 4, 4, 4, 4, 4, 4, 4],
            [3, 4, 5, 3, 4, 5, 4, 4],
            d_bound=0.3,
        ),
        fixture(
            "monet_1250",
            expand(monet_v),
            expand(monet_s),
            d_bound=0.3,
            counts_a=monet_v,
            counts_b=monet_s,
        ),
        fixture(
            "selfie_1250",
            expand(selfie_v),
            expand(selfie_s),
            d_bound=0.3,
            counts_a=selfie_v,
            counts_b=selfie_s,
        ),
    ]

    selfie_raw = mp.mpf("0.3") * pooled_sd(expand(selfie_v), expand(selfie_s))
    monet_raw = mp.mpf("0.3") * pooled_sd(expand(monet_v), expand(monet_s))
    doc = {
        "description": "high-precision (50-digit) Welch/TOST reference values",
        "fixtures": fixtures,
        "likert_reference": {
            "n_per_side": 1250,
            "d_bound": 0.3,
            "monet": {
                "counts_victim": monet_v,
                "counts_surrogate": monet_s,
                "raw_bound": mp.nstr(monet_raw, 25),
            },
            "selfie": {
                "counts_victim": selfie_v,
                "counts_surrogate": selfie_s,
                "raw_bound": mp.nstr(selfie_raw, 25),
            },
        },
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {OUT} ({len(fixtures)} fixtures)")


if __name__ == "__main__":
    sys.exit(main())
