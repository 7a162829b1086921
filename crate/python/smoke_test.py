"""Quick check that the compiled `josephus` module imports and agrees with
itself. Build it first:

    cd crates/py && maturin develop --release
"""

import math
from fractions import Fraction

import josephus


def main():
    assert josephus.survivor(41) == (18, 19)
    for n in (1, 2, 3, 100, 12345):
        a = josephus.survivor(n)
        assert a == josephus.survivor(n, "closed_form") == josephus.survivor(n, "binary_rotation")
    series = josephus.generating_series(64)
    assert series[0] == 0
    assert all(series[n] == josephus.survivor(n)[1] for n in range(1, 65))

    rule = josephus.Rule.r1(0.5)
    assert rule.kind == "r1" and rule.p == 0.5 and rule.q is None
    d = josephus.distribution(rule, 2000)
    assert len(d) == d.n == 2000 and d.method == "exact_dp"
    assert abs(d.total() - 1.0) < 1e-12
    assert d.mirror_asymmetry() < 1e-12
    assert abs(d.moment(1) - d[0] / 2) < 1e-12
    assert abs(d.expectation(lambda x: math.sin(2 * math.pi * x))) < 1e-12

    g4 = josephus.distribution(josephus.Rule.r1(0.3), 4).probs
    assert all(abs(a - b) < 1e-15 for a, b in zip(g4, [0.3, 0.49, 0.0, 0.21]))

    exact = josephus.oracle("r3", 6, Fraction(1, 4), Fraction(3, 4))
    assert sum(exact) == 1
    assert exact == josephus.exact_distribution("r3", 6, Fraction(1, 4), Fraction(3, 4))
    float_dp = josephus.distribution(josephus.Rule.r3(0.25, 0.75), 6).probs
    assert all(abs(float(e) - f) < 1e-12 for e, f in zip(exact, float_dp))

    counts = josephus.simulate(rule, 200, 5000, 7)
    assert sum(counts) == 5000 and counts == josephus.simulate(rule, 200, 5000, 7)
    mc = josephus.empirical_distribution(rule, 200, 5000, 7)
    assert mc.method == "monte_carlo" and mc.samples == 5000
    assert 0 <= josephus.sample_survivor(rule, 200, 7) < 200

    beta, gamma = josephus.decay_params(0.5)
    assert gamma > 1
    fit = josephus.decay_bound_check(0.5, 200)
    assert fit["stabilized"]
    try:
        josephus.decay_params(0.2)
    except ValueError:
        pass
    else:
        raise AssertionError("p = 0.2 should be rejected")

    report = josephus.moment_report(rule, 3, 50)
    assert len(report["per_n"]) == 48
    sums = josephus.second_moment_sums(1000)
    assert sums["increasing"]
    clt = josephus.clt(200, 1000, 3)
    assert len(clt["normalized_sums"]) == 1000

    print("josephus smoke test ok:", d, f"beta={beta:.4f} gamma={gamma:.4f}", f"KS={clt['ks_distance']:.4f}")


if __name__ == "__main__":
    main()
