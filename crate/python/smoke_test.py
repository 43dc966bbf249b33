"""Smoke test for the mixv_py extension. Build with `maturin develop -m crates/python/Cargo.toml`."""
import json
import math

import mixv_py as mv


def mixture_checks():
    a = mv.Mixture(["0", "1"], ["1"], [[["1/2", "1/2"]]])
    b = mv.Mixture(["0", "1"], ["1"], [[["2/3", "1/3"]]])
    r = mv.check_equivalence(a, b)
    assert r["equal"] is False
    assert r["witness"] == ["0"], r
    assert mv.verify_witness(a, b, r["witness"])
    assert mv.check_equivalence(a, a)["equal"] is True

    m = mv.random_mixture(4, 3, ["a", "b", "c"], seed=11)
    assert (m.n, m.k) == (4, 3)
    same = mv.equivalent_rewrite(m, seed=5)
    assert mv.check_equivalence(m, same)["equal"]
    assert mv.brute_force_equivalence(m, same)["equal"]
    pert, equal = mv.perturbed_pair(m, seed=3, magnitude="1/10")
    assert mv.check_equivalence(m, pert)["equal"] == equal
    assert mv.Mixture.from_json(m.to_json()) == m
    marginal = [m.prefix_prob([s]) for s in m.alphabet]
    assert all("/" in p or p in ("0", "1") for p in marginal)


def ising_checks():
    m = mv.IsingModel(3, [(0, 1, 0.4), (1, 2, -0.3)], [0.1, -0.2, 0.3])
    log_z = mv.partition_brute(m)
    assert math.isclose(mv.partition_via_marginals(m, oracle="exact"), log_z, rel_tol=1e-9)
    z_tv = mv.partition_via_marginals(m, eps=0.2, oracle="tv")
    assert abs(z_tv - log_z) <= math.log(1.2) + 1e-9
    mu = mv.marginal_brute(m, 1, 1)
    value, h0, delta = mv.marginal_via_tv(m, 1, 1, eps=0.2)
    assert value / 1.2 <= mu <= value * 1.2, (value, mu)
    p0, q0 = mv.build_marginal_gadget(m, 1, h0, delta)
    assert p0.n == m.n + 1
    assert 0.0 <= mv.tv_brute(p0, q0) <= 1.0
    bound = mv.gadget_error_bound(m, 1, h0, delta)
    assert bound["value"] >= 0.0
    r = mv.random_ising(5, seed=1)
    assert mv.IsingModel.from_json(r.to_json()) == r
    json.loads(r.to_json())


def error_checks():
    try:
        mv.Mixture(["0", "1"], ["1"], [[["1/2", "1/3"]]])
    except ValueError:
        pass
    else:
        raise AssertionError("invalid row accepted")


if __name__ == "__main__":
    mixture_checks()
    ising_checks()
    error_checks()
    print("smoke test ok")
