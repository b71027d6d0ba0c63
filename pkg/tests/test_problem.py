import json

import numpy as np
import pytest

from feaskit import (
    AffineOracle,
    CannotEscape,
    CfpInstance,
    DimensionMismatch,
    Ellipsoid,
    GenParams,
    InvalidParams,
    ParseError,
    generate_ellipsoid_instance,
    is_feasible,
    max_violation,
    read_instance,
    sample_infeasible_start,
    write_instance,
)
from oracles import central_difference_gradient


def test_max_violation_unit_ball(unit_ball):
    assert max_violation(unit_ball, [2.0, 0.0]) == 3.0
    assert max_violation(unit_ball, [0.0, 0.0]) == -1.0


def test_max_violation_two_halfspaces(two_halfspaces):
    assert max_violation(two_halfspaces, [3.0]) == 2.0


def test_max_violation_dimension_mismatch(unit_ball):
    with pytest.raises(DimensionMismatch):
        max_violation(unit_ball, [1.0, 2.0, 3.0])


def test_is_feasible(unit_ball):
    assert is_feasible(unit_ball, [0.0, 0.0], 0.0)
    assert not is_feasible(unit_ball, [2.0, 0.0], 0.0)
    assert is_feasible(unit_ball, [1.0, 0.0], 0.0)  # boundary, f = 0
    assert is_feasible(unit_ball, [2.0, 0.0], 3.0)
    with pytest.raises(ValueError):
        is_feasible(unit_ball, [0.0, 0.0], -1.0)


def test_ellipsoid_validation():
    with pytest.raises(ValueError, match="symmetric"):
        Ellipsoid([[1.0, 0.5], [0.0, 1.0]], [0, 0], 1.0)
    with pytest.raises(ValueError, match="positive definite"):
        Ellipsoid([[1.0, 0.0], [0.0, -1.0]], [0, 0], 1.0)
    with pytest.raises(ValueError, match="positive"):
        Ellipsoid(np.eye(2), [0, 0], 0.0)
    with pytest.raises(DimensionMismatch):
        Ellipsoid(np.eye(2), [0, 0, 0], 1.0)


def test_instance_rejects_mixed_dimensions():
    with pytest.raises(DimensionMismatch):
        CfpInstance([AffineOracle([1.0], 0.0), AffineOracle([1.0, 0.0], 0.0)])
    with pytest.raises(ValueError):
        CfpInstance([])


def test_instance_rejects_bad_slater_point(unit_ball):
    with pytest.raises(ValueError):
        CfpInstance(unit_ball.oracles, slater_point=[1.0, 0.0])


def test_batched_evaluation_matches_per_oracle():
    inst = generate_ellipsoid_instance(7, 4, seed=3)
    x = np.linspace(-1, 1, 7)
    vals, grads = inst.evaluate(x)
    np.testing.assert_allclose(vals, [o.value(x) for o in inst.oracles], rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(grads, [o.subgradient(x) for o in inst.oracles], rtol=1e-13, atol=1e-13)


def test_generation_is_deterministic():
    a = write_instance(generate_ellipsoid_instance(6, 3, seed=42))
    b = write_instance(generate_ellipsoid_instance(6, 3, seed=42))
    assert a == b
    assert a != write_instance(generate_ellipsoid_instance(6, 3, seed=43))


@pytest.mark.parametrize("seed", range(5))
def test_generated_origin_is_slater(seed):
    params = GenParams()
    inst = generate_ellipsoid_instance(8, 6, seed, params)
    vals = inst.values(np.zeros(8))
    np.testing.assert_allclose(vals, [-o.c for o in inst.oracles])
    assert np.all(vals < 0)
    assert inst.slater_margin >= params.c_lo
    assert all(params.c_lo <= o.c <= params.c_hi for o in inst.oracles)


def test_generated_matrices_are_spd_with_requested_spectrum():
    params = GenParams()
    inst = generate_ellipsoid_instance(20, 5, seed=0, params=params)
    for o in inst.oracles:
        np.testing.assert_array_equal(o.A, o.A.T)
        eig = np.linalg.eigvalsh(o.A)
        assert eig.min() > 0
        assert params.eig_lo * (1 - 1e-10) <= eig.min() and eig.max() <= params.eig_hi * (1 + 1e-10)


@pytest.mark.parametrize(
    "params",
    [GenParams(eig_lo=0.0), GenParams(eig_lo=3.0, eig_hi=2.0), GenParams(c_lo=0.0), GenParams(c_lo=2, c_hi=1),
     GenParams(b_scale=-1.0)],
)
def test_invalid_params(params):
    with pytest.raises(InvalidParams):
        generate_ellipsoid_instance(3, 2, 0, params)


def test_invalid_sizes():
    with pytest.raises(InvalidParams):
        generate_ellipsoid_instance(0, 2, 0)
    with pytest.raises(InvalidParams):
        generate_ellipsoid_instance(2, 0, 0)


def test_subgradient_matches_finite_differences():
    rng = np.random.default_rng(5)
    for trial in range(100):
        n = int(rng.integers(1, 9))
        inst = generate_ellipsoid_instance(n, 2, seed=trial)
        x = 2 * rng.standard_normal(n)
        for o in inst.oracles:
            fd = central_difference_gradient(o.value, x)
            g = o.subgradient(x)
            assert np.linalg.norm(g - fd) <= 1e-6 * max(1.0, np.linalg.norm(g))


def test_convexity_inequality():
    rng = np.random.default_rng(9)
    oracles = list(generate_ellipsoid_instance(5, 3, seed=1).oracles)
    oracles.append(AffineOracle(rng.standard_normal(5), 0.3))
    for _ in range(300):
        x, z = 3 * rng.standard_normal(5), 3 * rng.standard_normal(5)
        for o in oracles:
            assert o.value(z) >= o.value(x) + o.subgradient(x) @ (z - x) - 1e-10


def test_infeasible_start_unit_ball(unit_ball):
    x = sample_infeasible_start(unit_ball, seed=0)
    assert np.linalg.norm(x) > 1
    assert max_violation(unit_ball, x) > 0
    np.testing.assert_array_equal(x, sample_infeasible_start(unit_ball, seed=0))


def test_infeasible_start_two_halfspaces(two_halfspaces):
    for seed in range(10):
        x = sample_infeasible_start(two_halfspaces, seed)
        assert abs(x[0]) > 1
        assert max_violation(two_halfspaces, x) > 0


def test_infeasible_start_cannot_escape():
    # a halfspace contains the whole ray in one direction
    inst = CfpInstance([AffineOracle([1.0], 1.0)], slater_point=[0.0])
    escapes = {float(np.sign(sample_infeasible_start_or_none(inst, s))) for s in range(20)}
    assert escapes == {1.0, 0.0}


def sample_infeasible_start_or_none(inst, seed):
    try:
        return sample_infeasible_start(inst, seed)[0]
    except CannotEscape:
        return 0.0


def test_infeasible_start_needs_slater_point():
    inst = CfpInstance([AffineOracle([1.0], 1.0)])
    with pytest.raises(ValueError):
        sample_infeasible_start(inst, 0)


def test_roundtrip():
    inst = generate_ellipsoid_instance(5, 3, seed=7)
    data = write_instance(inst)
    back = read_instance(data)
    assert write_instance(back) == data
    assert back.id == inst.id
    for o, p in zip(inst.oracles, back.oracles):
        np.testing.assert_array_equal(o.A, p.A)
        np.testing.assert_array_equal(o.b, p.b)
        assert o.c == p.c
    np.testing.assert_array_equal(back.slater_point, inst.slater_point)


def _doc():
    return json.loads(write_instance(generate_ellipsoid_instance(3, 2, seed=1)))


def test_read_rejects_nonsymmetric():
    doc = _doc()
    doc["ellipsoids"][1]["A"][0][1] += 0.5
    with pytest.raises(ParseError) as exc:
        read_instance(json.dumps(doc).encode())
    assert exc.value.field == "ellipsoids[1].A"


def test_read_rejects_zero_c():
    doc = _doc()
    doc["ellipsoids"][0]["c"] = 0
    with pytest.raises(ParseError) as exc:
        read_instance(json.dumps(doc))
    assert exc.value.field == "ellipsoids[0].c"


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda d: d.update(schema="other"), "schema"),
        (lambda d: d.pop("n"), "n"),
        (lambda d: d.update(m=5), "ellipsoids"),
        (lambda d: d["ellipsoids"][0].update(b=[1.0]), "ellipsoids[0].b"),
        (lambda d: d["ellipsoids"][0].update(c="x"), "ellipsoids[0].c"),
        (lambda d: d.update(slater_point=[100.0, 100.0, 100.0]), "slater_point"),
    ],
)
def test_read_field_diagnostics(mutate, field):
    doc = _doc()
    mutate(doc)
    with pytest.raises(ParseError) as exc:
        read_instance(json.dumps(doc))
    assert exc.value.field == field


def test_read_reports_line_of_syntax_error():
    text = write_instance(generate_ellipsoid_instance(2, 1, seed=0)).decode()
    lines = text.splitlines()
    lines[3] = lines[3] + " oops"
    with pytest.raises(ParseError) as exc:
        read_instance("\n".join(lines))
    assert exc.value.line == 4
