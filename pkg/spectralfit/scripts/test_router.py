#!/usr/bin/env python3
"""
Tests for constraint dispatch through the Router and the constraint factories.
"""

import json

import numpy as np
import pytest

from spectralfit import projections
from spectralfit.router import Router
from spectralfit.schema import (
    CONSTRAINT_KINDS,
    KyFanBall,
    NuclearBall,
    Orthonormal,
    RankAtMost,
    ScaledOrthonormal,
    SpectralBall,
    ball_constraint,
    create_constraint,
    encode_constraint,
)


def test_register_and_route_to_handler():
    router = Router()
    calls = []

    def handle(m, constraint):
        calls.append((m.shape, constraint))
        return "handled"

    router.register("nuclear", handle)
    assert router.is_registered("nuclear")
    assert not router.is_registered("spectral")
    assert router.get_registered_kinds() == ["nuclear"]
    assert router.route(np.eye(2), NuclearBall(1.0)) == "handled"
    assert calls == [((2, 2), NuclearBall(1.0))]


def test_route_rejects_unknown_and_invalid_constraints():
    router = Router()
    with pytest.raises(ValueError, match="Unknown constraint kind: spectral"):
        router.route(np.eye(2), SpectralBall(1.0))
    with pytest.raises(ValueError, match="expected a Constraint"):
        router.route(np.eye(2), {"kind": "nuclear", "lam": 1.0})


def test_route_validates_shape_before_handler():
    router = Router()
    router.register("rank", lambda m, c: pytest.fail("handler must not run"))
    with pytest.raises(ValueError):
        router.route(np.eye(2), RankAtMost(3))


def test_module_router_covers_every_kind():
    assert sorted(projections.router.get_registered_kinds()) == sorted(CONSTRAINT_KINDS)


def test_shape_dependent_validation():
    with pytest.raises(ValueError, match="rows >= cols"):
        projections.project(np.ones((2, 3)), Orthonormal())
    with pytest.raises(ValueError, match="column scales"):
        projections.project(np.ones((3, 2)), ScaledOrthonormal((1.0, 2.0, 3.0)))
    with pytest.raises(ValueError):
        projections.project(np.ones((3, 2)), KyFanBall(3, 1.0))


def test_create_constraint_per_kind():
    assert create_constraint("spectral", lam=2.5) == SpectralBall(2.5)
    assert create_constraint("rank", k=4) == RankAtMost(4)
    assert create_constraint("kyfan", lam=1.0, k=2) == KyFanBall(2, 1.0)
    assert create_constraint("orthonormal") == Orthonormal()
    assert create_constraint("scaled-orthonormal", scales=(1, 2)) == ScaledOrthonormal((1.0, 2.0))


def test_create_constraint_missing_parameters():
    with pytest.raises(ValueError, match="requires lambda"):
        create_constraint("nuclear")
    with pytest.raises(ValueError, match="requires k"):
        create_constraint("kyfan", lam=1.0)
    with pytest.raises(ValueError, match="requires column scales"):
        create_constraint("scaled-orthonormal")
    with pytest.raises(ValueError, match="Unknown constraint kind"):
        create_constraint("trace", lam=1.0)


def test_constraint_parameter_validation():
    for bad in [0.0, -1.0, float("inf"), float("nan"), True]:
        with pytest.raises(ValueError, match="radius"):
            NuclearBall(bad)
    with pytest.raises(ValueError, match="order k"):
        RankAtMost(0)
    with pytest.raises(ValueError, match="scales"):
        ScaledOrthonormal((1.0, -2.0))


def test_ball_constraint_and_encoding():
    assert ball_constraint("nuclear", 3.0) == NuclearBall(3.0)
    assert ball_constraint("kyfan", 3.0, 2) == KyFanBall(2, 3.0)
    with pytest.raises(ValueError, match="No ball"):
        ball_constraint("frobenius", 1.0)
    assert json.loads(encode_constraint(KyFanBall(2, 1.5))) == {"kind": "kyfan", "k": 2, "lam": 1.5}
    assert json.loads(encode_constraint(Orthonormal())) == {"kind": "orthonormal"}
