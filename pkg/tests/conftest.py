import math

import pytest

from avantsatie.chain import JointSpec, KinematicChain
from avantsatie.defaults import default_chain, default_composition, default_expressions, default_layout


@pytest.fixture(scope="session")
def chain():
    return default_chain()


@pytest.fixture(scope="session")
def expressions(chain):
    return default_expressions(chain)


@pytest.fixture(scope="session")
def layout():
    return default_layout()


@pytest.fixture(scope="session")
def composition():
    return default_composition()


def planar_chain(n_joints: int, length: float = 1.0, limit_deg: float = 180.0):
    """n hinges all about z, segments along x: a planar arm."""
    lo = -math.pi if limit_deg >= 180 else math.radians(-limit_deg)
    hi = math.pi if limit_deg >= 180 else math.radians(limit_deg)
    return KinematicChain(
        joints=tuple(JointSpec(rotation_axis=(0, 0, 1), segment_length=length, limit=(lo, hi)) for _ in range(n_joints)),
    )


def yaw_pitch_chain(n_joints: int, length: float = 0.25, limit_deg: float = 180.0):
    """Alternating z/y hinges, segments along x."""
    lo = -math.pi if limit_deg >= 180 else math.radians(-limit_deg)
    hi = math.pi if limit_deg >= 180 else math.radians(limit_deg)
    axes = [(0, 0, 1) if i % 2 == 0 else (0, 1, 0) for i in range(n_joints)]
    return KinematicChain(
        joints=tuple(JointSpec(rotation_axis=a, segment_length=length, limit=(lo, hi)) for a in axes),
    )
