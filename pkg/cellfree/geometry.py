"""
AP and user placement on a wrap-around square.

Planar distances are the minimum over the nine toroidal images of the
second point, so every node sees the same neighbourhood statistics no
matter where it sits in the square. The AP-user height difference is
added after that minimum; nodes of the same kind share a plane.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import ParameterError
from .streams import Stream, substream

# Offsets of the 3x3 block of images, in units of the side length
_SHIFTS = np.array([(dx, dy) for dx in (-1.0, 0.0, 1.0) for dy in (-1.0, 0.0, 1.0)])


@dataclass(frozen=True)
class Deployment:
    side_length: float
    ap_positions: np.ndarray
    user_positions: np.ndarray
    height_diff: float
    rng_seed: int

    @property
    def M(self):
        return self.ap_positions.shape[0]

    @property
    def K(self):
        return self.user_positions.shape[0]

    def ap_user_planar(self):
        return pairwise_planar_distances(self.ap_positions, self.user_positions, self.side_length)

    def ap_user_distances(self):
        """M x K 3-D distances including the height difference."""
        return np.hypot(self.ap_user_planar(), self.height_diff)

    def user_user_distances(self):
        return pairwise_planar_distances(self.user_positions, self.user_positions, self.side_length)

    def ap_ap_distances(self):
        return pairwise_planar_distances(self.ap_positions, self.ap_positions, self.side_length)


def generate_deployment(scenario, seed):
    """Drop M APs and K users i.i.d. uniformly on the square."""
    M, K, side = scenario.M, scenario.K, scenario.side_length_m
    if M < 1 or K < 1:
        raise ParameterError(f"deployment needs M >= 1 and K >= 1, got M={M}, K={K}")
    if not side > 0:
        raise ParameterError(f"side length must be positive, got {side}")

    rng = substream(seed, Stream.DEPLOYMENT)
    ap_positions = rng.uniform(0.0, side, size=(M, 2))
    user_positions = rng.uniform(0.0, side, size=(K, 2))
    return Deployment(
        side_length=float(side),
        ap_positions=ap_positions,
        user_positions=user_positions,
        height_diff=float(scenario.height_diff_m),
        rng_seed=int(seed),
    )


def pairwise_planar_distances(a_points, b_points, side):
    """Toroidal planar distance between every row of ``a_points`` and ``b_points``."""
    a_points = np.atleast_2d(np.asarray(a_points, dtype=float))
    b_points = np.atleast_2d(np.asarray(b_points, dtype=float))
    diff = a_points[:, None, None, :] - b_points[None, :, None, :] + _SHIFTS[None, None, :, :] * side
    return np.sqrt(np.sum(diff ** 2, axis=-1)).min(axis=-1)


def wrap_distance(a, b, side, height=0.0):
    """Wrap-around 3-D distance between two points of the square."""
    planar = pairwise_planar_distances(a, b, side)[0, 0]
    return float(np.hypot(planar, height))
