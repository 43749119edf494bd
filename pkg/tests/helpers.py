import numpy as np

from sigstream.stream import PiecewiseLinearPath


def circle(samples=720, turns=1, radius=1.0):
    th = np.linspace(0.0, 2.0 * np.pi * turns, samples)
    return PiecewiseLinearPath.from_points(radius * np.c_[np.cos(th), np.sin(th)])


def random_path(rng, d, segments, scale=1.0):
    pts = np.cumsum(np.vstack([np.zeros(d), scale * rng.normal(size=(segments, d))]), axis=0)
    times = np.concatenate([[0.0], np.cumsum(rng.uniform(0.1, 1.0, size=segments))])
    return PiecewiseLinearPath(times, pts)
